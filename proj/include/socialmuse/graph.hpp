// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string_view>
#include <vector>

namespace socialmuse {

template <class Tag>
struct Id {
  std::int32_t value = 0;
  auto operator<=>(const Id&) const = default;
};

using EgoId = Id<struct EgoTag>;
using AlterId = Id<struct AlterTag>;

/// Unordered pair of distinct alters, stored with first < second.
class AlterPair {
 public:
  AlterPair() = default;
  AlterPair(AlterId a, AlterId b);

  AlterId first() const { return first_; }
  AlterId second() const { return second_; }
  bool contains(AlterId a) const { return a == first_ || a == second_; }

  auto operator<=>(const AlterPair&) const = default;

 private:
  AlterId first_{0};
  AlterId second_{1};
};

/// All C(n_alters, 2) pairs in lexicographic order.
std::vector<AlterPair> all_alter_pairs(int n_alters);

/// One round of the ego-alter follow network. Each present ego follows
/// exactly two distinct alters; arrival order lists each ego at most once.
struct BipartiteRound {
  int round_index = 1;
  int n_alters = 6;
  std::vector<EgoId> arrival_order;
  std::map<EgoId, AlterPair> follows;

  /// Throws InvalidInput if an ego is missing a pair, appears twice, or
  /// follows an alter outside [0, n_alters).
  void validate() const;

  /// Arrival-order prefix ending at `upto` (inclusive). Throws NotFound.
  std::vector<EgoId> prefix(EgoId upto) const;

  /// Follower count per alter over the given egos.
  std::vector<int> follower_counts(std::span<const EgoId> egos) const;
  std::vector<int> follower_counts() const { return follower_counts(arrival_order); }
};

/// Weighted one-mode projection on the egos: w(i,j) = |alters(i) ∩ alters(j)|.
class EgoProjection {
 public:
  EgoProjection() = default;
  EgoProjection(std::vector<EgoId> nodes, std::vector<int> weights);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<EgoId>& nodes() const { return nodes_; }
  int weight(std::size_t i, std::size_t j) const { return weights_[i * nodes_.size() + j]; }
  /// Weight between two ego ids; 0 when either is absent or they share no alter.
  int weight(EgoId a, EgoId b) const;
  std::size_t index_of(EgoId ego) const;  // throws NotFound

  int degree(std::size_t i) const;
  double strength(std::size_t i) const;
  int max_weight() const;
  std::size_t edge_count() const;

 private:
  std::vector<EgoId> nodes_;
  std::vector<int> weights_;
};

EgoProjection project_onto_egos(const BipartiteRound& round, EgoId upto_ego);

struct FollowerShares {
  std::vector<double> counts;
  std::vector<double> shares;

  static FollowerShares from_counts(std::span<const double> counts);
  static FollowerShares from_counts(std::span<const int> counts);
  std::size_t alter_count() const { return counts.size(); }
};

struct GiniResult {
  double value = 0.0;
  /// Set when every follower count is zero; value is then 0.
  bool degenerate = false;
};

/// Mean absolute difference of follower shares, normalized to [0, 1].
GiniResult gini_coefficient(const FollowerShares& shares);

// Per-node analytics on a projection. Shortest-path measures use edge
// distance 1/w; eigenvector and PageRank use raw weights.
std::vector<int> triangle_counts(const EgoProjection& g);
std::vector<double> weighted_local_clustering(const EgoProjection& g);
double average_weighted_clustering(const EgoProjection& g);
double transitivity(const EgoProjection& g);
std::vector<double> degree_centrality(const EgoProjection& g);
std::vector<double> betweenness_centrality(const EgoProjection& g);
std::vector<double> harmonic_closeness(const EgoProjection& g);
/// Unit-norm principal eigenvector of the component containing `focal`;
/// zero elsewhere and for isolated nodes.
std::vector<double> eigenvector_centrality(const EgoProjection& g, std::size_t focal);
std::vector<double> pagerank(const EgoProjection& g, double damping = 0.85,
                             double tolerance = 1e-10, int max_iterations = 200);
std::vector<double> average_neighbor_degree(const EgoProjection& g);

struct NetworkFeatureBlock {
  static constexpr std::size_t kSize = 12;
  static const std::array<std::string_view, kSize>& names();

  double network_size = 0;
  double gini = 0;
  double global_clustering = 0;
  double transitivity = 0;
  double local_clustering = 0;
  double degree_centrality = 0;
  double betweenness = 0;
  double eigenvector = 0;
  double closeness = 0;
  double pagerank = 0;
  double avg_neighbor_degree = 0;
  double triangle_count = 0;

  std::array<double, kSize> to_array() const;
};

/// Network-structural context of `focal_ego` in the arrival-order prefix
/// ending at that ego.
NetworkFeatureBlock structural_features(const BipartiteRound& round, EgoId focal_ego);

}  // namespace socialmuse

template <class Tag>
struct std::hash<socialmuse::Id<Tag>> {
  std::size_t operator()(const socialmuse::Id<Tag>& id) const noexcept {
    return std::hash<std::int32_t>{}(id.value);
  }
};
