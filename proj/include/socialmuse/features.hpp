// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <tuple>
#include <vector>

#include "socialmuse/graph.hpp"
#include "socialmuse/semantics.hpp"
#include "socialmuse/trial.hpp"

namespace socialmuse {

inline constexpr std::size_t kFeatureCount = 36;
inline constexpr std::size_t kSemanticFeatureCount = 23;
inline constexpr std::size_t kNetworkFeatureBegin = 23;
inline constexpr std::size_t kRoundIdIndex = 35;
inline constexpr std::string_view kFeatureLayoutVersion = "socialmuse-features-v1";

enum class FeatureCategory { Semantic, Network, Nuisance };
std::string_view to_string(FeatureCategory c);

/// Canonical, versioned feature order.
const std::array<std::string_view, kFeatureCount>& feature_names();
FeatureCategory feature_category(std::size_t index);
std::optional<std::size_t> feature_index(std::string_view name);

/// Model input for one (ego, round, alter-pair) context. NaN marks a value
/// that could not be computed and must be imputed before prediction.
struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  bool has_missing() const;
};

/// Shared, read-only lexical resources.
struct SemanticResources {
  Taxonomy taxonomy;
  EmbeddingTable table_a;
  EmbeddingTable table_b;
};

/// Builds feature vectors for one trial state, memoizing the per-round
/// semantic pieces shared by the 15 candidates of an ego. Not thread-safe;
/// use one assembler per thread.
class FeatureAssembler {
 public:
  FeatureAssembler(const SemanticResources& resources, const TrialState& state);

  /// Semantic block from round t-1 ideas; network block from the round-t
  /// network of earlier egos plus the ego following `pair`.
  FeatureVector assemble(EgoId ego, int round, AlterPair pair);

  /// Drops memoized values; call after the trial state gains ideas for a
  /// round that was already queried.
  void clear_cache();

 private:
  double ego_cq(EgoId ego, int round, std::optional<int> attempt);
  double alter_cq(AlterId alter, int round);
  const Document& ego_doc(EgoId ego, int round);
  const Document& alter_doc(AlterId alter, int round);
  double distance(DistanceMethod m, const Document& a, const Document& b);

  const SemanticResources& res_;
  const TrialState& state_;
  std::map<std::tuple<std::int32_t, int, int>, double> ego_cq_;
  std::map<std::pair<std::int32_t, int>, double> alter_cq_;
  std::map<std::pair<std::int32_t, int>, Document> ego_docs_;
  std::map<std::pair<std::int32_t, int>, Document> alter_docs_;
  std::map<std::tuple<int, const Document*, const Document*>, double> dist_;
  std::map<std::tuple<int, std::int32_t, std::int32_t>, Document> concat_docs_;
};

/// One-shot convenience wrapper around FeatureAssembler.
FeatureVector assemble(const SemanticResources& resources, const TrialState& state, EgoId ego,
                       int round, AlterPair pair);

/// Frozen per-feature standardization; zero-scale features map to 0.
struct ScalerParams {
  std::vector<double> mean;
  std::vector<double> scale;

  /// Population mean and standard deviation of each column (row-major input).
  static ScalerParams fit(std::span<const double> rows, std::size_t n_features);
  void transform(std::span<double> row) const;
};

FeatureVector standardize(const FeatureVector& vec, const ScalerParams& scaler);

/// Replaces NaN entries by the stored training means.
void impute(std::span<double> row, std::span<const double> means);

}  // namespace socialmuse
