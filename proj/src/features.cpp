// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#include "socialmuse/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "socialmuse/error.hpp"

namespace socialmuse {

namespace {
constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
}

std::string_view to_string(FeatureCategory c) {
  switch (c) {
    case FeatureCategory::Semantic: return "semantic";
    case FeatureCategory::Network: return "network";
    case FeatureCategory::Nuisance: return "nuisance";
  }
  return "?";
}

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static const std::array<std::string_view, kFeatureCount> kNames = {
      "cq_ego_attempt1",
      "cq_ego_attempt2",
      "cq_ego_combined",
      "cq_alter_sum",
      "cosine_a_min",
      "cosine_a_max",
      "cosine_a_mean",
      "cosine_a_std",
      "cosine_a_concat",
      "cosine_a_alter_alter",
      "wmd_a_min",
      "wmd_a_max",
      "wmd_a_mean",
      "wmd_a_std",
      "wmd_a_concat",
      "wmd_a_alter_alter",
      "cosine_b_min",
      "cosine_b_max",
      "cosine_b_mean",
      "cosine_b_std",
      "cosine_b_concat",
      "cosine_b_alter_alter",
      "gender_diversity",
      "network_size",
      "gini",
      "global_clustering",
      "transitivity",
      "local_clustering",
      "degree_centrality",
      "betweenness",
      "eigenvector",
      "closeness",
      "pagerank",
      "avg_neighbor_degree",
      "triangle_count",
      "round_id",
  };
  return kNames;
}

FeatureCategory feature_category(std::size_t index) {
  if (index < kSemanticFeatureCount) return FeatureCategory::Semantic;
  if (index < kRoundIdIndex) return FeatureCategory::Network;
  if (index == kRoundIdIndex) return FeatureCategory::Nuisance;
  throw Error(ErrorCode::InvalidInput, "feature index out of range");
}

std::optional<std::size_t> feature_index(std::string_view name) {
  const auto& names = feature_names();
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

bool FeatureVector::has_missing() const {
  return std::any_of(values.begin(), values.end(), [](double v) { return std::isnan(v); });
}

FeatureAssembler::FeatureAssembler(const SemanticResources& resources, const TrialState& state)
    : res_(resources), state_(state) {}

void FeatureAssembler::clear_cache() {
  ego_cq_.clear();
  alter_cq_.clear();
  dist_.clear();
  ego_docs_.clear();
  alter_docs_.clear();
  concat_docs_.clear();
}

double FeatureAssembler::ego_cq(EgoId ego, int round, std::optional<int> attempt) {
  const auto key = std::make_tuple(ego.value, round, attempt.value_or(0));
  if (auto it = ego_cq_.find(key); it != ego_cq_.end()) return it->second;
  const auto concepts = state_.concepts(Role::Ego, ego.value, round, attempt);
  const double q = creativity_quotient(res_.taxonomy, std::span<const std::string>(concepts)).quotient;
  ego_cq_.emplace(key, q);
  return q;
}

double FeatureAssembler::alter_cq(AlterId alter, int round) {
  const auto key = std::make_pair(alter.value, round);
  if (auto it = alter_cq_.find(key); it != alter_cq_.end()) return it->second;
  const auto concepts = state_.concepts(Role::Alter, alter.value, round);
  const double q = creativity_quotient(res_.taxonomy, std::span<const std::string>(concepts)).quotient;
  alter_cq_.emplace(key, q);
  return q;
}

const Document& FeatureAssembler::ego_doc(EgoId ego, int round) {
  const auto key = std::make_pair(ego.value, round);
  auto it = ego_docs_.find(key);
  if (it == ego_docs_.end()) {
    it = ego_docs_.emplace(key, state_.document(Role::Ego, ego.value, round, 1)).first;
  }
  return it->second;
}

const Document& FeatureAssembler::alter_doc(AlterId alter, int round) {
  const auto key = std::make_pair(alter.value, round);
  auto it = alter_docs_.find(key);
  if (it == alter_docs_.end()) {
    it = alter_docs_.emplace(key, state_.document(Role::Alter, alter.value, round)).first;
  }
  return it->second;
}

double FeatureAssembler::distance(DistanceMethod m, const Document& a, const Document& b) {
  const auto key = std::make_tuple(static_cast<int>(m), &a, &b);
  if (auto it = dist_.find(key); it != dist_.end()) return it->second;
  const double d = try_doc_distance(m, res_.table_a, res_.table_b, a, b).value_or(kMissing);
  dist_.emplace(key, d);
  return d;
}

FeatureVector FeatureAssembler::assemble(EgoId ego, int round, AlterPair pair) {
  if (round < 2) {
    throw Error(ErrorCode::InvalidInput, "features need a previous round; got round " +
                                             std::to_string(round));
  }
  if (pair.second().value >= state_.n_alters()) {
    throw Error(ErrorCode::InvalidInput, "alter pair outside the trial");
  }
  const int prev = round - 1;
  const AlterId a = pair.first(), b = pair.second();
  FeatureVector f;

  f[0] = ego_cq(ego, prev, 1);
  f[1] = ego_cq(ego, prev, 2);
  f[2] = ego_cq(ego, prev, std::nullopt);
  f[3] = alter_cq(a, prev) + alter_cq(b, prev);

  const Document& ego_d = ego_doc(ego, prev);
  const Document& doc_a = alter_doc(a, prev);
  const Document& doc_b = alter_doc(b, prev);
  auto concat_key = std::make_tuple(prev, a.value, b.value);
  auto cit = concat_docs_.find(concat_key);
  if (cit == concat_docs_.end()) {
    Document joined = doc_a;
    joined.insert(joined.end(), doc_b.begin(), doc_b.end());
    cit = concat_docs_.emplace(concat_key, std::move(joined)).first;
  }
  const Document& concat = cit->second;

  std::size_t slot = 4;
  for (DistanceMethod m : kDistanceMethods) {
    const double da = distance(m, ego_d, doc_a);
    const double db = distance(m, ego_d, doc_b);
    f[slot + 0] = std::min(da, db);
    f[slot + 1] = std::max(da, db);
    f[slot + 2] = (da + db) / 2.0;
    f[slot + 3] = std::abs(da - db) / 2.0;  // population std of two values
    f[slot + 4] = distance(m, ego_d, concat);
    f[slot + 5] = distance(m, doc_a, doc_b);
    if (std::isnan(da) || std::isnan(db)) {
      for (std::size_t k = 0; k < 4; ++k) f[slot + k] = kMissing;
    }
    slot += 6;
  }

  try {
    const Gender g = state_.gender(Role::Ego, ego.value);
    f[22] = (state_.gender(Role::Alter, a.value) != g ? 1.0 : 0.0) +
            (state_.gender(Role::Alter, b.value) != g ? 1.0 : 0.0);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotFound) throw;
    f[22] = kMissing;
  }

  const BipartiteRound hypothetical = state_.hypothetical_round(round, ego, pair);
  const auto net = structural_features(hypothetical, ego).to_array();
  std::copy(net.begin(), net.end(), f.values.begin() + kNetworkFeatureBegin);
  f[kRoundIdIndex] = round;
  return f;
}

FeatureVector assemble(const SemanticResources& resources, const TrialState& state, EgoId ego,
                       int round, AlterPair pair) {
  FeatureAssembler assembler(resources, state);
  return assembler.assemble(ego, round, pair);
}

ScalerParams ScalerParams::fit(std::span<const double> rows, std::size_t n_features) {
  if (n_features == 0 || rows.size() % n_features != 0) {
    throw Error(ErrorCode::InvalidInput, "row-major matrix size is not a multiple of the width");
  }
  const std::size_t n = rows.size() / n_features;
  ScalerParams p;
  p.mean.assign(n_features, 0.0);
  p.scale.assign(n_features, 0.0);
  if (n == 0) return p;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n_features; ++j) p.mean[j] += rows[i * n_features + j];
  }
  for (double& m : p.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n_features; ++j) {
      const double d = rows[i * n_features + j] - p.mean[j];
      p.scale[j] += d * d;
    }
  }
  for (double& s : p.scale) s = std::sqrt(s / static_cast<double>(n));
  return p;
}

void ScalerParams::transform(std::span<double> row) const {
  for (std::size_t j = 0; j < row.size(); ++j) {
    row[j] = scale[j] > 0 ? (row[j] - mean[j]) / scale[j] : 0.0;
  }
}

FeatureVector standardize(const FeatureVector& vec, const ScalerParams& scaler) {
  if (scaler.mean.size() != kFeatureCount || scaler.scale.size() != kFeatureCount) {
    throw Error(ErrorCode::InvalidInput, "scaler width does not match the feature layout");
  }
  FeatureVector out = vec;
  scaler.transform(out.values);
  return out;
}

void impute(std::span<double> row, std::span<const double> means) {
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (std::isnan(row[j])) row[j] = means[j];
  }
}

}  // namespace socialmuse
