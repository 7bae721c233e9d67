// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#include "socialmuse/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "socialmuse/error.hpp"

namespace socialmuse {

namespace {
constexpr int kMinDominanceSize = 2;
constexpr int kMaxDominanceSize = 18;
}  // namespace

Recommendation recommend(const TrialState& state, EgoId ego, int round, const TreeEnsemble* model,
                         FeatureAssembler& assembler) {
  if (model == nullptr) throw Error(ErrorCode::NotReady, "no trained model is loaded");
  Recommendation rec;
  rec.trial = state.trial();
  rec.condition = state.condition();
  rec.ego = ego;
  rec.round = round;

  for (const AlterPair& pair : all_alter_pairs(state.n_alters())) {
    CandidateScore c;
    c.pair = pair;
    c.features = assembler.assemble(ego, round, pair);
    c.score = model->predict(c.features);
    c.attribution = model->shap(c.features);
    rec.candidates.push_back(std::move(c));
  }
  if (rec.candidates.empty()) throw Error(ErrorCode::InvalidInput, "trial has fewer than two alters");
  rec.network_size = static_cast<int>(rec.candidates.front().features[kNetworkFeatureBegin]);

  for (std::size_t i = 1; i < rec.candidates.size(); ++i) {
    if (rec.candidates[i].score > rec.candidates[rec.chosen].score) rec.chosen = i;
  }
  std::vector<Attribution> attributions;
  for (const auto& c : rec.candidates) attributions.push_back(c.attribution);
  rec.explanation = explain(attributions, rec.chosen);
  return rec;
}

Explanation explain(std::span<const Attribution> attributions, std::size_t chosen) {
  if (chosen >= attributions.size()) throw Error(ErrorCode::InvalidInput, "chosen candidate out of range");
  Explanation e;
  e.deltas.assign(kFeatureCount, 0.0);
  const std::size_t others = attributions.size() - 1;
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    if (j == kRoundIdIndex) continue;
    double mean_others = 0.0;
    for (std::size_t c = 0; c < attributions.size(); ++c) {
      if (c == chosen) continue;
      if (attributions[c].phi.size() != kFeatureCount) {
        throw Error(ErrorCode::InvalidInput, "attribution width differs from the feature layout");
      }
      mean_others += std::abs(attributions[c].phi[j]);
    }
    if (others > 0) mean_others /= static_cast<double>(others);
    e.deltas[j] = std::abs(std::abs(attributions[chosen].phi[j]) - mean_others);
  }
  for (std::size_t j = 1; j < kFeatureCount; ++j) {
    if (j != kRoundIdIndex && e.deltas[j] > e.deltas[e.dominant_feature]) e.dominant_feature = j;
  }
  e.category = feature_category(e.dominant_feature);
  e.label = std::string(e.category == FeatureCategory::Semantic ? kInspirationLabel : kRedundancyLabel);
  return e;
}

io::Json to_json(const Recommendation& rec) {
  io::Json candidates = io::Json::array();
  for (const auto& c : rec.candidates) {
    candidates.push_back({
        {"alters", {c.pair.first().value, c.pair.second().value}},
        {"score", c.score},
        {"score_reported", std::max(0.0, c.score)},
        {"features", c.features.values},
        {"shap", c.attribution.phi},
    });
  }
  const auto& chosen = rec.candidates.at(rec.chosen);
  return {
      {"trial", rec.trial},
      {"condition", to_string(rec.condition)},
      {"ego_id", rec.ego.value},
      {"round", rec.round},
      {"network_size", rec.network_size},
      {"chosen", {chosen.pair.first().value, chosen.pair.second().value}},
      {"chosen_score", chosen.score},
      {"base_value", chosen.attribution.base},
      {"dominant_feature", feature_names()[rec.explanation.dominant_feature]},
      {"dominant_category", to_string(rec.explanation.category)},
      {"explanation", rec.explanation.label},
      {"candidates", candidates},
  };
}

DecisionRecord decision_from_json(const io::Json& record) {
  DecisionRecord d;
  d.round = io::field(record, "round").get<int>();
  d.network_size = io::field(record, "network_size").get<int>();
  const auto cat = io::field(record, "dominant_category").get<std::string>();
  if (cat == "semantic") {
    d.category = FeatureCategory::Semantic;
  } else if (cat == "network") {
    d.category = FeatureCategory::Network;
  } else {
    throw Error(ErrorCode::Schema, "unknown dominant_category '" + cat + "'");
  }
  return d;
}

std::vector<DominanceRow> dominance_profile(std::span<const DecisionRecord> decisions) {
  std::map<std::pair<int, int>, DominanceRow> by_round;
  std::map<int, DominanceRow> by_size;
  for (const auto& d : decisions) {
    if (d.network_size < kMinDominanceSize || d.network_size > kMaxDominanceSize) continue;
    const int semantic = d.category == FeatureCategory::Semantic ? 1 : 0;
    auto& r = by_round[{d.round, d.network_size}];
    r.round = d.round;
    r.network_size = d.network_size;
    r.decisions += 1;
    r.semantic += semantic;
    auto& s = by_size[d.network_size];
    s.network_size = d.network_size;
    s.decisions += 1;
    s.semantic += semantic;
  }
  std::vector<DominanceRow> out;
  for (auto& [key, row] : by_round) out.push_back(row);
  for (auto& [key, row] : by_size) out.push_back(row);
  for (auto& row : out) row.fraction = static_cast<double>(row.semantic) / row.decisions;
  return out;
}

void write_dominance_csv(const std::filesystem::path& path, std::span<const DominanceRow> rows) {
  io::CsvWriter out(path);
  out.header({"round", "network_size", "decisions", "semantic_decisions", "semantic_fraction"});
  for (const auto& r : rows) {
    if (r.round) out.cell(*r.round); else out.cell(std::string_view("all"));
    out.cell(r.network_size).cell(r.decisions).cell(r.semantic).cell(r.fraction);
    out.end_row();
  }
}

}  // namespace socialmuse
