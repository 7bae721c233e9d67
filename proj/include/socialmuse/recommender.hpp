// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "socialmuse/features.hpp"
#include "socialmuse/model.hpp"

namespace socialmuse {

inline constexpr std::string_view kInspirationLabel = "Recommended for better inspiration";
inline constexpr std::string_view kRedundancyLabel = "Recommended for reducing idea redundancy";

struct CandidateScore {
  AlterPair pair;
  FeatureVector features;
  double score = 0.0;  // raw model output, used for ranking
  Attribution attribution;
};

struct Explanation {
  std::string label;
  std::size_t dominant_feature = 0;
  FeatureCategory category = FeatureCategory::Semantic;
  std::vector<double> deltas;  // one per feature; round_id is always 0
};

struct Recommendation {
  int trial = 0;
  Condition condition = Condition::Treatment;
  EgoId ego{};
  int round = 2;
  int network_size = 1;
  std::vector<CandidateScore> candidates;  // lexicographic pair order
  std::size_t chosen = 0;
  Explanation explanation;

  const AlterPair& chosen_pair() const { return candidates.at(chosen).pair; }
};

/// Scores every alter pair for `ego` entering `round`; the highest raw score
/// wins and ties go to the lexicographically smallest pair. Throws NotReady
/// when `model` is null.
Recommendation recommend(const TrialState& state, EgoId ego, int round, const TreeEnsemble* model,
                         FeatureAssembler& assembler);

/// Dominant feature: the largest gap between the chosen candidate's |φ_j|
/// and the mean |φ_j| of the others. round_id never competes; ties go to the
/// earliest feature in canonical order.
Explanation explain(std::span<const Attribution> attributions, std::size_t chosen);

/// Audit record with all candidate scores and attributions.
io::Json to_json(const Recommendation& rec);

struct DecisionRecord {
  int round = 0;
  int network_size = 0;
  FeatureCategory category = FeatureCategory::Semantic;
};

DecisionRecord decision_from_json(const io::Json& record);

struct DominanceRow {
  std::optional<int> round;  // unset for the all-rounds aggregate
  int network_size = 0;
  int decisions = 0;
  int semantic = 0;
  double fraction = 0.0;
};

/// Semantic-dominated fraction per (round, network size) and per size over
/// all rounds. Sizes outside 2..18 are left out.
std::vector<DominanceRow> dominance_profile(std::span<const DecisionRecord> decisions);

void write_dominance_csv(const std::filesystem::path& path, std::span<const DominanceRow> rows);

}  // namespace socialmuse
