// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "socialmuse/trial.hpp"

namespace socialmuse {

/// Growing idea pool of one round: contributions ordered by arrival rank.
struct RoundPool {
  int round = 1;
  std::vector<std::pair<int, BinSet>> contributions;  // (arrival_rank, bins)

  void add(int arrival_rank, const BinSet& bins);
  /// Union of every contribution with rank strictly below `arrival_rank`.
  BinSet cumulative_before(int arrival_rank) const;
};

struct PoolOptions {
  /// Alters' seed ideas are kept out of the pool unless this is set; they
  /// then sit ahead of every ego.
  bool include_alter_ideas = false;
};

/// Pool of egos' bins (both attempts) for one round of a trial.
RoundPool build_round_pool(const TrialState& state, int round, PoolOptions options = {});

/// |attempt2_bins \ pool before ego_rank|.
int marginal_distinct_count(const RoundPool& pool, int ego_rank, const BinSet& attempt2_bins);

/// Bins of `ego` held by no other ego.
int nonredundant_count(const std::map<EgoId, BinSet>& all_egos_bins, EgoId ego);

int collective_distinct_count(std::span<const BinSet> bin_sets);

/// Normal form used for binning: lowercase, suffix-stripped, stop-words
/// removed, corpus compounds merged, tokens sorted.
std::vector<std::string> normal_form(std::string_view text,
                                     const std::vector<std::string>& known_compounds = {});

/// Assigns bin ids by normal form, first-seen order. Ideas whose normal form
/// is empty get kDegenerateBin.
std::vector<IdeaRecord> bin_text_ideas(std::vector<IdeaRecord> records);

using NoveltyScorer = std::function<std::optional<double>(const IdeaRecord&)>;

/// Stand-in for an external novelty rater: cosine distance between the
/// idea's token centroid and the prompt word. Labeled as a proxy in reports.
NoveltyScorer make_proxy_novelty_scorer(const EmbeddingTable& table, std::string prompt_token);

/// Max score over the ideas; 0 when none can be scored.
double best_novelty_score(const NoveltyScorer& scorer, std::span<const IdeaRecord* const> ideas);

}  // namespace socialmuse
