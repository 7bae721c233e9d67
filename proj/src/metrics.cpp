// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#include "socialmuse/metrics.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "socialmuse/error.hpp"

namespace socialmuse {

void RoundPool::add(int arrival_rank, const BinSet& bins) {
  auto pos = std::upper_bound(contributions.begin(), contributions.end(), arrival_rank,
                              [](int r, const auto& c) { return r < c.first; });
  contributions.insert(pos, {arrival_rank, bins});
}

BinSet RoundPool::cumulative_before(int arrival_rank) const {
  BinSet pool;
  for (const auto& [rank, bins] : contributions) {
    if (rank >= arrival_rank) break;
    pool.insert(bins.begin(), bins.end());
  }
  return pool;
}

RoundPool build_round_pool(const TrialState& state, int round, PoolOptions options) {
  RoundPool pool;
  pool.round = round;
  if (options.include_alter_ideas) {
    BinSet seeds;
    for (AlterId a : state.alters()) {
      auto b = state.bins(Role::Alter, a.value, round);
      seeds.insert(b.begin(), b.end());
    }
    pool.add(-1, seeds);
  }
  for (EgoId ego : state.egos()) {
    if (state.has_ideas(Role::Ego, ego.value, round)) {
      pool.add(state.arrival_rank(ego), state.bins(Role::Ego, ego.value, round));
    }
  }
  return pool;
}

int marginal_distinct_count(const RoundPool& pool, int ego_rank, const BinSet& attempt2_bins) {
  const BinSet before = pool.cumulative_before(ego_rank);
  int fresh = 0;
  for (BinId b : attempt2_bins) fresh += before.count(b) ? 0 : 1;
  return fresh;
}

int nonredundant_count(const std::map<EgoId, BinSet>& all_egos_bins, EgoId ego) {
  auto it = all_egos_bins.find(ego);
  if (it == all_egos_bins.end()) {
    throw Error(ErrorCode::NotFound, "ego " + std::to_string(ego.value) + " has no bins");
  }
  int unique = 0;
  for (BinId b : it->second) {
    bool shared = false;
    for (const auto& [other, bins] : all_egos_bins) {
      if (other != ego && bins.count(b)) {
        shared = true;
        break;
      }
    }
    unique += shared ? 0 : 1;
  }
  return unique;
}

int collective_distinct_count(std::span<const BinSet> bin_sets) {
  BinSet all;
  for (const auto& s : bin_sets) all.insert(s.begin(), s.end());
  return static_cast<int>(all.size());
}

namespace {

std::string lemma(const std::string& token) {
  std::string t = singularize(token);
  auto strip = [&t](std::string_view suffix, std::size_t min_stem) {
    if (t.size() >= suffix.size() + min_stem &&
        t.compare(t.size() - suffix.size(), suffix.size(), suffix) == 0) {
      t.erase(t.size() - suffix.size());
      return true;
    }
    return false;
  };
  if (!strip("ing", 4)) strip("ed", 4);
  return t;
}

std::vector<std::string> content_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& token : tokenize(text)) {
    if (is_stop_word(token)) continue;
    out.push_back(lemma(token));
  }
  return out;
}

}  // namespace

std::vector<std::string> normal_form(std::string_view text,
                                     const std::vector<std::string>& known_compounds) {
  std::vector<std::string> tokens = content_tokens(text);
  // Merge adjacent tokens whose concatenation is itself a known single word.
  std::vector<std::string> merged;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i + 1 < tokens.size()) {
      const std::string joined = tokens[i] + tokens[i + 1];
      if (std::binary_search(known_compounds.begin(), known_compounds.end(), joined)) {
        merged.push_back(joined);
        ++i;
        continue;
      }
    }
    merged.push_back(tokens[i]);
  }
  std::sort(merged.begin(), merged.end());
  return merged;
}

std::vector<IdeaRecord> bin_text_ideas(std::vector<IdeaRecord> records) {
  // Every single content word of the batch is a merge candidate.
  std::set<std::string> vocabulary;
  for (const auto& r : records) {
    for (auto& token : content_tokens(r.text)) vocabulary.insert(std::move(token));
  }
  const std::vector<std::string> compounds(vocabulary.begin(), vocabulary.end());

  std::unordered_map<std::string, BinId> bins;
  for (auto& r : records) {
    const auto form = normal_form(r.text, compounds);
    if (form.empty()) {
      r.bin_id = kDegenerateBin;
      continue;
    }
    std::string key;
    for (const auto& t : form) {
      if (!key.empty()) key.push_back(' ');
      key += t;
    }
    auto [it, inserted] = bins.try_emplace(key, static_cast<BinId>(bins.size()));
    r.bin_id = it->second;
  }
  return records;
}

NoveltyScorer make_proxy_novelty_scorer(const EmbeddingTable& table, std::string prompt_token) {
  const std::vector<double>* prompt = table.find(prompt_token);
  if (!prompt) {
    throw Error(ErrorCode::MissingVocabulary, "prompt word '" + prompt_token + "' has no embedding");
  }
  return [&table, prompt_token = std::move(prompt_token)](const IdeaRecord& idea) -> std::optional<double> {
    Document doc;
    for (auto& t : tokenize(idea.text)) {
      if (!is_stop_word(t)) doc.push_back(std::move(t));
    }
    try {
      return cosine_distance(table, doc, Document{prompt_token});
    } catch (const Error& e) {
      if (e.code() == ErrorCode::MissingVocabulary) return std::nullopt;
      throw;
    }
  };
}

double best_novelty_score(const NoveltyScorer& scorer, std::span<const IdeaRecord* const> ideas) {
  std::optional<double> best;
  for (const IdeaRecord* idea : ideas) {
    if (auto s = scorer(*idea)) best = best ? std::max(*best, *s) : *s;
  }
  return best.value_or(0.0);
}

}  // namespace socialmuse
