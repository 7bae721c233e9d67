// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "socialmuse/metrics.hpp"
#include "socialmuse/trial.hpp"

using namespace socialmuse;

namespace {

IdeaRecord ego_idea(int ego, int round, int attempt, BinId bin) {
  IdeaRecord r;
  r.idea_id = "e" + std::to_string(ego) + "r" + std::to_string(round) + "a" + std::to_string(attempt) + "b" +
              std::to_string(bin);
  r.role = Role::Ego;
  r.author_id = ego;
  r.round = round;
  r.attempt = attempt;
  r.bin_id = bin;
  return r;
}

// Random trial: `n` egos in a shuffled arrival order, bins drawn from 0..vocab-1.
TrialState random_trial(std::mt19937_64& rng, int n, int vocab) {
  TrialState s(1, Condition::Control, 6);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (int rank = 0; rank < n; ++rank) s.set_arrival_rank(EgoId{order[static_cast<std::size_t>(rank)]}, rank);
  for (int e = 0; e < n; ++e) {
    for (int attempt : {1, 2}) {
      const int k = static_cast<int>(rng() % 5);
      for (int i = 0; i < k; ++i) s.add_idea(ego_idea(e, 1, attempt, static_cast<BinId>(rng() % vocab)));
    }
  }
  return s;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("marginal distinct count fixtures") {
    RoundPool pool;
    pool.add(0, {1, 2, 3});
    CHECK(marginal_distinct_count(pool, 1, {3, 4, 5}) == 2);
    CHECK(marginal_distinct_count(pool, 0, {1, 2, 3, 4}) == 4);
    CHECK(marginal_distinct_count(pool, 1, {1, 2}) == 0);
  }

  TEST_CASE("non-redundant and collective fixtures") {
    std::map<EgoId, BinSet> all{{EgoId{0}, {7, 9}}, {EgoId{1}, {9}}};
    CHECK(nonredundant_count(all, EgoId{0}) == 1);
    CHECK(nonredundant_count(all, EgoId{1}) == 0);
    std::map<EgoId, BinSet> disjoint;
    for (int e = 0; e < 18; ++e) disjoint[EgoId{e}] = {e * 3, e * 3 + 1, e * 3 + 2};
    for (int e = 0; e < 18; ++e) CHECK(nonredundant_count(disjoint, EgoId{e}) == 3);

    const std::vector<BinSet> sets{{1, 2}, {3, 4, 5}};
    CHECK(collective_distinct_count(sets) == 5);
    const std::vector<BinSet> same{{1, 2, 3}, {1, 2, 3}};
    CHECK(collective_distinct_count(same) == 3);
    CHECK(collective_distinct_count(std::vector<BinSet>{}) == 0);
  }

  TEST_CASE("marginal counts telescope to the collective count") {
    std::mt19937_64 rng(8);
    for (int it = 0; it < 50; ++it) {
      const auto s = random_trial(rng, 18, 40);
      const auto pool = build_round_pool(s, 1);
      int total = 0;
      std::vector<BinSet> sets;
      for (EgoId e : s.egos()) {
        const BinSet all = s.bins(Role::Ego, e.value, 1);
        total += marginal_distinct_count(pool, s.arrival_rank(e), all);
        sets.push_back(all);
      }
      CHECK(total == collective_distinct_count(sets));
    }
  }

  TEST_CASE("non-redundancy ignores arrival order, marginal counts do not") {
    std::mt19937_64 rng(1);
    const auto s = random_trial(rng, 6, 8);
    std::map<EgoId, BinSet> all;
    for (EgoId e : s.egos()) all[e] = s.bins(Role::Ego, e.value, 1);
    std::map<EgoId, int> nonred;
    for (const auto& [e, b] : all) nonred[e] = nonredundant_count(all, e);

    // Same ideas, reversed arrival order.
    TrialState r(1, Condition::Control, 6);
    const auto egos = s.egos();
    for (std::size_t i = 0; i < egos.size(); ++i) r.set_arrival_rank(egos[i], static_cast<int>(egos.size() - 1 - i));
    for (const auto& idea : s.ideas()) r.add_idea(idea);
    std::map<EgoId, BinSet> all_r;
    for (EgoId e : r.egos()) all_r[e] = r.bins(Role::Ego, e.value, 1);
    bool marginal_changed = false;
    const auto p1 = build_round_pool(s, 1), p2 = build_round_pool(r, 1);
    for (EgoId e : egos) {
      CHECK(nonredundant_count(all_r, e) == nonred[e]);
      const auto a2 = s.bins(Role::Ego, e.value, 1, 2);
      if (marginal_distinct_count(p1, s.arrival_rank(e), a2) != marginal_distinct_count(p2, r.arrival_rank(e), a2)) {
        marginal_changed = true;
      }
    }
    CHECK(marginal_changed);
  }

  TEST_CASE("round pool holds both attempts of earlier egos and no alters") {
    TrialState s(1, Condition::Control, 6);
    s.set_arrival_rank(EgoId{0}, 0);
    s.set_arrival_rank(EgoId{1}, 1);
    s.add_idea(ego_idea(0, 1, 1, 10));
    s.add_idea(ego_idea(0, 1, 2, 11));
    IdeaRecord alter;
    alter.role = Role::Alter;
    alter.author_id = 3;
    alter.round = 1;
    alter.bin_id = 12;
    s.add_idea(alter);
    const auto pool = build_round_pool(s, 1);
    CHECK(pool.cumulative_before(1) == BinSet{10, 11});
    CHECK(pool.cumulative_before(0).empty());
    const auto with_alters = build_round_pool(s, 1, PoolOptions{true});
    CHECK(with_alters.cumulative_before(0) == BinSet{12});
  }

  TEST_CASE("text binning matches a hand-labelled fixture") {
    // Each text is paired with its expected group label.
    const std::vector<std::pair<std::string, char>> fixture{
        {"paper weight", 'a'},      {"paperweight", 'a'},          {"use as a doorstop", 'b'},
        {"door stop", 'b'},         {"flower pot", 'c'},           {"a flowerpot", 'c'},
        {"hammer", 'd'},            {"Using it as a hammer", 'd'}, {"hammers", 'd'},
        {"plant holder", 'e'},      {"painted rocks", 'f'},        {"rock painting", 'f'},
        {"Painting the rock", 'f'}, {"bookend", 'g'},              {"book end", 'g'},
        {"book ends", 'g'},         {"candle holder", 'h'},        {"holder for candles", 'h'},
        {"stepping stone", 'i'},    {"garden decoration", 'j'}};
    std::vector<IdeaRecord> records;
    for (const auto& [text, label] : fixture) {
      IdeaRecord r;
      r.text = text;
      records.push_back(r);
    }
    const auto binned = bin_text_ideas(records);
    for (std::size_t i = 0; i < fixture.size(); ++i) {
      for (std::size_t j = 0; j < fixture.size(); ++j) {
        INFO(fixture[i].first, " vs ", fixture[j].first);
        CHECK((*binned[i].bin_id == *binned[j].bin_id) == (fixture[i].second == fixture[j].second));
      }
    }
    // Bin ids are dense and first-seen.
    CHECK(*binned[0].bin_id == 0);
    CHECK(*binned[2].bin_id == 1);
  }

  TEST_CASE("degenerate text and idempotence") {
    std::vector<IdeaRecord> records(3);
    records[0].text = "the of a";
    records[1].text = "hammer";
    records[2].text = "flower pot";
    const auto once = bin_text_ideas(records);
    CHECK(*once[0].bin_id == kDegenerateBin);
    std::vector<IdeaRecord> again = once;
    for (auto& r : again) {
      std::string joined;
      for (const auto& t : normal_form(r.text)) joined += t + " ";
      r.text = joined;
    }
    const auto twice = bin_text_ideas(again);
    for (std::size_t i = 0; i < once.size(); ++i) CHECK(*once[i].bin_id == *twice[i].bin_id);
  }

  TEST_CASE("best novelty score") {
    EmbeddingTable t("table-A", 2);
    t.add("brick", {1.0, 0.0});
    t.add("house", {0.0, 1.0});
    t.add("wall", {1.0, 1.0});
    const auto scorer = make_proxy_novelty_scorer(t, "brick");
    IdeaRecord same, far, mid;
    same.text = "brick";
    far.text = "house";
    mid.text = "wall";
    const IdeaRecord* one[] = {&same};
    CHECK(best_novelty_score(scorer, one) == doctest::Approx(0.0));
    const IdeaRecord* single[] = {&mid};
    CHECK(best_novelty_score(scorer, single) == doctest::Approx(*scorer(mid)));
    const IdeaRecord* three[] = {&same, &far, &mid};
    CHECK(best_novelty_score(scorer, three) == doctest::Approx(1.0));
    CHECK_THROWS(make_proxy_novelty_scorer(t, "missing"));
  }
}
