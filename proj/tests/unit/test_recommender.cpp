// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <set>

#include "socialmuse/error.hpp"
#include "socialmuse/recommender.hpp"
#include "socialmuse/sim.hpp"
#include "support.hpp"

using namespace socialmuse;

namespace {

struct Fixture {
  SimConfig config;
  World world;
  TrialLog log;

  Fixture() : world(World::build(config.world, config.seed, 3)), log(run(config, world)) {}

  static TrialLog run(SimConfig& config, const World& world) {
    config.rounds = 2;
    return run_trial(config, world, 0, Condition::Control, nullptr);
  }
};

TreeEnsemble constant_model(double value) {
  TreeEnsemble m;
  m.forest.n_features = kFeatureCount;
  m.forest.base_score = value;
  m.scaler.mean.assign(kFeatureCount, 0.0);
  m.scaler.scale.assign(kFeatureCount, 1.0);
  m.impute_means.assign(kFeatureCount, 0.0);
  return m;
}

Attribution attribution(std::initializer_list<std::pair<std::size_t, double>> entries) {
  Attribution a;
  a.phi.assign(kFeatureCount, 0.1);
  for (auto [j, v] : entries) a.phi[j] = v;
  return a;
}

}  // namespace

TEST_SUITE("recommender") {
  TEST_CASE("scores all fifteen pairs and picks the argmax") {
    Fixture fx;
    const auto model = socialmuse::testing::small_ensemble(2);
    FeatureAssembler assembler(fx.world.resources, fx.log.state);
    for (EgoId ego : fx.log.state.egos()) {
      const auto rec = recommend(fx.log.state, ego, 2, &model, assembler);
      REQUIRE(rec.candidates.size() == 15);
      std::set<AlterPair> distinct;
      for (const auto& c : rec.candidates) distinct.insert(c.pair);
      CHECK(distinct.size() == 15);
      CHECK(std::is_sorted(rec.candidates.begin(), rec.candidates.end(),
                           [](const CandidateScore& a, const CandidateScore& b) { return a.pair < b.pair; }));
      // Independent rescoring with a fresh feature pass.
      std::size_t best = 0;
      double best_score = -1e300;
      for (std::size_t i = 0; i < rec.candidates.size(); ++i) {
        const double s = model.predict(assemble(fx.world.resources, fx.log.state, ego, 2, rec.candidates[i].pair));
        CHECK(s == rec.candidates[i].score);
        if (s > best_score) {
          best_score = s;
          best = i;
        }
      }
      CHECK(rec.chosen == best);
      CHECK(rec.network_size == fx.log.state.arrival_rank(ego) + 1);
      for (const auto& c : rec.candidates) CHECK(c.attribution.total() == doctest::Approx(c.score));
    }
  }

  TEST_CASE("a constant model picks the first pair") {
    Fixture fx;
    const auto model = constant_model(-0.5);
    FeatureAssembler assembler(fx.world.resources, fx.log.state);
    const auto rec = recommend(fx.log.state, fx.log.state.egos().front(), 2, &model, assembler);
    CHECK(rec.chosen_pair() == AlterPair(AlterId{0}, AlterId{1}));
    const auto j = to_json(rec);
    CHECK(j["chosen_score"].get<double>() == -0.5);
    CHECK(j["candidates"][0]["score_reported"].get<double>() == 0.0);
    CHECK(j["candidates"].size() == 15);
    CHECK_THROWS_AS(recommend(fx.log.state, fx.log.state.egos().front(), 2, nullptr, assembler), Error);
    try {
      recommend(fx.log.state, fx.log.state.egos().front(), 2, nullptr, assembler);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotReady);
    }
  }

  TEST_CASE("explanations") {
    SUBCASE("a single differing coordinate wins") {
      std::vector<Attribution> a(15, attribution({}));
      a[4] = attribution({{27, -3.0}});
      const auto e = explain(a, 4);
      CHECK(e.dominant_feature == 27);
      CHECK(e.category == FeatureCategory::Network);
      CHECK(e.label == kRedundancyLabel);
      CHECK(e.deltas[27] == doctest::Approx(2.9));
    }
    SUBCASE("gini dominance") {
      std::vector<Attribution> a(15, attribution({{24, 0.2}}));
      a[0] = attribution({{24, 2.0}, {3, 0.5}});
      CHECK(explain(a, 0).dominant_feature == 24);
    }
    SUBCASE("a semantic coordinate gives the inspiration label") {
      std::vector<Attribution> a(15, attribution({}));
      a[9] = attribution({{5, 1.0}, {30, 0.6}});
      const auto e = explain(a, 9);
      CHECK(e.dominant_feature == 5);
      CHECK(e.label == kInspirationLabel);
    }
    SUBCASE("identical attributions tie to the first feature") {
      const std::vector<Attribution> a(15, attribution({}));
      const auto e = explain(a, 3);
      CHECK(e.dominant_feature == 0);
      for (double d : e.deltas) CHECK(d == 0.0);
    }
    SUBCASE("round id never competes") {
      std::vector<Attribution> a(15, attribution({}));
      a[2] = attribution({{kRoundIdIndex, 50.0}, {30, 0.2}});
      const auto e = explain(a, 2);
      CHECK(e.dominant_feature == 30);
      CHECK(e.deltas[kRoundIdIndex] == 0.0);
    }
    CHECK_THROWS_AS(explain(std::vector<Attribution>(3, attribution({})), 3), Error);
  }

  TEST_CASE("dominance profile") {
    std::vector<DecisionRecord> d;
    for (int i = 0; i < 10; ++i) d.push_back({2, 5, i < 4 ? FeatureCategory::Semantic : FeatureCategory::Network});
    d.push_back({3, 5, FeatureCategory::Semantic});
    d.push_back({2, 1, FeatureCategory::Semantic});
    d.push_back({2, 19, FeatureCategory::Semantic});
    const auto rows = dominance_profile(d);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].round == 2);
    CHECK(rows[0].decisions == 10);
    CHECK(rows[0].fraction == doctest::Approx(0.4));
    CHECK(rows[1].round == 3);
    CHECK(rows[1].fraction == 1.0);
    CHECK_FALSE(rows[2].round.has_value());
    CHECK(rows[2].decisions == 11);
    CHECK(rows[2].fraction == doctest::Approx(5.0 / 11.0));

    const auto dir = socialmuse::testing::scratch_dir("dominance");
    write_dominance_csv(dir / "d.csv", rows);
    const auto t = io::read_csv(dir / "d.csv");
    CHECK(t.rows.size() == 3);
    CHECK(t.rows[2][0] == "all");
  }

  TEST_CASE("decision records round trip through the audit log") {
    Fixture fx;
    const auto model = socialmuse::testing::small_ensemble(2);
    FeatureAssembler assembler(fx.world.resources, fx.log.state);
    const auto rec = recommend(fx.log.state, fx.log.state.egos()[3], 2, &model, assembler);
    const auto d = decision_from_json(to_json(rec));
    CHECK(d.round == 2);
    CHECK(d.network_size == 4);
    CHECK(d.category == rec.explanation.category);
    auto j = to_json(rec);
    j["dominant_category"] = "nuisance";
    CHECK_THROWS_AS(decision_from_json(j), Error);
  }
}
