// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>

#include "socialmuse/error.hpp"
#include "socialmuse/io.hpp"
#include "socialmuse/trial.hpp"
#include "support.hpp"

using namespace socialmuse;
namespace fs = std::filesystem;

namespace {

TrialState small_trial(Condition c) {
  TrialState s(3, c, 6);
  for (int e = 0; e < 3; ++e) {
    s.set_arrival_rank(EgoId{e}, 2 - e);
    s.set_gender(Role::Ego, e, e % 2 ? Gender::B : Gender::A);
    s.set_follow(1, EgoId{e}, AlterPair(AlterId{e}, AlterId{e + 1}));
    IdeaRecord r;
    r.idea_id = "i" + std::to_string(e);
    r.author_id = e;
    r.trial = 3;
    r.condition = c;
    r.bin_id = e;
    r.text = "idea " + std::to_string(e);
    s.add_idea(r);
  }
  for (int a = 0; a < 6; ++a) s.set_gender(Role::Alter, a, Gender::A);
  return s;
}

void write_state(const fs::path& dir, const std::vector<TrialState>& states) {
  std::ofstream ideas(dir / "ideas.jsonl"), edges(dir / "edges.jsonl"), people(dir / "participants.jsonl");
  for (const auto& s : states) {
    for (const auto& i : s.ideas()) append_jsonl(ideas, to_json(i));
    for (const auto& e : edge_records(s)) append_jsonl(edges, to_json(e));
    for (const auto& p : participant_records(s, true)) append_jsonl(people, to_json(p));
  }
}

TrialFiles files_in(const fs::path& dir) {
  return {dir / "ideas.jsonl", dir / "edges.jsonl", dir / "participants.jsonl"};
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("hashing and number formatting") {
    CHECK(io::fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(io::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(io::hex64(255) == "00000000000000ff");
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5, 123456789.125}) {
      CHECK(std::stod(io::format_double(v)) == v);
    }
  }

  TEST_CASE("csv round trip") {
    const auto dir = socialmuse::testing::scratch_dir("csv");
    {
      io::CsvWriter w(dir / "t.csv");
      w.header({"a", "b"});
      w.cell(1).cell(0.5);
      w.end_row();
      w.cell(std::string_view("x")).cell(2.0);
      w.end_row();
    }
    const auto t = io::read_csv(dir / "t.csv");
    CHECK(t.columns == std::vector<std::string>{"a", "b"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1][0] == "x");
    CHECK(t.column("b") == 1);
    CHECK_THROWS_AS(t.column("zzz"), Error);
  }

  TEST_CASE("jsonl errors name the line") {
    const auto dir = socialmuse::testing::scratch_dir("jsonl");
    {
      std::ofstream f(dir / "x.jsonl");
      f << "{\"a\":1}\n\n{\"a\":\n";
    }
    try {
      io::for_each_jsonl(dir / "x.jsonl", [](const io::Json&, std::size_t) {});
      FAIL("expected a schema error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Schema);
      CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
  }
}

TEST_SUITE("trial") {
  TEST_CASE("arrival order and hypothetical rounds") {
    const auto s = small_trial(Condition::Control);
    CHECK(s.egos() == std::vector<EgoId>{EgoId{2}, EgoId{1}, EgoId{0}});
    const auto h = s.hypothetical_round(1, EgoId{1}, AlterPair(AlterId{4}, AlterId{5}));
    CHECK(h.arrival_order == std::vector<EgoId>{EgoId{2}, EgoId{1}});
    CHECK(h.follows.at(EgoId{1}) == AlterPair(AlterId{4}, AlterId{5}));
    CHECK(h.follows.at(EgoId{2}) == AlterPair(AlterId{2}, AlterId{3}));
    CHECK_THROWS_AS(s.arrival_rank(EgoId{9}), Error);
    CHECK_THROWS_AS(s.round_network(4), Error);
  }

  TEST_CASE("alter pairs are canonical") {
    CHECK(AlterPair(AlterId{3}, AlterId{1}) == AlterPair(AlterId{1}, AlterId{3}));
    CHECK_THROWS(AlterPair(AlterId{2}, AlterId{2}));
    const auto all = all_alter_pairs(6);
    CHECK(all.size() == 15);
    CHECK(all.front() == AlterPair(AlterId{0}, AlterId{1}));
    CHECK(std::is_sorted(all.begin(), all.end()));
  }

  TEST_CASE("trial files round trip") {
    const auto dir = socialmuse::testing::scratch_dir("trial_rt");
    const std::vector<TrialState> states{small_trial(Condition::Control), small_trial(Condition::Treatment)};
    write_state(dir, states);
    const auto back = load_trials(files_in(dir));
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(back[i].condition() == states[i].condition());
      CHECK(back[i].egos() == states[i].egos());
      CHECK(back[i].ideas().size() == states[i].ideas().size());
      CHECK(back[i].gender(Role::Ego, 1) == Gender::B);
      CHECK(back[i].round_network(1).follows == states[i].round_network(1).follows);
    }
  }

  TEST_CASE("corrupt files report file and line") {
    const auto dir = socialmuse::testing::scratch_dir("trial_bad");
    write_state(dir, {small_trial(Condition::Control)});
    {
      std::ofstream f(dir / "ideas.jsonl", std::ios::app);
      f << "{\"idea_id\":\"z\",\"author_id\":0}\n";
    }
    try {
      load_trials(files_in(dir));
      FAIL("expected a schema error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Schema);
      const std::string msg = e.what();
      CHECK(msg.find("ideas.jsonl") != std::string::npos);
      CHECK(msg.find(":4") != std::string::npos);
    }
  }

  TEST_CASE("an ego may not follow one alter twice") {
    TrialState s(1, Condition::Control, 6);
    s.set_arrival_rank(EgoId{0}, 0);
    s.set_follow(1, EgoId{0}, AlterPair(AlterId{0}, AlterId{1}));
    CHECK(s.round_network(1).follows.size() == 1);
    CHECK_THROWS(s.set_follow(1, EgoId{0}, AlterPair(AlterId{0}, AlterId{7})));
  }
}
