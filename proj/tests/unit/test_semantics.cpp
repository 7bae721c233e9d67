// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "socialmuse/error.hpp"
#include "socialmuse/semantics.hpp"
#include "support.hpp"

using namespace socialmuse;

namespace {

// Max spanning-tree weight over every labelled tree, decoded from Prüfer codes.
double max_tree_by_pruefer(const SimilarityMatrix& sim) {
  const std::size_t n = sim.n;
  if (n < 2) return 0.0;
  if (n == 2) return sim.at(0, 1);
  std::vector<std::size_t> code(n - 2, 0);
  double best = -1e300;
  while (true) {
    std::vector<int> degree(n, 1);
    for (std::size_t c : code) degree[c]++;
    double w = 0.0;
    for (std::size_t c : code) {
      std::size_t leaf = 0;
      while (degree[leaf] != 1) ++leaf;
      w += sim.at(leaf, c);
      degree[leaf]--;
      degree[c]--;
    }
    std::size_t u = n, v = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (degree[i] == 1) (u == n ? u : v) = i;
    }
    w += sim.at(u, v);
    best = std::max(best, w);
    std::size_t k = 0;
    while (k < code.size() && ++code[k] == n) code[k++] = 0;
    if (k == code.size()) break;
  }
  return best;
}

SimilarityMatrix random_similarity(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SimilarityMatrix s{n, std::vector<double>(n * n, 1.0)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) s.values[i * n + j] = s.values[j * n + i] = u(rng);
  return s;
}

// Taxonomy with w = 100: a -> {b, c} plus 96 standalone concepts.
Taxonomy hundred_concepts() {
  std::vector<std::string> extra;
  for (int i = 0; i < 96; ++i) extra.push_back("s" + std::to_string(i));
  return Taxonomy::from_edges({{"b", "a"}, {"c", "a"}}, extra);
}

EmbeddingTable random_table(std::mt19937_64& rng, int tokens, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  EmbeddingTable t("table-A", dim);
  for (int i = 0; i < tokens; ++i) {
    std::vector<double> v(dim);
    for (double& x : v) x = n(rng);
    t.add("t" + std::to_string(i), v);
  }
  return t;
}

Document random_doc(std::mt19937_64& rng, int vocab, int len) {
  Document d;
  for (int i = 0; i < len; ++i) d.push_back("t" + std::to_string(rng() % static_cast<unsigned>(vocab)));
  return d;
}

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_SUITE("semantics") {
  TEST_CASE("information content fixtures") {
    const Taxonomy t = hundred_concepts();
    REQUIRE(t.concept_count() == 100);
    CHECK(information_content(t, "b") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.information_content(t.root()) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(information_content(t, "a") - (1.0 - std::log(3.0) / std::log(100.0))) < 1e-9);
    CHECK(std::abs(information_content(t, "a") - 0.7614) < 1e-4);
    CHECK_THROWS_AS(information_content(t, "nope"), Error);
  }

  TEST_CASE("information content is antitone in hyponym count") {
    const Taxonomy t = Taxonomy::from_edges({{"b", "a"}, {"c", "b"}, {"d", "c"}, {"e", "a"}});
    std::vector<std::size_t> idx(t.concept_count());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i : idx)
      for (std::size_t j : idx)
        if (t.hyponym_count(i) < t.hyponym_count(j)) CHECK(t.information_content(i) > t.information_content(j));
  }

  TEST_CASE("msca fixtures") {
    const Taxonomy t = Taxonomy::from_edges({{"a", "r1"}, {"b", "a"}, {"x", "r2"}});
    CHECK(msca_similarity(t, "b", "b") == doctest::Approx(information_content(t, "b")));
    CHECK(msca_similarity(t, "b", "a") == doctest::Approx(information_content(t, "a")));
    // r1 and r2 only meet at the virtual root.
    CHECK(msca_similarity(t, "b", "x") == doctest::Approx(0.0));
  }

  TEST_CASE("msca equals exhaustive subsumer search") {
    const Taxonomy t = Taxonomy::from_edges(
        {{"b", "a"}, {"c", "a"}, {"d", "b"}, {"d", "c"}, {"e", "c"}, {"f", "e"}, {"g", "r"}, {"f", "g"}});
    for (std::size_t i = 0; i < t.concept_count(); ++i) {
      for (std::size_t j = 0; j < t.concept_count(); ++j) {
        double best = 0.0;
        // A concept subsumes another when it lies on one of its ancestor paths.
        for (std::size_t c = 0; c < t.concept_count(); ++c) {
          const auto& si = t.subsumers(i);
          const auto& sj = t.subsumers(j);
          if (std::find(si.begin(), si.end(), c) != si.end() && std::find(sj.begin(), sj.end(), c) != sj.end()) {
            best = std::max(best, t.information_content(c));
          }
        }
        CHECK(msca_similarity(t, t.id(i), t.id(j)) == doctest::Approx(best).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("pair similarity fixtures") {
    const Taxonomy t = hundred_concepts();
    CHECK(pair_similarity(t, "b", "b") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(similarity_from_contents(1.0, 1.0, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(similarity_from_contents(0.8, 0.6, 0.5) - 0.8) < 1e-9);
    CHECK(pair_similarity(t, "b", "c") == doctest::Approx(pair_similarity(t, "c", "b")));
  }

  TEST_CASE("creativity quotient fixtures") {
    SimilarityMatrix one{1, {1.0}};
    CHECK(creativity_quotient(one).multi_information == 0.0);
    CHECK(creativity_quotient(one).quotient == 1.0);
    SimilarityMatrix zeros{4, std::vector<double>(16, 0.0)};
    CHECK(creativity_quotient(zeros).quotient == doctest::Approx(4.0));
    SimilarityMatrix ones{4, std::vector<double>(16, 1.0)};
    CHECK(creativity_quotient(ones).multi_information == doctest::Approx(3.0));
    CHECK(creativity_quotient(ones).quotient == doctest::Approx(1.0));
    SimilarityMatrix empty{0, {}};
    CHECK(creativity_quotient(empty).quotient == 0.0);
    CHECK(creativity_quotient(empty).concept_count == 0);
  }

  TEST_CASE("maximum spanning tree equals Pruefer enumeration") {
    std::mt19937_64 rng(2);
    for (int it = 0; it < 200; ++it) {
      const std::size_t n = 1 + rng() % 6;
      const auto sim = random_similarity(rng, n);
      const auto score = creativity_quotient(sim);
      CHECK(std::abs(score.multi_information - max_tree_by_pruefer(sim)) < 1e-12);
      CHECK(score.quotient == static_cast<double>(n) - score.multi_information);
    }
  }

  TEST_CASE("duplicate concepts collapse before scoring") {
    const Taxonomy t = hundred_concepts();
    const std::vector<std::string> with_dupes{"b", "b", "c"};
    const std::vector<std::string> distinct{"b", "c"};
    CHECK(creativity_quotient(t, with_dupes).concept_count == 2);
    CHECK(creativity_quotient(t, with_dupes).quotient == doctest::Approx(creativity_quotient(t, distinct).quotient));
    const std::vector<std::string> unknown{"zzz"};
    CHECK_THROWS_AS(creativity_quotient(t, unknown), Error);
  }

  TEST_CASE("document distance identities") {
    EmbeddingTable a("table-A", 2), b("table-B", 2);
    a.add("x", {1.0, 0.0});
    a.add("y", {0.0, 1.0});
    a.add("z", {3.0, 4.0});
    b.add("x", {2.0, 1.0});
    b.add("y", {-1.0, 2.0});
    const Document dx{"x"}, dy{"y"}, dz{"z"}, dxy{"x", "y"};
    for (auto m : kDistanceMethods) CHECK(std::abs(doc_distance(m, a, b, dxy, dxy)) < 1e-9);
    CHECK(cosine_distance(a, dx, dy) == doctest::Approx(1.0));
    CHECK(doc_distance(DistanceMethod::CosineB, a, b, dx, dy) == doctest::Approx(1.0));
    CHECK(word_movers_distance(a, dx, dz) == doctest::Approx(std::sqrt(4.0 + 16.0)));
    const Document unknown{"nope"};
    try {
      doc_distance(DistanceMethod::WmdA, a, b, dx, unknown);
      FAIL("expected MissingVocabulary");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingVocabulary);
    }
    CHECK_FALSE(try_doc_distance(DistanceMethod::CosineA, a, b, unknown, dx).has_value());
  }

  TEST_CASE("wmd equals the best assignment for equal-size documents") {
    std::mt19937_64 rng(9);
    const auto table = random_table(rng, 12, 3);
    for (int it = 0; it < 60; ++it) {
      const int n = 1 + static_cast<int>(rng() % 5);
      const Document da = random_doc(rng, 12, n), db = random_doc(rng, 12, n);
      std::vector<int> perm(static_cast<std::size_t>(n));
      std::iota(perm.begin(), perm.end(), 0);
      double best = 1e300;
      do {
        double c = 0;
        for (int i = 0; i < n; ++i) c += euclid(*table.find(da[i]), *table.find(db[perm[i]]));
        best = std::min(best, c / n);
      } while (std::next_permutation(perm.begin(), perm.end()));
      CHECK(word_movers_distance(table, da, db) == doctest::Approx(best).epsilon(1e-9));
    }
  }

  TEST_CASE("wmd is symmetric and satisfies the triangle inequality") {
    std::mt19937_64 rng(4);
    const auto table = random_table(rng, 20, 4);
    for (int it = 0; it < 100; ++it) {
      const auto a = random_doc(rng, 20, 1 + static_cast<int>(rng() % 6));
      const auto b = random_doc(rng, 20, 1 + static_cast<int>(rng() % 6));
      const auto c = random_doc(rng, 20, 1 + static_cast<int>(rng() % 6));
      const double ab = word_movers_distance(table, a, b);
      CHECK(std::abs(ab - word_movers_distance(table, b, a)) < 1e-9);
      CHECK(ab <= word_movers_distance(table, a, c) + word_movers_distance(table, c, b) + 1e-9);
      CHECK(ab >= 0.0);
    }
  }

  TEST_CASE("text normalization") {
    CHECK(tokenize("Use it as a Door-stop!") == std::vector<std::string>{"use", "it", "as", "a", "door", "stop"});
    CHECK(is_stop_word("the"));
    CHECK_FALSE(is_stop_word("hammer"));
    CHECK(singularize("boxes") == "box");
    CHECK(singularize("berries") == "berry");
    CHECK(singularize("glass") == "glass");
    CHECK(singularize("cups") == "cup");
  }

  TEST_CASE("concept extraction resolves spelling and polysemy") {
    Taxonomy t = Taxonomy::from_edges({{"hammer.tool", "tool"}, {"tool", "object"}, {"bat.animal", "animal"},
                                       {"bat.club", "club"}, {"club", "object"}, {"club.society", "group"}});
    t.add_lexicon_entry("hammer", "hammer.tool");
    t.add_lexicon_entry("bat", "bat.animal");
    t.add_lexicon_entry("bat", "bat.club");
    t.add_lexicon_entry("club", "club");
    t.add_lexicon_entry("club", "club.society");
    CHECK(extract_concepts(t, "The hammers") == std::vector<std::string>{"hammer.tool"});
    CHECK(extract_concepts(t, "a hamer") == std::vector<std::string>{"hammer.tool"});
    // Both bat senses are leaves: equal content, lexicographic id wins.
    CHECK(extract_concepts(t, "bat") == std::vector<std::string>{"bat.animal"});
    // club.society is a leaf, club is not: the more specific sense wins.
    CHECK(extract_concepts(t, "club") == std::vector<std::string>{"club.society"});
    CHECK(extract_concepts(t, "the of and").empty());
  }

  TEST_CASE("resource files round-trip") {
    const auto dir = socialmuse::testing::scratch_dir("semantics_io");
    EmbeddingTable a("table-A", 2);
    a.add("x", {1.5, -2.0});
    a.save(dir / "emb.txt");
    const auto back = EmbeddingTable::load(dir / "emb.txt", "table-A");
    REQUIRE(back.find("x") != nullptr);
    CHECK((*back.find("x"))[1] == -2.0);
    {
      std::ofstream bad(dir / "bad.txt");
      bad << "x 1 2\ny 1\n";
    }
    try {
      EmbeddingTable::load(dir / "bad.txt", "table-A");
      FAIL("expected a schema error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Schema);
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    CHECK_THROWS_AS(EmbeddingTable::load(dir / "missing.txt", "table-A"), Error);
    CHECK_THROWS_AS(Taxonomy::from_edges({{"a", "b"}, {"b", "a"}}), Error);
  }
}
