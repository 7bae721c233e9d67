// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

// Small helpers shared by the unit and acceptance tests.

#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "socialmuse/graph.hpp"
#include "socialmuse/model.hpp"

namespace socialmuse::testing {

/// Fresh scratch directory under SOCIALMUSE_TEST_TMP (or the system temp dir).
inline std::filesystem::path scratch_dir(const std::string& name) {
  const char* base = std::getenv("SOCIALMUSE_TEST_TMP");
  std::filesystem::path root = base != nullptr ? base : std::filesystem::temp_directory_path() / "socialmuse_tests";
  auto dir = root / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Round where ego i (arrival order i) follows pairs[i].
inline BipartiteRound make_round(const std::vector<std::pair<int, int>>& pairs, int n_alters = 6) {
  BipartiteRound r;
  r.n_alters = n_alters;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const EgoId e{static_cast<std::int32_t>(i)};
    r.arrival_order.push_back(e);
    r.follows[e] = AlterPair(AlterId{pairs[i].first}, AlterId{pairs[i].second});
  }
  return r;
}

inline BipartiteRound random_round(std::mt19937_64& rng, int n_egos, int n_alters = 6) {
  std::vector<std::pair<int, int>> pairs;
  std::uniform_int_distribution<int> pick(0, n_alters - 1);
  for (int i = 0; i < n_egos; ++i) {
    int a = pick(rng), b = pick(rng);
    while (b == a) b = pick(rng);
    pairs.emplace_back(std::min(a, b), std::max(a, b));
  }
  return make_round(pairs, n_alters);
}

/// Small deployable model over the canonical layout whose score rises with
/// features 0 and 5.
inline TreeEnsemble small_ensemble(std::uint64_t seed = 1, int n_estimators = 20) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix x(300, kFeatureCount);
  std::vector<double> y(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j) x(i, j) = z(rng);
    y[i] = x(i, 0) + 2.0 * x(i, 5) + 0.1 * z(rng);
  }
  TreeEnsemble m;
  m.scaler = ScalerParams::fit(x.data, x.cols);
  m.impute_means = m.scaler.mean;
  for (std::size_t i = 0; i < x.rows; ++i) m.scaler.transform(std::span<double>(x.row(i), x.cols));
  m.params = Hyperparams{n_estimators, 0.3, 3, 1.0, 1.0, 8};
  FitOptions opt;
  opt.params = m.params;
  opt.seed = seed;
  m.forest = fit_gbt(x, y, opt);
  for (std::size_t j = 0; j < kFeatureCount; ++j) m.selected_features.push_back(j);
  return m;
}

}  // namespace socialmuse::testing
