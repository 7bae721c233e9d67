// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "socialmuse/error.hpp"
#include "socialmuse/metrics.hpp"
#include "socialmuse/model.hpp"

namespace socialmuse {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<int> shuffled_groups(std::span<const int> groups, std::uint64_t seed) {
  std::vector<int> unique(groups.begin(), groups.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::mt19937_64 rng(seed);
  std::shuffle(unique.begin(), unique.end(), rng);
  return unique;
}

constexpr double kTieTolerance = 1e-12;

}  // namespace

// ---------------------------------------------------------------- ridge

RidgeModel RidgeModel::fit(const Matrix& x, std::span<const double> y, double alpha) {
  if (x.rows == 0 || y.size() != x.rows) {
    throw Error(ErrorCode::InvalidInput, "ridge needs a non-empty matrix with matching targets");
  }
  RidgeModel m;
  m.scaler = ScalerParams::fit(x.data, x.cols);
  const auto n = static_cast<Eigen::Index>(x.rows);
  const auto p = static_cast<Eigen::Index>(x.cols);
  Eigen::MatrixXd z(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> row(x.row(static_cast<std::size_t>(i)),
                            x.row(static_cast<std::size_t>(i)) + x.cols);
    m.scaler.transform(row);
    for (Eigen::Index j = 0; j < p; ++j) z(i, j) = row[static_cast<std::size_t>(j)];
  }
  const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  Eigen::VectorXd yc(n);
  for (Eigen::Index i = 0; i < n; ++i) yc(i) = y[static_cast<std::size_t>(i)] - y_mean;
  Eigen::MatrixXd gram = z.transpose() * z;
  gram.diagonal().array() += alpha;
  const Eigen::VectorXd beta = gram.ldlt().solve(z.transpose() * yc);
  m.coef.assign(beta.data(), beta.data() + beta.size());
  m.intercept = y_mean;
  return m;
}

double RidgeModel::predict(const double* x) const {
  double out = intercept;
  for (std::size_t j = 0; j < coef.size(); ++j) {
    if (scaler.scale[j] > 0) out += coef[j] * (x[j] - scaler.mean[j]) / scaler.scale[j];
  }
  return out;
}

std::vector<double> RidgeModel::predict(const Matrix& x) const {
  std::vector<double> out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) out[i] = predict(x.row(i));
  return out;
}

// ---------------------------------------------------------------- scores

double r2_score(std::span<const double> truth, std::span<const double> pred) {
  if (truth.size() != pred.size() || truth.empty()) {
    throw Error(ErrorCode::InvalidInput, "r2 needs equal-length non-empty inputs");
  }
  const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(truth.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    sse += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    sst += (truth[i] - mean) * (truth[i] - mean);
  }
  if (sst <= 0.0) return 0.0;
  return 1.0 - sse / sst;
}

double mean_absolute_error(std::span<const double> truth, std::span<const double> pred) {
  if (truth.size() != pred.size() || truth.empty()) {
    throw Error(ErrorCode::InvalidInput, "mae needs equal-length non-empty inputs");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) sum += std::abs(truth[i] - pred[i]);
  return sum / static_cast<double>(truth.size());
}

// ---------------------------------------------------------------- splits

Split grouped_split(std::span<const int> groups, double test_ratio, std::uint64_t seed) {
  if (!(test_ratio >= 0.0 && test_ratio <= 1.0)) {
    throw Error(ErrorCode::InvalidInput, "test ratio must lie in [0,1]");
  }
  const auto order = shuffled_groups(groups, seed);
  const auto n_test = static_cast<std::size_t>(std::llround(test_ratio * static_cast<double>(order.size())));
  std::vector<int> test_groups(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::sort(test_groups.begin(), test_groups.end());
  Split s;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    (std::binary_search(test_groups.begin(), test_groups.end(), groups[i]) ? s.test : s.train).push_back(i);
  }
  return s;
}

std::vector<Split> grouped_kfold(std::span<const int> groups, int folds, std::uint64_t seed) {
  const auto order = shuffled_groups(groups, seed);
  if (folds < 2 || order.size() < static_cast<std::size_t>(folds)) {
    throw Error(ErrorCode::InvalidInput, "need at least as many groups as folds (and 2 folds)");
  }
  std::map<int, int> fold_of;
  for (std::size_t k = 0; k < order.size(); ++k) fold_of[order[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
  std::vector<Split> out(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const int f = fold_of.at(groups[i]);
    for (int k = 0; k < folds; ++k) (k == f ? out[k].test : out[k].train).push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------- search

std::vector<Hyperparams> reference_grid() {
  std::vector<Hyperparams> grid;
  for (int n : {100, 200, 300})
    for (double lr : {0.001, 0.01, 0.05, 0.1, 0.2})
      for (int depth : {3, 5, 7, 10})
        for (double sub : {0.5, 0.75, 1.0})
          for (double col : {0.5, 0.75, 1.0})
            for (int leaves : {25, 30, 35}) grid.push_back({n, lr, depth, sub, col, leaves});
  return grid;
}

CvRecord cross_validate(const Matrix& x, std::span<const double> y, std::span<const int> groups,
                        const Hyperparams& params, const CvOptions& options) {
  const auto folds = grouped_kfold(groups, options.folds, options.seed);
  CvRecord rec;
  rec.params = params;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const Matrix xtr = x.select_rows(folds[f].train);
    const auto ytr = select(y, folds[f].train);
    FitOptions fo{params, options.reg, mix_seed(options.seed, f), options.allowed_features, {}};
    const GbtModel m = fit_gbt(xtr, ytr, fo);
    const auto pred = m.predict(x.select_rows(folds[f].test));
    rec.fold_r2.push_back(r2_score(select(y, folds[f].test), pred));
  }
  rec.mean_r2 = std::accumulate(rec.fold_r2.begin(), rec.fold_r2.end(), 0.0) /
                static_cast<double>(rec.fold_r2.size());
  return rec;
}

GridResult grid_search_cv(const Matrix& x, std::span<const double> y, std::span<const int> groups,
                          std::span<const Hyperparams> grid, const CvOptions& options) {
  if (grid.empty()) throw Error(ErrorCode::InvalidInput, "hyperparameter grid is empty");
  GridResult result;
  std::size_t best = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    result.table.push_back(cross_validate(x, y, groups, grid[g], options));
    if (g == 0) continue;
    const auto& cand = result.table[g];
    const auto& cur = result.table[best];
    if (cand.mean_r2 > cur.mean_r2 + kTieTolerance) {
      best = g;
    } else if (std::abs(cand.mean_r2 - cur.mean_r2) <= kTieTolerance) {
      const auto key = [](const Hyperparams& p) { return std::make_pair(p.n_estimators, p.max_depth); };
      if (key(cand.params) < key(cur.params)) best = g;
    }
  }
  result.best = grid[best];
  return result;
}

RfeResult rfe_by_shap(const Matrix& x, std::span<const double> y, std::span<const int> groups,
                      const Hyperparams& params, const CvOptions& options,
                      std::size_t min_features) {
  std::vector<std::size_t> features = options.allowed_features;
  if (features.empty()) {
    features.resize(x.cols);
    std::iota(features.begin(), features.end(), 0);
  }
  std::sort(features.begin(), features.end());
  min_features = std::max<std::size_t>(1, min_features);
  const auto folds = grouped_kfold(groups, options.folds, options.seed);

  RfeResult result;
  while (true) {
    RfeStep step;
    step.features = features;
    std::vector<double> importance(x.cols, 0.0);
    double r2_sum = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      FitOptions fo{params, options.reg, mix_seed(options.seed, f), features, {}};
      const GbtModel m = fit_gbt(x.select_rows(folds[f].train), select(y, folds[f].train), fo);
      std::vector<double> pred;
      for (std::size_t r : folds[f].test) {
        pred.push_back(m.predict(x.row(r)));
        const Attribution a = m.shap(x.row(r));
        for (std::size_t j : features) importance[j] += std::abs(a.phi[j]);
      }
      r2_sum += r2_score(select(y, folds[f].test), pred);
    }
    step.cv_r2 = r2_sum / static_cast<double>(folds.size());
    for (std::size_t j : features) step.mean_abs_shap.push_back(importance[j] / static_cast<double>(x.rows));

    if (features.size() > min_features) {
      std::size_t drop = 0;
      for (std::size_t k = 1; k < features.size(); ++k) {
        if (step.mean_abs_shap[k] < step.mean_abs_shap[drop]) drop = k;
      }
      step.dropped = features[drop];
      result.elimination_order.push_back(features[drop]);
      features.erase(features.begin() + static_cast<std::ptrdiff_t>(drop));
      result.steps.push_back(std::move(step));
      continue;
    }
    result.steps.push_back(std::move(step));
    break;
  }

  std::size_t best = 0;
  for (std::size_t s = 1; s < result.steps.size(); ++s) {
    // Later steps have fewer features, so ties move forward.
    if (result.steps[s].cv_r2 >= result.steps[best].cv_r2 - kTieTolerance) best = s;
  }
  result.selected = result.steps[best].features;
  return result;
}

// ---------------------------------------------------------------- dataset

Matrix TrainingSet::matrix() const {
  Matrix m(rows.size(), kFeatureCount);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].features.values.begin(), rows[i].features.values.end(), m.row(i));
  }
  return m;
}

std::vector<double> TrainingSet::targets() const {
  std::vector<double> y;
  y.reserve(rows.size());
  for (const auto& r : rows) y.push_back(r.target);
  return y;
}

std::vector<int> TrainingSet::groups() const {
  std::vector<int> g;
  g.reserve(rows.size());
  for (const auto& r : rows) g.push_back(r.group);
  return g;
}

std::size_t TrainingSet::group_count() const {
  auto g = groups();
  std::sort(g.begin(), g.end());
  return static_cast<std::size_t>(std::unique(g.begin(), g.end()) - g.begin());
}

void TrainingSet::write_csv(const std::filesystem::path& path) const {
  io::CsvWriter out(path);
  std::vector<std::string> header;
  for (auto name : feature_names()) header.emplace_back(name);
  for (const char* extra : {"trial", "condition", "ego", "round", "target"}) header.emplace_back(extra);
  out.header(header);
  for (const auto& r : rows) {
    for (double v : r.features.values) out.cell(v);
    out.cell(r.trial).cell(to_string(r.condition)).cell(r.ego.value).cell(r.round).cell(r.target);
    out.end_row();
  }
}

TrainingSet build_dataset(std::span<const TrialState> trials, const SemanticResources& resources) {
  TrainingSet set;
  std::map<std::tuple<int, int, std::int32_t>, int> group_ids;
  for (const TrialState& state : trials) {
    FeatureAssembler assembler(resources, state);
    int last_round = 0;
    for (const auto& idea : state.ideas()) last_round = std::max(last_round, idea.round);
    for (int t = 2; t <= last_round; ++t) {
      const auto with_edges = state.rounds_with_edges();
      if (std::find(with_edges.begin(), with_edges.end(), t) == with_edges.end()) continue;
      const RoundPool pool = build_round_pool(state, t);
      const BipartiteRound& net = state.round_network(t);
      for (EgoId ego : state.egos()) {
        if (!state.has_follow(t, ego) || !state.has_ideas(Role::Ego, ego.value, t - 1) ||
            !state.has_ideas(Role::Ego, ego.value, t)) {
          continue;
        }
        TrainingRow row;
        row.trial = state.trial();
        row.condition = state.condition();
        row.ego = ego;
        row.round = t;
        const auto key = std::make_tuple(state.trial(), static_cast<int>(state.condition()), ego.value);
        row.group = group_ids.try_emplace(key, static_cast<int>(group_ids.size())).first->second;
        row.features = assembler.assemble(ego, t, net.follows.at(ego));
        row.target = marginal_distinct_count(pool, state.arrival_rank(ego),
                                             state.bins(Role::Ego, ego.value, t, 2));
        set.rows.push_back(std::move(row));
      }
    }
  }
  return set;
}

// ---------------------------------------------------------------- pipeline

TrainReport train_model(const TrainingSet& data, const TrainOptions& options) {
  if (data.rows.empty()) throw Error(ErrorCode::InvalidInput, "training set is empty");
  TrainReport report;
  Matrix x = data.matrix();
  const auto y = data.targets();
  const auto groups = data.groups();
  report.split = grouped_split(groups, options.test_ratio, options.seed);
  if (report.split.train.empty()) throw Error(ErrorCode::InvalidInput, "training split is empty");

  // Column means over the training rows, ignoring missing values.
  std::vector<double> means(kFeatureCount, 0.0);
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t r : report.split.train) {
      if (!std::isnan(x(r, j))) {
        sum += x(r, j);
        ++count;
      }
    }
    means[j] = count ? sum / static_cast<double>(count) : 0.0;
  }
  for (std::size_t i = 0; i < x.rows; ++i) impute(std::span<double>(x.row(i), x.cols), means);

  const Matrix raw_train = x.select_rows(report.split.train);
  const ScalerParams scaler = ScalerParams::fit(raw_train.data, kFeatureCount);
  for (std::size_t i = 0; i < x.rows; ++i) scaler.transform(std::span<double>(x.row(i), x.cols));

  const Matrix xtr = x.select_rows(report.split.train);
  const auto ytr = select(y, report.split.train);
  std::vector<int> gtr;
  for (std::size_t r : report.split.train) gtr.push_back(groups[r]);

  CvOptions cv;
  cv.folds = options.folds;
  cv.seed = options.seed;
  cv.reg = options.reg;
  if (options.run_rfe) {
    report.rfe = rfe_by_shap(xtr, ytr, gtr, options.rfe_params, cv, options.min_features);
  } else {
    report.rfe.selected.resize(kFeatureCount);
    std::iota(report.rfe.selected.begin(), report.rfe.selected.end(), 0);
  }
  cv.allowed_features = report.rfe.selected;
  const std::vector<Hyperparams> grid =
      options.grid.empty() ? std::vector<Hyperparams>{options.rfe_params} : options.grid;
  report.grid = grid_search_cv(xtr, ytr, gtr, grid, cv);

  FitOptions fo{report.grid.best, options.reg, options.seed, report.rfe.selected, {}};
  TreeEnsemble& model = report.model;
  model.forest = fit_gbt(xtr, ytr, fo);
  model.scaler = scaler;
  model.impute_means = means;
  model.selected_features = report.rfe.selected;
  model.params = report.grid.best;
  model.reg = options.reg;

  const RidgeModel ridge = RidgeModel::fit(xtr, ytr, 1.0);
  if (!report.split.test.empty()) {
    const Matrix xte = x.select_rows(report.split.test);
    const auto yte = select(y, report.split.test);
    const auto pred = model.forest.predict(xte);
    report.test_r2 = r2_score(yte, pred);
    report.test_mae = mean_absolute_error(yte, pred);
    const auto rpred = ridge.predict(xte);
    report.ridge_test_r2 = r2_score(yte, rpred);
    report.ridge_test_mae = mean_absolute_error(yte, rpred);
  }

  io::Json rfe_steps = io::Json::array();
  for (const auto& s : report.rfe.steps) {
    io::Json step{{"n_features", s.features.size()}, {"cv_r2", s.cv_r2}};
    if (s.dropped) step["dropped"] = feature_names()[*s.dropped];
    rfe_steps.push_back(step);
  }
  double best_cv = 0.0;
  for (const auto& rec : report.grid.table) {
    if (rec.params == report.grid.best) best_cv = rec.mean_r2;
  }
  model.metadata = {
      {"seed", options.seed},
      {"folds", options.folds},
      {"test_ratio", options.test_ratio},
      {"n_rows", data.rows.size()},
      {"n_train_rows", report.split.train.size()},
      {"n_test_rows", report.split.test.size()},
      {"n_groups", data.group_count()},
      {"grid_points", grid.size()},
      {"cv_best_mean_r2", best_cv},
      {"test_r2", report.test_r2},
      {"test_mae", report.test_mae},
      {"ridge_test_r2", report.ridge_test_r2},
      {"ridge_test_mae", report.ridge_test_mae},
      {"rfe_steps", rfe_steps},
  };
  return report;
}

void write_cv_report(const std::filesystem::path& path, const TrainReport& report) {
  io::CsvWriter out(path);
  std::size_t folds = 0;
  for (const auto& rec : report.grid.table) folds = std::max(folds, rec.fold_r2.size());
  std::vector<std::string> header{"n_estimators", "learning_rate", "max_depth", "subsample",
                                  "colsample_bytree", "max_leaves"};
  for (std::size_t f = 0; f < folds; ++f) header.push_back("fold" + std::to_string(f + 1) + "_r2");
  header.insert(header.end(), {"mean_r2", "selected"});
  out.header(header);
  for (const auto& rec : report.grid.table) {
    const auto& p = rec.params;
    out.cell(p.n_estimators).cell(p.learning_rate).cell(p.max_depth).cell(p.subsample)
        .cell(p.colsample_bytree).cell(p.max_leaves);
    for (std::size_t f = 0; f < folds; ++f) {
      if (f < rec.fold_r2.size()) out.cell(rec.fold_r2[f]); else out.cell(std::string_view{});
    }
    out.cell(rec.mean_r2).cell(p == report.grid.best ? 1 : 0);
    out.end_row();
  }
}

}  // namespace socialmuse
