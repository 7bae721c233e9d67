// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "socialmuse/features.hpp"
#include "socialmuse/io.hpp"
#include "socialmuse/trial.hpp"

namespace socialmuse {

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
  double* row(std::size_t i) { return data.data() + i * cols; }
  Matrix select_rows(std::span<const std::size_t> idx) const;
};

std::vector<double> select(std::span<const double> values, std::span<const std::size_t> idx);

// ---------------------------------------------------------------- learner

struct Hyperparams {
  int n_estimators = 100;
  double learning_rate = 0.1;
  int max_depth = 5;
  double subsample = 1.0;
  double colsample_bytree = 1.0;
  int max_leaves = 25;

  bool operator==(const Hyperparams&) const = default;
};

struct Regularization {
  double lambda = 1.0;
  double gamma = 0.0;
  double min_child_weight = 1.0;
};

/// A node is a leaf when `feature < 0`. Rows with x[feature] < threshold go
/// left. `value` is the Newton weight of the node's rows; `cover` their
/// hessian sum.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  double cover = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(const double* x) const;
  /// Cover-weighted mean of the leaf values.
  double expected_value() const;
  int depth() const;
  std::size_t leaf_count() const;
};

/// Per-feature Shapley values plus the expected model output.
struct Attribution {
  double base = 0.0;
  std::vector<double> phi;

  double total() const;
};

/// Boosted regression forest over an arbitrary feature width.
struct GbtModel {
  std::size_t n_features = 0;
  double base_score = 0.0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;

  double predict(const double* x) const;
  std::vector<double> predict(const Matrix& x) const;
  double expected_value() const;
  /// Exact path-dependent tree Shapley values.
  Attribution shap(const double* x) const;
};

/// Exact Shapley values of one tree; adds into `phi`.
void tree_shap(const RegressionTree& tree, const double* x, std::span<double> phi, double scale);

struct FitOptions {
  Hyperparams params;
  Regularization reg;
  std::uint64_t seed = 0;
  /// Feature columns the trees may split on; empty means all.
  std::vector<std::size_t> allowed_features;
  /// Optional per-tree callback with the training loss after the tree.
  std::function<void(std::size_t, double)> on_tree;
};

/// Squared-loss boosting with exact greedy best-first tree growth.
GbtModel fit_gbt(const Matrix& x, std::span<const double> y, const FitOptions& options);

// ---------------------------------------------------------------- baseline

struct RidgeModel {
  ScalerParams scaler;
  std::vector<double> coef;
  double intercept = 0.0;

  static RidgeModel fit(const Matrix& x, std::span<const double> y, double alpha = 1.0);
  double predict(const double* x) const;
  std::vector<double> predict(const Matrix& x) const;
};

// ---------------------------------------------------------------- evaluation

/// 1 - SSE/SST; 0 when the truth is constant.
double r2_score(std::span<const double> truth, std::span<const double> pred);
double mean_absolute_error(std::span<const double> truth, std::span<const double> pred);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Rows sharing a group id land on the same side; round(test_ratio * groups)
/// groups go to test.
Split grouped_split(std::span<const int> groups, double test_ratio, std::uint64_t seed);

/// Group-respecting K folds; fold f's `test` holds its rows.
std::vector<Split> grouped_kfold(std::span<const int> groups, int folds, std::uint64_t seed);

struct CvRecord {
  Hyperparams params;
  std::vector<double> fold_r2;
  double mean_r2 = 0.0;
};

struct GridResult {
  Hyperparams best;
  std::vector<CvRecord> table;  // grid order
};

/// The full reference grid (1620 points).
std::vector<Hyperparams> reference_grid();

struct CvOptions {
  int folds = 5;
  std::uint64_t seed = 0;
  Regularization reg;
  std::vector<std::size_t> allowed_features;
};

CvRecord cross_validate(const Matrix& x, std::span<const double> y, std::span<const int> groups,
                        const Hyperparams& params, const CvOptions& options);

/// Mean fold R² decides; ties go to fewer estimators, then lower depth, then
/// grid order.
GridResult grid_search_cv(const Matrix& x, std::span<const double> y, std::span<const int> groups,
                          std::span<const Hyperparams> grid, const CvOptions& options);

struct RfeStep {
  std::vector<std::size_t> features;
  double cv_r2 = 0.0;
  std::vector<double> mean_abs_shap;  // aligned with `features`
  std::optional<std::size_t> dropped;
};

struct RfeResult {
  std::vector<std::size_t> selected;
  std::vector<RfeStep> steps;
  std::vector<std::size_t> elimination_order;
};

/// Recursive elimination by out-of-fold mean |SHAP|; keeps the best-scoring
/// set (ties to the smaller set) and never goes below `min_features`.
RfeResult rfe_by_shap(const Matrix& x, std::span<const double> y, std::span<const int> groups,
                      const Hyperparams& params, const CvOptions& options,
                      std::size_t min_features = 5);

// ---------------------------------------------------------------- dataset

struct TrainingRow {
  int trial = 0;
  Condition condition = Condition::Control;
  EgoId ego{};
  int round = 2;
  int group = 0;
  FeatureVector features;
  double target = 0.0;
};

struct TrainingSet {
  std::vector<TrainingRow> rows;

  Matrix matrix() const;
  std::vector<double> targets() const;
  std::vector<int> groups() const;
  std::size_t group_count() const;
  /// Header of canonical feature names followed by the row keys and target.
  void write_csv(const std::filesystem::path& path) const;
};

/// Replays each trial's arrival order; one row per ego and round t >= 2 that
/// has round t-1 ideas, round t ideas and a round t follow.
TrainingSet build_dataset(std::span<const TrialState> trials, const SemanticResources& resources);

// ---------------------------------------------------------------- artifact

inline constexpr std::string_view kModelFormat = "socialmuse-model";
inline constexpr int kModelFormatVersion = 1;

/// Deployable model: imputation, standardization, feature mask and forest
/// over the canonical 36-feature layout.
class TreeEnsemble {
 public:
  GbtModel forest;
  ScalerParams scaler;
  std::vector<double> impute_means;
  std::vector<std::size_t> selected_features;
  Hyperparams params;
  Regularization reg;
  io::Json metadata = io::Json::object();

  /// Imputed and standardized copy of `vec`.
  std::array<double, kFeatureCount> prepare(const FeatureVector& vec) const;
  /// Raw score used for ranking.
  double predict(const FeatureVector& vec) const;
  /// Score reported to users, clamped below at 0.
  double predict_clamped(const FeatureVector& vec) const;
  Attribution shap(const FeatureVector& vec) const;

  io::Json to_json() const;
  static TreeEnsemble from_json(const io::Json& j);
  void save(const std::filesystem::path& path) const;
  static TreeEnsemble load(const std::filesystem::path& path);
  std::string serialized() const;
};

struct TrainOptions {
  std::vector<Hyperparams> grid;
  Hyperparams rfe_params{30, 0.3, 3, 1.0, 1.0, 25};
  int folds = 5;
  double test_ratio = 0.2;
  std::uint64_t seed = 0;
  bool run_rfe = true;
  std::size_t min_features = 5;
  Regularization reg;
};

struct TrainReport {
  TreeEnsemble model;
  RfeResult rfe;
  GridResult grid;
  Split split;
  double test_r2 = 0.0;
  double test_mae = 0.0;
  double ridge_test_r2 = 0.0;
  double ridge_test_mae = 0.0;
};

/// Split, impute, standardize, eliminate, tune and refit.
TrainReport train_model(const TrainingSet& data, const TrainOptions& options);

/// CV table as CSV (one row per grid point).
void write_cv_report(const std::filesystem::path& path, const TrainReport& report);

}  // namespace socialmuse
