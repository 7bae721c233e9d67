// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "socialmuse/error.hpp"
#include "socialmuse/model.hpp"

namespace socialmuse {

Matrix Matrix::select_rows(std::span<const std::size_t> idx) const {
  Matrix out(idx.size(), cols);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    std::copy_n(row(idx[r]), cols, out.row(r));
  }
  return out;
}

std::vector<double> select(std::span<const double> values, std::span<const std::size_t> idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(values[i]);
  return out;
}

double RegressionTree::predict(const double* x) const {
  int n = 0;
  while (!nodes[n].is_leaf()) {
    n = x[nodes[n].feature] < nodes[n].threshold ? nodes[n].left : nodes[n].right;
  }
  return nodes[n].value;
}

double RegressionTree::expected_value() const {
  double weighted = 0.0;
  for (const auto& node : nodes) {
    if (node.is_leaf()) weighted += node.cover * node.value;
  }
  return nodes[0].cover > 0 ? weighted / nodes[0].cover : nodes[0].value;
}

int RegressionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (!nodes[i].is_leaf()) {
      d[nodes[i].left] = d[i] + 1;
      d[nodes[i].right] = d[i] + 1;
    }
  }
  return deepest;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

double Attribution::total() const { return base + std::accumulate(phi.begin(), phi.end(), 0.0); }

double GbtModel::predict(const double* x) const {
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return base_score + learning_rate * sum;
}

std::vector<double> GbtModel::predict(const Matrix& x) const {
  std::vector<double> out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) out[i] = predict(x.row(i));
  return out;
}

double GbtModel::expected_value() const {
  double sum = 0.0;
  for (const auto& t : trees) sum += t.expected_value();
  return base_score + learning_rate * sum;
}

Attribution GbtModel::shap(const double* x) const {
  Attribution a;
  a.base = expected_value();
  a.phi.assign(n_features, 0.0);
  for (const auto& t : trees) tree_shap(t, x, a.phi, learning_rate);
  return a;
}

namespace {

struct Candidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

struct Leaf {
  int node = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  int depth = 0;
  double g = 0.0;
  double h = 0.0;
  Candidate best;
};

double leaf_score(double g, double h, double lambda) { return g * g / (h + lambda); }

class TreeBuilder {
 public:
  /// `columns` holds the matrix column-major: value (r, f) at f * rows + r.
  TreeBuilder(const std::vector<double>& columns, std::size_t rows, const std::vector<double>& grad,
              const Hyperparams& params, const Regularization& reg, std::vector<std::size_t> features,
              std::vector<std::vector<std::size_t>> lists)
      : columns_(columns), rows_(rows), grad_(grad), params_(params), reg_(reg),
        features_(std::move(features)), lists_(std::move(lists)), goes_left_(rows, 0) {
    // Every hessian is 1, so node weights are row counts.
    inv_.resize(rows + 1);
    for (std::size_t k = 0; k <= rows; ++k) inv_[k] = 1.0 / (static_cast<double>(k) + reg_.lambda);
  }

  RegressionTree build() {
    const std::size_t m = lists_.empty() ? 0 : lists_[0].size();
    Leaf root{0, 0, m, 0, 0.0, static_cast<double>(m), {}};
    for (std::size_t p = 0; p < m; ++p) root.g += grad_[lists_[0][p]];
    tree_.nodes.push_back(make_node(root.g, root.h));
    evaluate(root);

    std::vector<Leaf> open;
    if (root.best.feature >= 0) open.push_back(root);
    std::size_t leaves = 1;
    const std::size_t leaf_cap =
        params_.max_leaves > 0 ? static_cast<std::size_t>(params_.max_leaves) : SIZE_MAX;
    while (!open.empty() && leaves < leaf_cap) {
      // Highest gain first; equal gains go to the older node.
      auto it = std::max_element(open.begin(), open.end(), [](const Leaf& a, const Leaf& b) {
        if (a.best.gain != b.best.gain) return a.best.gain < b.best.gain;
        return a.node > b.node;
      });
      Leaf leaf = *it;
      open.erase(it);
      auto [left, right] = split(leaf);
      ++leaves;
      evaluate(left);
      evaluate(right);
      if (left.best.feature >= 0) open.push_back(left);
      if (right.best.feature >= 0) open.push_back(right);
    }
    return std::move(tree_);
  }

 private:
  TreeNode make_node(double g, double h) const {
    TreeNode n;
    n.value = -g / (h + reg_.lambda);
    n.cover = h;
    return n;
  }

  void evaluate(Leaf& leaf) const {
    leaf.best = {};
    if (leaf.depth >= params_.max_depth || leaf.end - leaf.begin < 2) return;
    const double parent = leaf_score(leaf.g, leaf.h, reg_.lambda);
    const auto n = leaf.end - leaf.begin;
    double best_gain = 0.0;
    for (std::size_t k = 0; k < features_.size(); ++k) {
      const std::size_t f = features_[k];
      const auto& list = lists_[k];
      const double* col = column(f);
      double gl = 0.0;
      for (std::size_t p = leaf.begin; p + 1 < leaf.end; ++p) {
        gl += grad_[list[p]];
        const double xv = col[list[p]];
        const double xn = col[list[p + 1]];
        if (!(xv < xn)) continue;
        const std::size_t nl = p + 1 - leaf.begin;
        const std::size_t nr = n - nl;
        if (static_cast<double>(nl) < reg_.min_child_weight ||
            static_cast<double>(nr) < reg_.min_child_weight) {
          continue;
        }
        const double gr = leaf.g - gl;
        const double gain = 0.5 * (gl * gl * inv_[nl] + gr * gr * inv_[nr] - parent) - reg_.gamma;
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          double thr = xv + (xn - xv) / 2.0;
          if (!(thr > xv)) thr = xn;
          leaf.best = {gain, static_cast<int>(f), thr};
        }
      }
    }
  }

  std::pair<Leaf, Leaf> split(const Leaf& leaf) {
    const auto f = static_cast<std::size_t>(leaf.best.feature);
    const double thr = leaf.best.threshold;
    const double* col = column(f);
    double gl = 0.0, hl = 0.0;
    for (std::size_t p = leaf.begin; p < leaf.end; ++p) {
      const std::size_t r = lists_[0][p];
      goes_left_[r] = col[r] < thr ? 1 : 0;
      if (goes_left_[r]) {
        gl += grad_[r];
        hl += 1.0;
      }
    }
    // Stable partition of every sorted list through one scratch buffer.
    // Children at the depth cap are never searched, so their order is moot.
    const bool searchable = leaf.depth + 1 < params_.max_depth;
    for (auto& list : lists_) {
      if (!searchable) break;
      std::size_t w = leaf.begin;
      right_.clear();
      for (std::size_t p = leaf.begin; p < leaf.end; ++p) {
        const std::size_t r = list[p];
        if (goes_left_[r]) {
          list[w++] = r;
        } else {
          right_.push_back(r);
        }
      }
      std::copy(right_.begin(), right_.end(), list.begin() + static_cast<std::ptrdiff_t>(w));
    }
    const std::size_t cut = leaf.begin + static_cast<std::size_t>(hl);

    TreeNode& parent = tree_.nodes[static_cast<std::size_t>(leaf.node)];
    parent.feature = leaf.best.feature;
    parent.threshold = thr;
    const int left_id = static_cast<int>(tree_.nodes.size());
    parent.left = left_id;
    parent.right = left_id + 1;
    tree_.nodes.push_back(make_node(gl, hl));
    tree_.nodes.push_back(make_node(leaf.g - gl, leaf.h - hl));

    Leaf left{left_id, leaf.begin, cut, leaf.depth + 1, gl, hl, {}};
    Leaf right{left_id + 1, cut, leaf.end, leaf.depth + 1, leaf.g - gl, leaf.h - hl, {}};
    return {left, right};
  }

  const double* column(std::size_t f) const { return columns_.data() + f * rows_; }

  const std::vector<double>& columns_;
  std::size_t rows_;
  const std::vector<double>& grad_;
  const Hyperparams& params_;
  const Regularization& reg_;
  std::vector<std::size_t> features_;
  std::vector<std::vector<std::size_t>> lists_;
  std::vector<char> goes_left_;
  std::vector<std::size_t> right_;
  std::vector<double> inv_;
  RegressionTree tree_;
};

void check_inputs(const Matrix& x, std::span<const double> y, const FitOptions& options) {
  if (x.rows == 0) throw Error(ErrorCode::InvalidInput, "training set is empty");
  if (x.cols == 0) throw Error(ErrorCode::InvalidInput, "training set has no features");
  if (y.size() != x.rows) throw Error(ErrorCode::InvalidInput, "target length differs from rows");
  const auto& p = options.params;
  if (p.n_estimators < 0 || p.max_depth < 0 || !(p.learning_rate > 0) || !(p.subsample > 0) ||
      p.subsample > 1 || !(p.colsample_bytree > 0) || p.colsample_bytree > 1) {
    throw Error(ErrorCode::InvalidInput, "hyperparameters out of range");
  }
  for (double v : x.data) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "feature matrix has non-finite values");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "targets have non-finite values");
  }
  for (std::size_t f : options.allowed_features) {
    if (f >= x.cols) throw Error(ErrorCode::InvalidInput, "allowed feature outside the matrix");
  }
}

std::size_t sample_size(double ratio, std::size_t n) {
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n))),
                                 1, n);
}

}  // namespace

GbtModel fit_gbt(const Matrix& x, std::span<const double> y, const FitOptions& options) {
  check_inputs(x, y, options);
  const std::size_t n = x.rows;
  const auto& params = options.params;

  std::vector<std::size_t> allowed = options.allowed_features;
  if (allowed.empty()) {
    allowed.resize(x.cols);
    std::iota(allowed.begin(), allowed.end(), 0);
  }
  std::sort(allowed.begin(), allowed.end());
  allowed.erase(std::unique(allowed.begin(), allowed.end()), allowed.end());

  GbtModel model;
  model.n_features = x.cols;
  model.learning_rate = params.learning_rate;
  model.base_score = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

  std::vector<double> columns(x.cols * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t f = 0; f < x.cols; ++f) columns[f * n + r] = x(r, f);
  }
  // Rows presorted by value once per feature; ties keep row order.
  std::vector<std::vector<std::size_t>> sorted(x.cols);
  for (std::size_t f : allowed) {
    auto& order = sorted[f];
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    const double* col = columns.data() + f * n;
    std::stable_sort(order.begin(), order.end(),
                     [col](std::size_t a, std::size_t b) { return col[a] < col[b]; });
  }

  std::mt19937_64 rng(options.seed);
  std::vector<double> pred(n, model.base_score);
  std::vector<double> grad(n);
  std::vector<std::size_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0);
  std::vector<char> in_sample(n, 1);

  for (int t = 0; t < params.n_estimators; ++t) {
    for (std::size_t i = 0; i < n; ++i) grad[i] = pred[i] - y[i];

    if (params.subsample < 1.0) {
      std::vector<std::size_t> rows = all_rows;
      std::shuffle(rows.begin(), rows.end(), rng);
      std::fill(in_sample.begin(), in_sample.end(), 0);
      for (std::size_t k = 0; k < sample_size(params.subsample, n); ++k) in_sample[rows[k]] = 1;
    }
    std::vector<std::size_t> features = allowed;
    if (params.colsample_bytree < 1.0) {
      std::shuffle(features.begin(), features.end(), rng);
      features.resize(sample_size(params.colsample_bytree, features.size()));
      std::sort(features.begin(), features.end());
    }

    std::vector<std::vector<std::size_t>> lists;
    lists.reserve(features.size());
    for (std::size_t f : features) {
      if (params.subsample >= 1.0) {
        lists.push_back(sorted[f]);
        continue;
      }
      auto& list = lists.emplace_back();
      list.reserve(n);
      for (std::size_t r : sorted[f]) {
        if (in_sample[r]) list.push_back(r);
      }
    }

    TreeBuilder builder(columns, n, grad, params, options.reg, features, std::move(lists));
    RegressionTree tree = builder.build();
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] += params.learning_rate * tree.predict(x.row(i));
      const double e = pred[i] - y[i];
      loss += 0.5 * e * e;
    }
    model.trees.push_back(std::move(tree));
    if (options.on_tree) options.on_tree(static_cast<std::size_t>(t), loss / static_cast<double>(n));
  }
  return model;
}

}  // namespace socialmuse
