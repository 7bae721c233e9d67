// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "socialmuse/error.hpp"
#include "socialmuse/model.hpp"

namespace socialmuse {

std::array<double, kFeatureCount> TreeEnsemble::prepare(const FeatureVector& vec) const {
  if (impute_means.size() != kFeatureCount) {
    throw Error(ErrorCode::NotReady, "model has no imputation means");
  }
  std::array<double, kFeatureCount> x = vec.values;
  impute(x, impute_means);
  scaler.transform(x);
  return x;
}

double TreeEnsemble::predict(const FeatureVector& vec) const {
  const auto x = prepare(vec);
  return forest.predict(x.data());
}

double TreeEnsemble::predict_clamped(const FeatureVector& vec) const {
  return std::max(0.0, predict(vec));
}

Attribution TreeEnsemble::shap(const FeatureVector& vec) const {
  const auto x = prepare(vec);
  return forest.shap(x.data());
}

namespace {

io::Json params_json(const Hyperparams& p) {
  return {{"n_estimators", p.n_estimators}, {"learning_rate", p.learning_rate},
          {"max_depth", p.max_depth},       {"subsample", p.subsample},
          {"colsample_bytree", p.colsample_bytree}, {"max_leaves", p.max_leaves}};
}

Hyperparams params_from(const io::Json& j) {
  Hyperparams p;
  p.n_estimators = io::field(j, "n_estimators").get<int>();
  p.learning_rate = io::field(j, "learning_rate").get<double>();
  p.max_depth = io::field(j, "max_depth").get<int>();
  p.subsample = io::field(j, "subsample").get<double>();
  p.colsample_bytree = io::field(j, "colsample_bytree").get<double>();
  p.max_leaves = io::field(j, "max_leaves").get<int>();
  return p;
}

template <class T>
std::vector<T> vector_from(const io::Json& j, std::string_view name) {
  return io::field(j, name).get<std::vector<T>>();
}

}  // namespace

io::Json TreeEnsemble::to_json() const {
  io::Json names = io::Json::array();
  for (auto n : feature_names()) names.push_back(std::string(n));
  io::Json selected = io::Json::array();
  for (std::size_t f : selected_features) selected.push_back(std::string(feature_names()[f]));
  io::Json trees = io::Json::array();
  for (const auto& tree : forest.trees) {
    io::Json nodes = io::Json::array();
    for (const auto& n : tree.nodes) {
      nodes.push_back(io::Json::array({n.feature, n.threshold, n.left, n.right, n.value, n.cover}));
    }
    trees.push_back(std::move(nodes));
  }
  return {
      {"format", kModelFormat},
      {"version", kModelFormatVersion},
      {"feature_layout", kFeatureLayoutVersion},
      {"feature_names", names},
      {"base_score", forest.base_score},
      {"learning_rate", forest.learning_rate},
      {"scaler", {{"mean", scaler.mean}, {"scale", scaler.scale}}},
      {"impute_means", impute_means},
      {"selected_features", selected},
      {"hyperparams", params_json(params)},
      {"regularization",
       {{"lambda", reg.lambda}, {"gamma", reg.gamma}, {"min_child_weight", reg.min_child_weight}}},
      {"metadata", metadata},
      {"tree_node_fields", {"feature", "threshold", "left", "right", "value", "cover"}},
      {"trees", trees},
  };
}

TreeEnsemble TreeEnsemble::from_json(const io::Json& j) {
  try {
    if (io::field(j, "format").get<std::string>() != kModelFormat) {
      throw Error(ErrorCode::Schema, "not a socialmuse model file");
    }
    if (io::field(j, "version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorCode::Schema, "unsupported model format version");
    }
    if (io::field(j, "feature_layout").get<std::string>() != kFeatureLayoutVersion) {
      throw Error(ErrorCode::Schema, "model was trained on a different feature layout");
    }
    const auto names = vector_from<std::string>(j, "feature_names");
    if (names.size() != kFeatureCount ||
        !std::equal(names.begin(), names.end(), feature_names().begin())) {
      throw Error(ErrorCode::Schema, "feature names do not match the canonical layout");
    }
    TreeEnsemble m;
    m.forest.n_features = kFeatureCount;
    m.forest.base_score = io::field(j, "base_score").get<double>();
    m.forest.learning_rate = io::field(j, "learning_rate").get<double>();
    const auto& scaler = io::field(j, "scaler");
    m.scaler.mean = vector_from<double>(scaler, "mean");
    m.scaler.scale = vector_from<double>(scaler, "scale");
    m.impute_means = vector_from<double>(j, "impute_means");
    if (m.scaler.mean.size() != kFeatureCount || m.scaler.scale.size() != kFeatureCount ||
        m.impute_means.size() != kFeatureCount) {
      throw Error(ErrorCode::Schema, "scaler or imputation width is not " + std::to_string(kFeatureCount));
    }
    for (const auto& name : vector_from<std::string>(j, "selected_features")) {
      const auto idx = feature_index(name);
      if (!idx) throw Error(ErrorCode::Schema, "unknown selected feature '" + name + "'");
      m.selected_features.push_back(*idx);
    }
    m.params = params_from(io::field(j, "hyperparams"));
    const auto& reg = io::field(j, "regularization");
    m.reg.lambda = io::field(reg, "lambda").get<double>();
    m.reg.gamma = io::field(reg, "gamma").get<double>();
    m.reg.min_child_weight = io::field(reg, "min_child_weight").get<double>();
    m.metadata = j.value("metadata", io::Json::object());
    for (const auto& tree_json : io::field(j, "trees")) {
      RegressionTree tree;
      for (const auto& n : tree_json) {
        if (!n.is_array() || n.size() != 6) throw Error(ErrorCode::Schema, "tree node needs 6 fields");
        TreeNode node{n[0].get<int>(), n[1].get<double>(), n[2].get<int>(),
                      n[3].get<int>(), n[4].get<double>(), n[5].get<double>()};
        tree.nodes.push_back(node);
      }
      const auto count = static_cast<int>(tree.nodes.size());
      if (count == 0) throw Error(ErrorCode::Schema, "empty tree");
      for (int i = 0; i < count; ++i) {
        const auto& node = tree.nodes[static_cast<std::size_t>(i)];
        if (node.is_leaf()) continue;
        if (node.feature >= static_cast<int>(kFeatureCount) || node.left <= i || node.right <= i ||
            node.left >= count || node.right >= count) {
          throw Error(ErrorCode::Schema, "malformed tree node " + std::to_string(i));
        }
      }
      m.forest.trees.push_back(std::move(tree));
    }
    return m;
  } catch (const io::Json::exception& e) {
    throw Error(ErrorCode::Schema, std::string("model file: ") + e.what());
  }
}

std::string TreeEnsemble::serialized() const { return to_json().dump(1) + "\n"; }

void TreeEnsemble::save(const std::filesystem::path& path) const { io::write_text(path, serialized()); }

TreeEnsemble TreeEnsemble::load(const std::filesystem::path& path) {
  io::Json j;
  try {
    j = io::Json::parse(io::read_text(path));
  } catch (const io::Json::exception& e) {
    throw Error(ErrorCode::Schema, path.string() + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace socialmuse
