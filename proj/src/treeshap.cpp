// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

// Polynomial-time exact Shapley values for a single regression tree, using
// the path-weight bookkeeping of the path-dependent TreeSHAP algorithm.

#include <vector>

#include "socialmuse/error.hpp"
#include "socialmuse/model.hpp"

namespace socialmuse {

namespace {

struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double pweight = 0.0;
};

void extend_path(PathElement* path, int depth, double zero_fraction, double one_fraction,
                 int feature) {
  path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    path[i + 1].pweight += one_fraction * path[i].pweight * (i + 1) / (depth + 1);
    path[i].pweight = zero_fraction * path[i].pweight * (depth - i) / (depth + 1);
  }
}

void unwind_path(PathElement* path, int depth, int index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  double next = path[depth].pweight;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0.0) {
      const double tmp = path[i].pweight;
      path[i].pweight = next * (depth + 1) / ((i + 1) * one);
      next = tmp - path[i].pweight * zero * (depth - i) / (depth + 1);
    } else {
      path[i].pweight = path[i].pweight * (depth + 1) / (zero * (depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
}

double unwound_path_sum(const PathElement* path, int depth, int index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  double next = path[depth].pweight;
  double total = 0.0;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0.0) {
      const double tmp = next * (depth + 1) / ((i + 1) * one);
      total += tmp;
      next = path[i].pweight - tmp * zero * (depth - i) / static_cast<double>(depth + 1);
    } else if (zero != 0.0) {
      total += path[i].pweight / zero / ((depth - i) / static_cast<double>(depth + 1));
    } else if (path[i].pweight != 0.0) {
      throw Error(ErrorCode::Internal, "inconsistent tree cover");
    }
  }
  return total;
}

struct ShapContext {
  const RegressionTree& tree;
  const double* x;
  std::span<double> phi;
  double scale;
};

void recurse(ShapContext& ctx, int node, int depth, PathElement* parent_path,
             double zero_fraction, double one_fraction, int feature) {
  PathElement* path = parent_path + depth + 1;
  std::copy(parent_path, parent_path + depth + 1, path);
  extend_path(path, depth, zero_fraction, one_fraction, feature);

  const TreeNode& n = ctx.tree.nodes[static_cast<std::size_t>(node)];
  if (n.is_leaf()) {
    for (int i = 1; i <= depth; ++i) {
      const double w = unwound_path_sum(path, depth, i);
      const PathElement& el = path[i];
      ctx.phi[static_cast<std::size_t>(el.feature)] +=
          ctx.scale * w * (el.one_fraction - el.zero_fraction) * n.value;
    }
    return;
  }

  const bool go_left = ctx.x[n.feature] < n.threshold;
  const int hot = go_left ? n.left : n.right;
  const int cold = go_left ? n.right : n.left;
  const double cover = n.cover;
  const double hot_zero = ctx.tree.nodes[static_cast<std::size_t>(hot)].cover / cover;
  const double cold_zero = ctx.tree.nodes[static_cast<std::size_t>(cold)].cover / cover;
  double incoming_zero = 1.0;
  double incoming_one = 1.0;

  // A feature already on the path is unwound and re-entered at this split.
  int index = 0;
  for (; index <= depth; ++index) {
    if (path[index].feature == n.feature) break;
  }
  if (index != depth + 1) {
    incoming_zero = path[index].zero_fraction;
    incoming_one = path[index].one_fraction;
    unwind_path(path, depth, index);
    depth -= 1;
  }

  recurse(ctx, hot, depth + 1, path, hot_zero * incoming_zero, incoming_one, n.feature);
  recurse(ctx, cold, depth + 1, path, cold_zero * incoming_zero, 0.0, n.feature);
}

}  // namespace

void tree_shap(const RegressionTree& tree, const double* x, std::span<double> phi, double scale) {
  if (tree.nodes.empty() || tree.nodes[0].is_leaf()) return;
  // Internal-node count bounds the depth, so no depth pass is needed.
  const std::size_t d = tree.nodes.size() / 2 + 2;
  thread_local std::vector<PathElement> buffer;
  if (buffer.size() < d * (d + 1) / 2 + d) buffer.resize(d * (d + 1) / 2 + d);
  ShapContext ctx{tree, x, phi, scale};
  recurse(ctx, 0, 0, buffer.data(), 1.0, 1.0, -1);
}

}  // namespace socialmuse
