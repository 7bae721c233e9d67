// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#include "socialmuse/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <string>

#include "socialmuse/error.hpp"

namespace socialmuse {

AlterPair::AlterPair(AlterId a, AlterId b) {
  if (a == b) {
    throw Error(ErrorCode::InvalidInput,
                "alter pair needs two distinct alters, got " + std::to_string(a.value) + " twice");
  }
  first_ = std::min(a, b);
  second_ = std::max(a, b);
}

std::vector<AlterPair> all_alter_pairs(int n_alters) {
  std::vector<AlterPair> pairs;
  for (int a = 0; a < n_alters; ++a) {
    for (int b = a + 1; b < n_alters; ++b) pairs.emplace_back(AlterId{a}, AlterId{b});
  }
  return pairs;
}

void BipartiteRound::validate() const {
  std::set<EgoId> seen;
  for (EgoId ego : arrival_order) {
    if (!seen.insert(ego).second) {
      throw Error(ErrorCode::InvalidInput,
                  "ego " + std::to_string(ego.value) + " appears twice in arrival order");
    }
    auto it = follows.find(ego);
    if (it == follows.end()) {
      throw Error(ErrorCode::InvalidInput, "ego " + std::to_string(ego.value) +
                                               " has no follow edges in round " +
                                               std::to_string(round_index));
    }
    if (it->second.first().value < 0 || it->second.second().value >= n_alters) {
      throw Error(ErrorCode::InvalidInput,
                  "ego " + std::to_string(ego.value) + " follows an unknown alter");
    }
  }
  if (follows.size() != arrival_order.size()) {
    throw Error(ErrorCode::InvalidInput, "follow edges reference egos missing from arrival order");
  }
}

std::vector<EgoId> BipartiteRound::prefix(EgoId upto) const {
  auto it = std::find(arrival_order.begin(), arrival_order.end(), upto);
  if (it == arrival_order.end()) {
    throw Error(ErrorCode::NotFound, "ego " + std::to_string(upto.value) +
                                         " not present in round " + std::to_string(round_index));
  }
  return {arrival_order.begin(), it + 1};
}

std::vector<int> BipartiteRound::follower_counts(std::span<const EgoId> egos) const {
  std::vector<int> counts(static_cast<std::size_t>(n_alters), 0);
  for (EgoId ego : egos) {
    const AlterPair& p = follows.at(ego);
    ++counts[static_cast<std::size_t>(p.first().value)];
    ++counts[static_cast<std::size_t>(p.second().value)];
  }
  return counts;
}

EgoProjection::EgoProjection(std::vector<EgoId> nodes, std::vector<int> weights)
    : nodes_(std::move(nodes)), weights_(std::move(weights)) {
  if (weights_.size() != nodes_.size() * nodes_.size()) {
    throw Error(ErrorCode::InvalidInput, "projection weight matrix has the wrong size");
  }
}

std::size_t EgoProjection::index_of(EgoId ego) const {
  auto it = std::find(nodes_.begin(), nodes_.end(), ego);
  if (it == nodes_.end()) {
    throw Error(ErrorCode::NotFound, "ego " + std::to_string(ego.value) + " not in projection");
  }
  return static_cast<std::size_t>(it - nodes_.begin());
}

int EgoProjection::weight(EgoId a, EgoId b) const {
  auto ia = std::find(nodes_.begin(), nodes_.end(), a);
  auto ib = std::find(nodes_.begin(), nodes_.end(), b);
  if (ia == nodes_.end() || ib == nodes_.end()) return 0;
  return weight(static_cast<std::size_t>(ia - nodes_.begin()),
                static_cast<std::size_t>(ib - nodes_.begin()));
}

int EgoProjection::degree(std::size_t i) const {
  int d = 0;
  for (std::size_t j = 0; j < size(); ++j) d += weight(i, j) > 0 ? 1 : 0;
  return d;
}

double EgoProjection::strength(std::size_t i) const {
  double s = 0;
  for (std::size_t j = 0; j < size(); ++j) s += weight(i, j);
  return s;
}

int EgoProjection::max_weight() const {
  return weights_.empty() ? 0 : *std::max_element(weights_.begin(), weights_.end());
}

std::size_t EgoProjection::edge_count() const {
  std::size_t m = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = i + 1; j < size(); ++j) m += weight(i, j) > 0 ? 1 : 0;
  }
  return m;
}

EgoProjection project_onto_egos(const BipartiteRound& round, EgoId upto_ego) {
  std::vector<EgoId> nodes = round.prefix(upto_ego);
  const std::size_t n = nodes.size();
  std::vector<int> w(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const AlterPair& pi = round.follows.at(nodes[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      const AlterPair& pj = round.follows.at(nodes[j]);
      int shared = (pj.contains(pi.first()) ? 1 : 0) + (pj.contains(pi.second()) ? 1 : 0);
      w[i * n + j] = shared;
      w[j * n + i] = shared;
    }
  }
  return EgoProjection(std::move(nodes), std::move(w));
}

FollowerShares FollowerShares::from_counts(std::span<const double> counts) {
  if (counts.empty()) throw Error(ErrorCode::InvalidInput, "follower shares need at least one alter");
  FollowerShares fs;
  fs.counts.assign(counts.begin(), counts.end());
  double total = 0;
  for (double c : counts) {
    if (c < 0) throw Error(ErrorCode::InvalidInput, "follower counts must be non-negative");
    total += c;
  }
  fs.shares.resize(counts.size(), 0.0);
  if (total > 0) {
    for (std::size_t i = 0; i < counts.size(); ++i) fs.shares[i] = counts[i] / total;
  }
  return fs;
}

FollowerShares FollowerShares::from_counts(std::span<const int> counts) {
  std::vector<double> c(counts.begin(), counts.end());
  return from_counts(std::span<const double>(c));
}

GiniResult gini_coefficient(const FollowerShares& fs) {
  const std::size_t s = fs.shares.size();
  if (s == 0) throw Error(ErrorCode::InvalidInput, "gini needs at least one alter");
  std::vector<double> m = fs.shares;
  const double total = std::accumulate(m.begin(), m.end(), 0.0);
  if (total <= 0) return {0.0, true};
  // Sorted ascending, sum_i sum_j |m_i - m_j| = 2 * sum_i (2i - S + 1) m_(i).
  std::sort(m.begin(), m.end());
  double acc = 0;
  for (std::size_t i = 0; i < s; ++i) {
    acc += (2.0 * static_cast<double>(i) - static_cast<double>(s) + 1.0) * m[i];
  }
  const double g = 2.0 * acc / (2.0 * static_cast<double>(s) * total);
  return {std::clamp(g, 0.0, 1.0), false};
}

std::vector<int> triangle_counts(const EgoProjection& g) {
  const std::size_t n = g.size();
  std::vector<int> t(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (g.weight(i, j) == 0) continue;
      for (std::size_t k = j + 1; k < n; ++k) {
        if (g.weight(i, k) > 0 && g.weight(j, k) > 0) {
          ++t[i];
          ++t[j];
          ++t[k];
        }
      }
    }
  }
  return t;
}

std::vector<double> weighted_local_clustering(const EgoProjection& g) {
  const std::size_t n = g.size();
  std::vector<double> c(n, 0.0);
  const double wmax = g.max_weight();
  if (wmax <= 0) return c;
  for (std::size_t i = 0; i < n; ++i) {
    const int d = g.degree(i);
    if (d < 2) continue;
    double acc = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || g.weight(i, j) == 0) continue;
      for (std::size_t k = j + 1; k < n; ++k) {
        if (k == i || g.weight(i, k) == 0 || g.weight(j, k) == 0) continue;
        acc += std::cbrt((g.weight(i, j) / wmax) * (g.weight(i, k) / wmax) * (g.weight(j, k) / wmax));
      }
    }
    c[i] = 2.0 * acc / (static_cast<double>(d) * (d - 1));
  }
  return c;
}

double average_weighted_clustering(const EgoProjection& g) {
  if (g.size() == 0) return 0.0;
  auto c = weighted_local_clustering(g);
  return std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
}

double transitivity(const EgoProjection& g) {
  auto t = triangle_counts(g);
  double closed = 0, triads = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = g.degree(i);
    closed += t[i];
    triads += d * (d - 1) / 2.0;
  }
  // closed counts every triangle three times, once per corner.
  return triads > 0 ? closed / triads : 0.0;
}

std::vector<double> degree_centrality(const EgoProjection& g) {
  const std::size_t n = g.size();
  std::vector<double> dc(n, 0.0);
  if (n < 2) return dc;
  for (std::size_t i = 0; i < n; ++i) dc[i] = g.strength(i) / (2.0 * static_cast<double>(n - 1));
  return dc;
}

namespace {

constexpr double kPathEps = 1e-12;

double distance(const EgoProjection& g, std::size_t i, std::size_t j) {
  return 1.0 / static_cast<double>(g.weight(i, j));
}

struct ShortestPaths {
  std::vector<double> dist;
  std::vector<double> sigma;
  std::vector<std::vector<std::size_t>> preds;
  std::vector<std::size_t> order;  // settled order, non-decreasing distance
};

ShortestPaths dijkstra(const EgoProjection& g, std::size_t source) {
  const std::size_t n = g.size();
  ShortestPaths sp;
  sp.dist.assign(n, std::numeric_limits<double>::infinity());
  sp.sigma.assign(n, 0.0);
  sp.preds.assign(n, {});
  std::vector<bool> done(n, false);
  sp.dist[source] = 0;
  sp.sigma[source] = 1;
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  pq.emplace(0.0, source);
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (done[u]) continue;
    done[u] = true;
    sp.order.push_back(u);
    for (std::size_t v = 0; v < n; ++v) {
      if (v == u || g.weight(u, v) == 0 || done[v]) continue;
      const double nd = d + distance(g, u, v);
      if (nd < sp.dist[v] - kPathEps) {
        sp.dist[v] = nd;
        sp.sigma[v] = sp.sigma[u];
        sp.preds[v] = {u};
        pq.emplace(nd, v);
      } else if (std::abs(nd - sp.dist[v]) <= kPathEps) {
        sp.sigma[v] += sp.sigma[u];
        sp.preds[v].push_back(u);
      }
    }
  }
  return sp;
}

std::vector<std::size_t> component_of(const EgoProjection& g, std::size_t start) {
  std::vector<bool> seen(g.size(), false);
  std::vector<std::size_t> comp{start};
  seen[start] = true;
  for (std::size_t head = 0; head < comp.size(); ++head) {
    const std::size_t u = comp[head];
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (!seen[v] && g.weight(u, v) > 0) {
        seen[v] = true;
        comp.push_back(v);
      }
    }
  }
  std::sort(comp.begin(), comp.end());
  return comp;
}

}  // namespace

std::vector<double> betweenness_centrality(const EgoProjection& g) {
  const std::size_t n = g.size();
  std::vector<double> bc(n, 0.0);
  if (n < 3) return bc;
  // Brandes accumulation over weighted shortest paths.
  for (std::size_t s = 0; s < n; ++s) {
    ShortestPaths sp = dijkstra(g, s);
    std::vector<double> delta(n, 0.0);
    for (auto it = sp.order.rbegin(); it != sp.order.rend(); ++it) {
      const std::size_t w = *it;
      for (std::size_t v : sp.preds[w]) delta[v] += sp.sigma[v] / sp.sigma[w] * (1.0 + delta[w]);
      if (w != s) bc[w] += delta[w];
    }
  }
  // Each unordered pair was counted from both endpoints.
  const double scale = 1.0 / (static_cast<double>(n - 1) * static_cast<double>(n - 2));
  for (double& b : bc) b *= scale;
  return bc;
}

std::vector<double> harmonic_closeness(const EgoProjection& g) {
  const std::size_t n = g.size();
  std::vector<double> hc(n, 0.0);
  if (n < 2) return hc;
  for (std::size_t s = 0; s < n; ++s) {
    ShortestPaths sp = dijkstra(g, s);
    double acc = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (v != s && std::isfinite(sp.dist[v])) acc += 1.0 / sp.dist[v];
    }
    hc[s] = acc / static_cast<double>(n - 1);
  }
  return hc;
}

std::vector<double> eigenvector_centrality(const EgoProjection& g, std::size_t focal) {
  std::vector<double> ev(g.size(), 0.0);
  if (focal >= g.size()) throw Error(ErrorCode::NotFound, "focal node outside projection");
  const auto comp = component_of(g, focal);
  if (comp.size() < 2) return ev;
  const std::size_t m = comp.size();
  std::vector<double> x(m, 1.0 / std::sqrt(static_cast<double>(m))), y(m);
  // Power iteration on (A + I): same eigenvectors, no oscillation on
  // bipartite components.
  for (int iter = 0; iter < 1000; ++iter) {
    for (std::size_t a = 0; a < m; ++a) {
      double acc = x[a];
      for (std::size_t b = 0; b < m; ++b) acc += g.weight(comp[a], comp[b]) * x[b];
      y[a] = acc;
    }
    double norm = 0;
    for (double v : y) norm += v * v;
    norm = std::sqrt(norm);
    double change = 0;
    for (std::size_t a = 0; a < m; ++a) {
      y[a] /= norm;
      change += std::abs(y[a] - x[a]);
    }
    x.swap(y);
    if (change < 1e-13 * static_cast<double>(m)) break;
  }
  for (std::size_t a = 0; a < m; ++a) ev[comp[a]] = x[a];
  return ev;
}

std::vector<double> pagerank(const EgoProjection& g, double damping, double tolerance,
                             int max_iterations) {
  const std::size_t n = g.size();
  if (n == 0) return {};
  const double nn = static_cast<double>(n);
  std::vector<double> strength(n);
  for (std::size_t i = 0; i < n; ++i) strength[i] = g.strength(i);
  std::vector<double> x(n, 1.0 / nn), next(n);
  for (int iter = 0; iter < max_iterations; ++iter) {
    double dangling = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (strength[i] == 0) dangling += x[i];
    }
    for (std::size_t j = 0; j < n; ++j) {
      double inflow = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (strength[i] > 0 && g.weight(i, j) > 0) inflow += x[i] * g.weight(i, j) / strength[i];
      }
      next[j] = (1.0 - damping) / nn + damping * (inflow + dangling / nn);
    }
    double change = 0;
    for (std::size_t j = 0; j < n; ++j) change += std::abs(next[j] - x[j]);
    x.swap(next);
    if (change < tolerance) break;
  }
  // Renormalize away accumulated rounding.
  const double total = std::accumulate(x.begin(), x.end(), 0.0);
  for (double& v : x) v /= total;
  return x;
}

std::vector<double> average_neighbor_degree(const EgoProjection& g) {
  const std::size_t n = g.size();
  std::vector<double> knn(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = g.strength(i);
    if (s == 0) continue;
    double acc = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && g.weight(i, j) > 0) acc += g.weight(i, j) * g.degree(j);
    }
    knn[i] = acc / s;
  }
  return knn;
}

const std::array<std::string_view, NetworkFeatureBlock::kSize>& NetworkFeatureBlock::names() {
  static const std::array<std::string_view, kSize> kNames = {
      "network_size", "gini",        "global_clustering", "transitivity",
      "local_clustering", "degree_centrality", "betweenness", "eigenvector",
      "closeness",    "pagerank",    "avg_neighbor_degree", "triangle_count"};
  return kNames;
}

std::array<double, NetworkFeatureBlock::kSize> NetworkFeatureBlock::to_array() const {
  return {network_size, gini,        global_clustering, transitivity,
          local_clustering, degree_centrality, betweenness, eigenvector,
          closeness,    pagerank,    avg_neighbor_degree, triangle_count};
}

NetworkFeatureBlock structural_features(const BipartiteRound& round, EgoId focal_ego) {
  const EgoProjection g = project_onto_egos(round, focal_ego);
  const std::size_t f = g.size() - 1;  // the focal ego closes the prefix

  NetworkFeatureBlock out;
  out.network_size = static_cast<double>(g.size());
  auto counts = round.follower_counts(g.nodes());
  out.gini = gini_coefficient(FollowerShares::from_counts(std::span<const int>(counts))).value;
  if (g.size() < 2) return out;

  out.global_clustering = average_weighted_clustering(g);
  out.transitivity = transitivity(g);
  out.local_clustering = weighted_local_clustering(g)[f];
  out.degree_centrality = degree_centrality(g)[f];
  out.betweenness = betweenness_centrality(g)[f];
  out.eigenvector = eigenvector_centrality(g, f)[f];
  out.closeness = harmonic_closeness(g)[f];
  out.pagerank = pagerank(g)[f];
  out.avg_neighbor_degree = average_neighbor_degree(g)[f];
  out.triangle_count = triangle_counts(g)[f];
  return out;
}

}  // namespace socialmuse
