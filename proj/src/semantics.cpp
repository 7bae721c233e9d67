// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#include "socialmuse/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "socialmuse/error.hpp"
#include "socialmuse/io.hpp"

namespace socialmuse {

// ---------------------------------------------------------------------------
// EmbeddingTable

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path, std::string name) {
  EmbeddingTable table(std::move(name), 0);
  auto lines = io::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::istringstream ss(lines[i]);
    std::string token;
    ss >> token;
    std::vector<double> vec;
    double v;
    while (ss >> v) vec.push_back(v);
    if (!ss.eof() || vec.empty()) {
      throw Error(ErrorCode::Schema,
                  path.string() + ":" + std::to_string(i + 1) + ": malformed embedding line");
    }
    if (table.dim_ == 0) table.dim_ = vec.size();
    if (vec.size() != table.dim_) {
      throw Error(ErrorCode::Schema, path.string() + ":" + std::to_string(i + 1) +
                                         ": expected " + std::to_string(table.dim_) +
                                         " components");
    }
    table.add(std::move(token), std::move(vec));
  }
  if (table.size() == 0) throw Error(ErrorCode::Schema, path.string() + ": no embeddings");
  return table;
}

void EmbeddingTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (const auto& token : order_) {
    out << token;
    for (double v : vectors_.at(token)) out << ' ' << io::format_double(v);
    out << '\n';
  }
}

void EmbeddingTable::add(std::string token, std::vector<double> vec) {
  if (dim_ == 0) dim_ = vec.size();
  if (vec.size() != dim_) {
    throw Error(ErrorCode::InvalidInput, "embedding for '" + token + "' has wrong dimension");
  }
  std::transform(token.begin(), token.end(), token.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  auto [it, inserted] = vectors_.try_emplace(token, std::move(vec));
  if (!inserted) throw Error(ErrorCode::InvalidInput, "duplicate embedding token '" + token + "'");
  order_.push_back(it->first);
}

const std::vector<double>* EmbeddingTable::find(std::string_view token) const {
  auto it = vectors_.find(std::string(token));
  return it == vectors_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Taxonomy

Taxonomy Taxonomy::from_edges(const std::vector<std::pair<std::string, std::string>>& edges,
                              const std::vector<std::string>& extra_concepts) {
  Taxonomy t;
  auto intern = [&t](const std::string& id) {
    auto [it, inserted] = t.index_.try_emplace(id, t.ids_.size());
    if (inserted) {
      t.ids_.push_back(id);
      t.parents_.emplace_back();
    }
    return it->second;
  };
  for (const auto& id : extra_concepts) intern(id);
  for (const auto& [child, parent] : edges) {
    if (child == kRootId || parent == kRootId) {
      throw Error(ErrorCode::InvalidInput, "concept id '" + std::string(kRootId) + "' is reserved");
    }
    const std::size_t c = intern(child);
    const std::size_t p = intern(parent);
    if (c == p) throw Error(ErrorCode::InvalidInput, "concept '" + child + "' is its own parent");
    auto& ps = t.parents_[c];
    if (std::find(ps.begin(), ps.end(), p) == ps.end()) ps.push_back(p);
  }
  t.root_ = intern(std::string(kRootId));
  for (std::size_t c = 0; c < t.ids_.size(); ++c) {
    if (c != t.root_ && t.parents_[c].empty()) t.parents_[c].push_back(t.root_);
  }
  t.finalize();
  return t;
}

void Taxonomy::finalize() {
  const std::size_t n = ids_.size();
  ancestors_.assign(n, {});
  enum class Mark : std::uint8_t { White, Grey, Black };
  std::vector<Mark> mark(n, Mark::White);

  // Iterative DFS over parent links; ancestor sets are built children-last.
  for (std::size_t start = 0; start < n; ++start) {
    if (mark[start] != Mark::White) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{start, 0}};
    mark[start] = Mark::Grey;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < parents_[node].size()) {
        const std::size_t p = parents_[node][next++];
        if (mark[p] == Mark::Grey) {
          throw Error(ErrorCode::InvalidInput, "taxonomy has a cycle through '" + ids_[p] + "'");
        }
        if (mark[p] == Mark::White) {
          mark[p] = Mark::Grey;
          stack.emplace_back(p, 0);
        }
        continue;
      }
      std::vector<std::size_t> anc{node};
      for (std::size_t p : parents_[node]) {
        anc.insert(anc.end(), ancestors_[p].begin(), ancestors_[p].end());
      }
      std::sort(anc.begin(), anc.end());
      anc.erase(std::unique(anc.begin(), anc.end()), anc.end());
      ancestors_[node] = std::move(anc);
      mark[node] = Mark::Black;
      stack.pop_back();
    }
  }

  hyponyms_.assign(n, 0);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t a : ancestors_[c]) {
      if (a != c) ++hyponyms_[a];
    }
  }
  ic_.assign(n, 0.0);
  const double log_w = std::log(static_cast<double>(n));
  for (std::size_t c = 0; c < n; ++c) {
    ic_[c] = n >= 2 ? 1.0 - std::log(hyponyms_[c] + 1.0) / log_w : 0.0;
  }
}

Taxonomy Taxonomy::load(const std::filesystem::path& edges_path,
                        const std::filesystem::path& lexicon_path) {
  auto parse_tsv = [](const std::filesystem::path& path) {
    std::vector<std::pair<std::string, std::string>> rows;
    auto lines = io::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (lines[i].empty() || lines[i][0] == '#') continue;
      auto tab = lines[i].find('\t');
      if (tab == std::string::npos || tab == 0 || tab + 1 == lines[i].size() ||
          lines[i].find('\t', tab + 1) != std::string::npos) {
        throw Error(ErrorCode::Schema,
                    path.string() + ":" + std::to_string(i + 1) + ": expected two tab-separated fields");
      }
      rows.emplace_back(lines[i].substr(0, tab), lines[i].substr(tab + 1));
    }
    return rows;
  };
  auto edges = parse_tsv(edges_path);
  auto lexicon = parse_tsv(lexicon_path);
  std::vector<std::string> lexicon_concepts;
  for (const auto& [token, concept_id] : lexicon) lexicon_concepts.push_back(concept_id);
  // Lexicon concepts absent from the edge file become children of the root.
  Taxonomy t = from_edges(edges, lexicon_concepts);
  for (const auto& [token, concept_id] : lexicon) t.add_lexicon_entry(token, concept_id);
  return t;
}

void Taxonomy::save(const std::filesystem::path& edges_path,
                    const std::filesystem::path& lexicon_path) const {
  std::ofstream edges(edges_path, std::ios::trunc);
  std::ofstream lex(lexicon_path, std::ios::trunc);
  if (!edges || !lex) throw Error(ErrorCode::Io, "cannot write taxonomy files");
  for (std::size_t c = 0; c < ids_.size(); ++c) {
    for (std::size_t p : parents_[c]) {
      if (p != root_) edges << ids_[c] << '\t' << ids_[p] << '\n';
    }
  }
  for (const auto& token : token_list_) {
    for (std::size_t c : lexicon_.at(token)) lex << token << '\t' << ids_[c] << '\n';
  }
}

void Taxonomy::add_lexicon_entry(const std::string& token, const std::string& concept_id) {
  const std::size_t c = require(concept_id);
  std::string key = token;
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  auto [it, inserted] = lexicon_.try_emplace(key);
  if (inserted) {
    token_list_.insert(std::lower_bound(token_list_.begin(), token_list_.end(), key), key);
  }
  if (std::find(it->second.begin(), it->second.end(), c) == it->second.end()) {
    it->second.push_back(c);
  }
}

std::optional<std::size_t> Taxonomy::index_of(std::string_view concept_id) const {
  auto it = index_.find(std::string(concept_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Taxonomy::require(std::string_view concept_id) const {
  auto idx = index_of(concept_id);
  if (!idx) throw Error(ErrorCode::NotFound, "unknown concept '" + std::string(concept_id) + "'");
  return *idx;
}

const std::vector<std::size_t>& Taxonomy::concepts_for_token(std::string_view token) const {
  static const std::vector<std::size_t> kNone;
  auto it = lexicon_.find(std::string(token));
  return it == lexicon_.end() ? kNone : it->second;
}

bool Taxonomy::has_token(std::string_view token) const {
  return lexicon_.count(std::string(token)) > 0;
}

// ---------------------------------------------------------------------------
// Information content and similarity

namespace {

void require_nontrivial(const Taxonomy& t) {
  if (t.concept_count() < 2) {
    throw Error(ErrorCode::InvalidInput, "information content needs at least two concepts");
  }
}

double msca_by_index(const Taxonomy& t, std::size_t a, std::size_t b) {
  const auto& sa = t.subsumers(a);
  const auto& sb = t.subsumers(b);
  double best = 0.0;  // the virtual root is always shared and has I = 0
  std::size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    if (sa[i] < sb[j]) {
      ++i;
    } else if (sb[j] < sa[i]) {
      ++j;
    } else {
      best = std::max(best, t.information_content(sa[i]));
      ++i;
      ++j;
    }
  }
  return best;
}

double similarity_by_index(const Taxonomy& t, std::size_t a, std::size_t b) {
  return similarity_from_contents(t.information_content(a), t.information_content(b),
                                  msca_by_index(t, a, b));
}

}  // namespace

double information_content(const Taxonomy& taxonomy, std::string_view concept_id) {
  require_nontrivial(taxonomy);
  return taxonomy.information_content(taxonomy.require(concept_id));
}

double msca_similarity(const Taxonomy& taxonomy, std::string_view c1, std::string_view c2) {
  require_nontrivial(taxonomy);
  return msca_by_index(taxonomy, taxonomy.require(c1), taxonomy.require(c2));
}

double pair_similarity(const Taxonomy& taxonomy, std::string_view c1, std::string_view c2) {
  require_nontrivial(taxonomy);
  return similarity_by_index(taxonomy, taxonomy.require(c1), taxonomy.require(c2));
}

double similarity_from_contents(double ic1, double ic2, double msca) {
  return 1.0 - (ic1 + ic2 - 2.0 * msca) / 2.0;
}

// ---------------------------------------------------------------------------
// Creativity quotient

double max_spanning_tree_weight(const SimilarityMatrix& sim) {
  const std::size_t n = sim.n;
  if (n < 2) return 0.0;
  struct Edge {
    double w;
    std::size_t a, b;
  };
  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({sim.at(i, j), i, j});
  }
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) { return x.w > y.w; });

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  double total = 0;
  std::size_t used = 0;
  for (const Edge& e : edges) {
    const std::size_t ra = find(e.a), rb = find(e.b);
    if (ra == rb) continue;
    parent[ra] = rb;
    total += e.w;
    if (++used == n - 1) break;
  }
  return total;
}

IdeaSetScore creativity_quotient(const SimilarityMatrix& sim) {
  IdeaSetScore s;
  s.concept_count = sim.n;
  s.multi_information = max_spanning_tree_weight(sim);
  s.quotient = static_cast<double>(sim.n) - s.multi_information;
  return s;
}

IdeaSetScore creativity_quotient(const Taxonomy& taxonomy, std::span<const std::size_t> concepts) {
  std::vector<std::size_t> distinct(concepts.begin(), concepts.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.empty()) return {};
  require_nontrivial(taxonomy);
  SimilarityMatrix sim{distinct.size(), std::vector<double>(distinct.size() * distinct.size(), 1.0)};
  for (std::size_t i = 0; i < sim.n; ++i) {
    for (std::size_t j = i + 1; j < sim.n; ++j) {
      const double s = similarity_by_index(taxonomy, distinct[i], distinct[j]);
      sim.values[i * sim.n + j] = s;
      sim.values[j * sim.n + i] = s;
    }
  }
  return creativity_quotient(sim);
}

IdeaSetScore creativity_quotient(const Taxonomy& taxonomy, std::span<const std::string> concepts) {
  std::vector<std::size_t> idx;
  idx.reserve(concepts.size());
  for (const auto& c : concepts) idx.push_back(taxonomy.require(c));
  return creativity_quotient(taxonomy, std::span<const std::size_t>(idx));
}

// ---------------------------------------------------------------------------
// Document distances

std::string_view to_string(DistanceMethod method) {
  switch (method) {
    case DistanceMethod::CosineA: return "cosine_a";
    case DistanceMethod::WmdA: return "wmd_a";
    case DistanceMethod::CosineB: return "cosine_b";
  }
  return "?";
}

namespace {

struct Bag {
  std::vector<const std::vector<double>*> vectors;  // unique tokens
  std::vector<long long> counts;
  long long total = 0;
};

Bag make_bag(const EmbeddingTable& table, const Document& doc) {
  std::map<std::string_view, long long> counts;
  for (const auto& token : doc) {
    if (table.find(token)) ++counts[token];
  }
  Bag bag;
  for (const auto& [token, count] : counts) {
    bag.vectors.push_back(table.find(token));
    bag.counts.push_back(count);
    bag.total += count;
  }
  return bag;
}

void require_vocabulary(const Bag& a, const Bag& b) {
  if (a.total == 0 || b.total == 0) {
    throw Error(ErrorCode::MissingVocabulary, "document has no in-vocabulary tokens");
  }
}

std::vector<double> mean_vector(const Bag& bag, std::size_t dim) {
  std::vector<double> mean(dim, 0.0);
  for (std::size_t i = 0; i < bag.vectors.size(); ++i) {
    for (std::size_t d = 0; d < dim; ++d) mean[d] += bag.counts[i] * (*bag.vectors[i])[d];
  }
  for (double& v : mean) v /= static_cast<double>(bag.total);
  return mean;
}

double euclidean(const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0;
  for (std::size_t d = 0; d < x.size(); ++d) acc += (x[d] - y[d]) * (x[d] - y[d]);
  return std::sqrt(acc);
}

/// Successive-shortest-path min-cost flow on the transportation network
/// source -> supply nodes -> demand nodes -> sink, with dense residuals.
double transport_cost(const std::vector<long long>& supply, const std::vector<long long>& demand,
                      const std::vector<double>& cost /* supply x demand */) {
  const std::size_t u = supply.size(), v = demand.size();
  const std::size_t n = u + v + 2, src = u + v, snk = u + v + 1;
  std::vector<long long> cap(n * n, 0);
  std::vector<double> w(n * n, 0.0);
  constexpr long long kInf = std::numeric_limits<long long>::max() / 4;
  for (std::size_t i = 0; i < u; ++i) cap[src * n + i] = supply[i];
  for (std::size_t j = 0; j < v; ++j) cap[(u + j) * n + snk] = demand[j];
  for (std::size_t i = 0; i < u; ++i) {
    for (std::size_t j = 0; j < v; ++j) {
      cap[i * n + u + j] = kInf;
      w[i * n + u + j] = cost[i * v + j];
      w[(u + j) * n + i] = -cost[i * v + j];
    }
  }
  long long remaining = std::accumulate(supply.begin(), supply.end(), 0LL);
  std::vector<double> potential(n, 0.0), dist(n);
  std::vector<std::size_t> prev(n);
  std::vector<bool> done(n);
  double total = 0;
  while (remaining > 0) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::fill(done.begin(), done.end(), false);
    dist[src] = 0;
    for (std::size_t iter = 0; iter < n; ++iter) {
      std::size_t best = n;
      for (std::size_t x = 0; x < n; ++x) {
        if (!done[x] && std::isfinite(dist[x]) && (best == n || dist[x] < dist[best])) best = x;
      }
      if (best == n) break;
      done[best] = true;
      for (std::size_t y = 0; y < n; ++y) {
        if (done[y] || cap[best * n + y] <= 0) continue;
        const double reduced = std::max(0.0, w[best * n + y] + potential[best] - potential[y]);
        if (dist[best] + reduced < dist[y]) {
          dist[y] = dist[best] + reduced;
          prev[y] = best;
        }
      }
    }
    if (!std::isfinite(dist[snk])) throw Error(ErrorCode::Internal, "transport problem infeasible");
    for (std::size_t x = 0; x < n; ++x) {
      if (std::isfinite(dist[x])) potential[x] += dist[x];
    }
    long long push = remaining;
    for (std::size_t y = snk; y != src; y = prev[y]) push = std::min(push, cap[prev[y] * n + y]);
    for (std::size_t y = snk; y != src; y = prev[y]) {
      cap[prev[y] * n + y] -= push;
      cap[y * n + prev[y]] += push;
      total += static_cast<double>(push) * w[prev[y] * n + y];
    }
    remaining -= push;
  }
  return total;
}

}  // namespace

double cosine_distance(const EmbeddingTable& table, const Document& a, const Document& b) {
  const Bag ba = make_bag(table, a), bb = make_bag(table, b);
  require_vocabulary(ba, bb);
  const auto ma = mean_vector(ba, table.dim()), mb = mean_vector(bb, table.dim());
  double dot = 0, na = 0, nb = 0;
  for (std::size_t d = 0; d < table.dim(); ++d) {
    dot += ma[d] * mb[d];
    na += ma[d] * ma[d];
    nb += mb[d] * mb[d];
  }
  if (na == 0 && nb == 0) return 0.0;
  if (na == 0 || nb == 0) return 1.0;
  return std::clamp(1.0 - dot / std::sqrt(na * nb), 0.0, 2.0);
}

double word_movers_distance(const EmbeddingTable& table, const Document& a, const Document& b) {
  const Bag ba = make_bag(table, a), bb = make_bag(table, b);
  require_vocabulary(ba, bb);
  // Integer masses: token i carries count_i * |b| units, token j absorbs count_j * |a|.
  std::vector<long long> supply, demand;
  for (long long c : ba.counts) supply.push_back(c * bb.total);
  for (long long c : bb.counts) demand.push_back(c * ba.total);
  std::vector<double> cost(ba.vectors.size() * bb.vectors.size());
  for (std::size_t i = 0; i < ba.vectors.size(); ++i) {
    for (std::size_t j = 0; j < bb.vectors.size(); ++j) {
      cost[i * bb.vectors.size() + j] = euclidean(*ba.vectors[i], *bb.vectors[j]);
    }
  }
  const double units = static_cast<double>(ba.total) * static_cast<double>(bb.total);
  return std::max(0.0, transport_cost(supply, demand, cost) / units);
}

double doc_distance(DistanceMethod method, const EmbeddingTable& table_a,
                    const EmbeddingTable& table_b, const Document& a, const Document& b) {
  switch (method) {
    case DistanceMethod::CosineA: return cosine_distance(table_a, a, b);
    case DistanceMethod::WmdA: return word_movers_distance(table_a, a, b);
    case DistanceMethod::CosineB: return cosine_distance(table_b, a, b);
  }
  throw Error(ErrorCode::InvalidInput, "unknown distance method");
}

std::optional<double> try_doc_distance(DistanceMethod method, const EmbeddingTable& table_a,
                                       const EmbeddingTable& table_b, const Document& a,
                                       const Document& b) {
  try {
    return doc_distance(method, table_a, table_b, a, b);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MissingVocabulary) return std::nullopt;
    throw;
  }
}

}  // namespace socialmuse
