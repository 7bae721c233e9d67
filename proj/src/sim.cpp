// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#include "socialmuse/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "socialmuse/error.hpp"
#include "socialmuse/metrics.hpp"

namespace socialmuse {

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream domains; the condition is deliberately absent so both arms of a
// trial draw identical numbers for identical decisions.
enum Domain : std::uint64_t {
  kWorldDomain = 1,
  kUniverseDomain,
  kAlterProfileDomain,
  kAlterIdeaDomain,
  kEgoProfileDomain,
  kEgoRoundDomain,
  kArrivalDomain,
  kGenderDomain,
  kAdherenceDomain,
};

enum Stage : std::uint64_t { kAttempt1 = 1, kAttempt2, kRating };

double uniform(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform(rng); }

double normal(std::mt19937_64& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

/// Weighted sampling of k distinct items (Efraimidis-Spirakis keys).
std::vector<std::size_t> sample_without_replacement(std::span<const double> weights, std::size_t k,
                                                    std::mt19937_64& rng) {
  std::vector<std::pair<double, std::size_t>> keys;
  keys.reserve(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double u = std::max(uniform(rng), 1e-300);
    if (weights[i] > 0) keys.emplace_back(std::log(u) / weights[i], i);
  }
  k = std::min(k, keys.size());
  std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(k), keys.end(),
                    [](const auto& a, const auto& b) {
                      return a.first > b.first || (a.first == b.first && a.second < b.second);
                    });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(keys[i].second);
  return out;
}

std::size_t weighted_pick(std::span<const double> weights, std::mt19937_64& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = uniform(rng) * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    u -= weights[i];
    if (u < 0) return i;
  }
  return weights.size() - 1;
}

int idea_count(double mean, std::mt19937_64& rng) {
  return std::max(1, std::poisson_distribution<int>(mean)(rng));
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidConfig, what);
}

}  // namespace

std::mt19937_64 rng_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix(seed);
  for (std::uint64_t k : keys) h = splitmix(h ^ splitmix(k + 0x632be59bd9b4e019ULL));
  return std::mt19937_64(h);
}

// ------------------------------------------------------------------ config

std::vector<Hyperparams> ModelConfig::resolved_grid() const {
  if (!explicit_grid.empty()) return explicit_grid;
  if (grid == "reference") return reference_grid();
  if (grid == "default") {
    std::vector<Hyperparams> out;
    for (double lr : {0.05, 0.1})
      for (int depth : {3, 5}) out.push_back({100, lr, depth, 0.75, 0.75, 25});
    return out;
  }
  throw Error(ErrorCode::InvalidConfig, "model.grid must be 'default', 'reference' or a list");
}

void SimConfig::validate() const {
  require(trials >= 0, "trials must be >= 0");
  require(rounds >= 0, "rounds must be >= 0");
  require(n_alters >= 2, "n_alters must be >= 2");
  require(n_egos >= 1, "n_egos must be >= 1");
  require(adherence >= 0.0 && adherence <= 1.0, "adherence must lie in [0,1]");
  require(concentration >= 0.0, "concentration must be >= 0");
  require(bootstrap_trials >= 0, "bootstrap_trials must be >= 0");
  require(bootstrap_rounds >= 0, "bootstrap_rounds must be >= 0");
  require(!world.branching.empty(), "world.branching must not be empty");
  for (int b : world.branching) require(b >= 1, "world.branching entries must be >= 1");
  require(world.dim >= 1, "world.dim must be >= 1");
  require(universe.bins >= 2, "universe.bins must be >= 2");
  require(universe.neighbors >= 1 && universe.neighbors < universe.bins,
          "universe.neighbors must lie in [1, bins)");
  require(universe.zipf_alpha >= 0.0, "universe.zipf_alpha must be >= 0");
  require(universe.second_concept_prob >= 0.0 && universe.second_concept_prob <= 1.0,
          "universe.second_concept_prob must lie in [0,1]");
  const auto& a = agents;
  require(a.ego_fluency_min >= 0 && a.ego_fluency_min <= a.ego_fluency_max, "ego fluency range invalid");
  require(a.alter_fluency_min >= 0 && a.alter_fluency_min <= a.alter_fluency_max,
          "alter fluency range invalid");
  require(a.ego_temperature_min > 0 && a.ego_temperature_min <= a.ego_temperature_max,
          "ego temperature range invalid");
  require(a.alter_temperature_min > 0 && a.alter_temperature_min <= a.alter_temperature_max,
          "alter temperature range invalid");
  require(a.inspiration_min >= 0 && a.inspiration_min <= a.inspiration_max && a.inspiration_max <= 1,
          "inspiration range invalid");
  require(a.rating_noise >= 0, "rating_noise must be >= 0");
  require(model.folds >= 2, "model.folds must be >= 2");
  require(model.test_ratio >= 0 && model.test_ratio < 1, "model.test_ratio must lie in [0,1)");
  (void)model.resolved_grid();
}

namespace {

io::Json params_to_json(const Hyperparams& p) {
  return {{"n_estimators", p.n_estimators}, {"learning_rate", p.learning_rate},
          {"max_depth", p.max_depth},       {"subsample", p.subsample},
          {"colsample_bytree", p.colsample_bytree}, {"max_leaves", p.max_leaves}};
}

// Reads known keys of `j` into the target; unknown keys are an error.
class Reader {
 public:
  Reader(const io::Json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j.is_object()) {
      throw Error(ErrorCode::InvalidConfig, (prefix_.empty() ? "config" : prefix_) + " must be an object");
    }
  }
  template <class T>
  Reader& get(const char* key, T& out) {
    seen_.push_back(key);
    if (auto it = j_.find(key); it != j_.end()) {
      try {
        out = it->template get<T>();
      } catch (const io::Json::exception&) {
        throw Error(ErrorCode::InvalidConfig, "config field '" + name(key) + "' has the wrong type");
      }
    }
    return *this;
  }
  const io::Json* sub(const char* key) {
    seen_.push_back(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
        throw Error(ErrorCode::InvalidConfig, "unknown config field '" + name(it.key()) + "'");
      }
    }
  }
  std::string name(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

 private:
  const io::Json& j_;
  std::string prefix_;
  std::vector<std::string> seen_;
};

Hyperparams params_from_json(const io::Json& j, const std::string& where) {
  Hyperparams p;
  Reader r(j, where);
  r.get("n_estimators", p.n_estimators).get("learning_rate", p.learning_rate)
      .get("max_depth", p.max_depth).get("subsample", p.subsample)
      .get("colsample_bytree", p.colsample_bytree).get("max_leaves", p.max_leaves);
  r.finish();
  return p;
}

}  // namespace

io::Json ModelConfig::to_json() const {
  io::Json grid_json;
  if (explicit_grid.empty()) {
    grid_json = grid;
  } else {
    grid_json = io::Json::array();
    for (const auto& p : explicit_grid) grid_json.push_back(params_to_json(p));
  }
  return {{"grid", grid_json},
          {"rfe_params", params_to_json(rfe_params)},
          {"rfe", rfe},
          {"folds", folds},
          {"test_ratio", test_ratio}};
}

ModelConfig ModelConfig::from_json(const io::Json& j, const std::string& where) {
  ModelConfig c;
  Reader s(j, where);
  if (const auto* g = s.sub("grid")) {
    if (g->is_string()) {
      c.grid = g->get<std::string>();
    } else if (g->is_array()) {
      for (const auto& p : *g) c.explicit_grid.push_back(params_from_json(p, s.name("grid[]")));
    } else {
      throw Error(ErrorCode::InvalidConfig, s.name("grid") + " must be a string or a list");
    }
  }
  if (const auto* p = s.sub("rfe_params")) c.rfe_params = params_from_json(*p, s.name("rfe_params"));
  s.get("rfe", c.rfe).get("folds", c.folds).get("test_ratio", c.test_ratio);
  s.finish();
  return c;
}

io::Json SimConfig::to_json() const {
  return {
      {"seed", seed},
      {"trials", trials},
      {"rounds", rounds},
      {"n_alters", n_alters},
      {"n_egos", n_egos},
      {"adherence", adherence},
      {"concentration", concentration},
      {"bootstrap_trials", bootstrap_trials},
      {"bootstrap_rounds", bootstrap_rounds},
      {"treatment", treatment},
      {"world",
       {{"branching", world.branching},
        {"dim", world.dim},
        {"top_spread", world.top_spread},
        {"mid_spread", world.mid_spread},
        {"leaf_spread", world.leaf_spread},
        {"table_b_noise", world.table_b_noise}}},
      {"universe",
       {{"bins", universe.bins},
        {"zipf_alpha", universe.zipf_alpha},
        {"neighbors", universe.neighbors},
        {"position_noise", universe.position_noise},
        {"second_concept_prob", universe.second_concept_prob}}},
      {"agents",
       {{"ego_fluency_min", agents.ego_fluency_min},
        {"ego_fluency_max", agents.ego_fluency_max},
        {"ego_temperature_min", agents.ego_temperature_min},
        {"ego_temperature_max", agents.ego_temperature_max},
        {"inspiration_min", agents.inspiration_min},
        {"inspiration_max", agents.inspiration_max},
        {"rating_noise", agents.rating_noise},
        {"alter_fluency_min", agents.alter_fluency_min},
        {"alter_fluency_max", agents.alter_fluency_max},
        {"alter_temperature_min", agents.alter_temperature_min},
        {"alter_temperature_max", agents.alter_temperature_max}}},
      {"model", model.to_json()},
  };
}

SimConfig SimConfig::from_json(const io::Json& j) {
  SimConfig c;
  Reader r(j, "");
  r.get("seed", c.seed).get("trials", c.trials).get("rounds", c.rounds).get("n_alters", c.n_alters)
      .get("n_egos", c.n_egos).get("adherence", c.adherence).get("concentration", c.concentration)
      .get("bootstrap_trials", c.bootstrap_trials).get("bootstrap_rounds", c.bootstrap_rounds)
      .get("treatment", c.treatment);
  if (const auto* w = r.sub("world")) {
    Reader s(*w, "world");
    s.get("branching", c.world.branching).get("dim", c.world.dim)
        .get("top_spread", c.world.top_spread).get("mid_spread", c.world.mid_spread)
        .get("leaf_spread", c.world.leaf_spread).get("table_b_noise", c.world.table_b_noise);
    s.finish();
  }
  if (const auto* u = r.sub("universe")) {
    Reader s(*u, "universe");
    s.get("bins", c.universe.bins).get("zipf_alpha", c.universe.zipf_alpha)
        .get("neighbors", c.universe.neighbors).get("position_noise", c.universe.position_noise)
        .get("second_concept_prob", c.universe.second_concept_prob);
    s.finish();
  }
  if (const auto* a = r.sub("agents")) {
    Reader s(*a, "agents");
    auto& g = c.agents;
    s.get("ego_fluency_min", g.ego_fluency_min).get("ego_fluency_max", g.ego_fluency_max)
        .get("ego_temperature_min", g.ego_temperature_min)
        .get("ego_temperature_max", g.ego_temperature_max)
        .get("inspiration_min", g.inspiration_min).get("inspiration_max", g.inspiration_max)
        .get("rating_noise", g.rating_noise).get("alter_fluency_min", g.alter_fluency_min)
        .get("alter_fluency_max", g.alter_fluency_max)
        .get("alter_temperature_min", g.alter_temperature_min)
        .get("alter_temperature_max", g.alter_temperature_max);
    s.finish();
  }
  if (const auto* m = r.sub("model")) c.model = ModelConfig::from_json(*m, "model");
  r.finish();
  return c;
}

// ------------------------------------------------------------------ world

std::string World::prompt_token(int round) { return "prompt" + std::to_string(round); }

World World::build(const WorldConfig& config, std::uint64_t seed, int max_rounds) {
  auto rng = rng_stream(seed, {kWorldDomain});
  World w;
  const auto dim = static_cast<std::size_t>(config.dim);
  std::vector<std::pair<std::string, std::string>> edges;
  std::vector<std::size_t> frontier;
  std::vector<std::size_t> parent_of;

  auto add_concept = [&](std::optional<std::size_t> parent, double spread) {
    const std::size_t idx = w.concept_ids.size();
    w.concept_ids.push_back("c" + std::to_string(idx));
    w.concept_tokens.push_back("k" + std::to_string(idx));
    std::vector<double> v(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      v[d] = (parent ? w.latent[*parent][d] : 0.0) + spread * normal(rng);
    }
    w.latent.push_back(std::move(v));
    if (parent) edges.emplace_back(w.concept_ids[idx], w.concept_ids[*parent]);
    return idx;
  };

  const std::vector<double> spreads{config.top_spread, config.mid_spread, config.leaf_spread};
  auto spread_at = [&](std::size_t level) { return spreads[std::min(level, spreads.size() - 1)]; };
  for (int i = 0; i < config.branching[0]; ++i) frontier.push_back(add_concept(std::nullopt, spread_at(0)));
  for (std::size_t level = 1; level < config.branching.size(); ++level) {
    std::vector<std::size_t> next;
    for (std::size_t p : frontier) {
      for (int i = 0; i < config.branching[level]; ++i) next.push_back(add_concept(p, spread_at(level)));
    }
    frontier = std::move(next);
  }
  w.leaves = frontier;

  std::vector<std::string> roots;
  for (int i = 0; i < config.branching[0]; ++i) roots.push_back(w.concept_ids[static_cast<std::size_t>(i)]);
  w.resources.taxonomy = Taxonomy::from_edges(edges, roots);
  for (std::size_t i = 0; i < w.concept_ids.size(); ++i) {
    w.resources.taxonomy.add_lexicon_entry(w.concept_tokens[i], w.concept_ids[i]);
  }

  std::vector<std::vector<double>> projection(dim, std::vector<double>(dim));
  for (auto& row : projection) {
    for (double& v : row) v = normal(rng) / std::sqrt(static_cast<double>(dim));
  }
  w.resources.table_a = EmbeddingTable("table-A", dim);
  w.resources.table_b = EmbeddingTable("table-B", dim);
  auto add_token = [&](const std::string& token, const std::vector<double>& v) {
    w.resources.table_a.add(token, v);
    std::vector<double> b(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t k = 0; k < dim; ++k) b[i] += projection[i][k] * v[k];
      b[i] += config.table_b_noise * normal(rng);
    }
    w.resources.table_b.add(token, std::move(b));
  };
  for (std::size_t i = 0; i < w.concept_ids.size(); ++i) add_token(w.concept_tokens[i], w.latent[i]);

  for (int r = 1; r <= std::max(max_rounds, 1); ++r) {
    const std::size_t leaf = w.leaves[std::uniform_int_distribution<std::size_t>(0, w.leaves.size() - 1)(rng)];
    std::vector<double> p = w.latent[leaf];
    for (double& v : p) v += config.leaf_spread * normal(rng);
    add_token(prompt_token(r), p);
    w.prompts.push_back(std::move(p));
  }
  return w;
}

void World::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  resources.table_a.save(dir / "embeddings_a.txt");
  resources.table_b.save(dir / "embeddings_b.txt");
  resources.taxonomy.save(dir / "taxonomy_edges.tsv", dir / "taxonomy_lexicon.tsv");
}

// ------------------------------------------------------------------ universe

Universe Universe::build(const World& world, const UniverseConfig& config, std::uint64_t seed,
                         int trial, int round) {
  auto rng = rng_stream(seed, {kUniverseDomain, static_cast<std::uint64_t>(trial),
                               static_cast<std::uint64_t>(round)});
  Universe u;
  u.round = round;
  const auto m = static_cast<std::size_t>(config.bins);
  std::uniform_int_distribution<std::size_t> pick_leaf(0, world.leaves.size() - 1);
  for (std::size_t b = 0; b < m; ++b) {
    IdeaBin bin;
    bin.id = static_cast<BinId>(round) * 10000 + static_cast<BinId>(b);
    const std::size_t anchor = world.leaves[pick_leaf(rng)];
    bin.concepts.push_back(anchor);
    if (uniform(rng) < config.second_concept_prob) {
      const std::size_t extra = world.leaves[pick_leaf(rng)];
      if (extra != anchor) bin.concepts.push_back(extra);
    }
    bin.position = world.latent[anchor];
    for (double& v : bin.position) v += config.position_noise * normal(rng);
    u.bins.push_back(std::move(bin));
  }

  const auto& prompt = world.prompts.at(static_cast<std::size_t>(std::max(round, 1) - 1) % world.prompts.size());
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> dist(m);
  for (std::size_t b = 0; b < m; ++b) dist[b] = squared_distance(u.bins[b].position, prompt);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  double total = 0.0;
  for (std::size_t rank = 0; rank < m; ++rank) {
    auto& bin = u.bins[order[rank]];
    bin.popularity = 1.0 / std::pow(static_cast<double>(rank + 1), config.zipf_alpha);
    bin.rarity = m > 1 ? static_cast<double>(rank) / static_cast<double>(m - 1) : 0.0;
    total += bin.popularity;
  }
  for (auto& bin : u.bins) bin.popularity /= total;

  for (std::size_t b = 0; b < m; ++b) {
    std::vector<std::pair<double, std::size_t>> near;
    for (std::size_t o = 0; o < m; ++o) {
      if (o != b) near.emplace_back(squared_distance(u.bins[b].position, u.bins[o].position), o);
    }
    const auto k = std::min(near.size(), static_cast<std::size_t>(config.neighbors));
    std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(k), near.end());
    for (std::size_t i = 0; i < k; ++i) u.bins[b].neighbors.push_back(near[i].second);
  }
  return u;
}

std::string Universe::text(std::size_t bin, const World& world) const {
  std::string out;
  for (std::size_t c : bins[bin].concepts) {
    if (!out.empty()) out.push_back(' ');
    out += world.concept_tokens[c];
  }
  return out;
}

std::vector<std::string> Universe::concept_ids(std::size_t bin, const World& world) const {
  std::vector<std::string> out;
  for (std::size_t c : bins[bin].concepts) out.push_back(world.concept_ids[c]);
  return out;
}

io::Json to_json(const RatingRecord& r) {
  return {{"trial", r.trial},       {"condition", to_string(r.condition)},
          {"round", r.round},       {"ego_id", r.ego_id},
          {"alter_id", r.alter_id}, {"idea_id", r.idea_id},
          {"rating", r.rating}};
}

// ------------------------------------------------------------------ trial

std::vector<AlterPair> initial_assignment(int n_alters, int n_egos) {
  // Circle-method rounds of a round-robin tournament; each round is a set of
  // disjoint pairs, so cycling through them balances follower counts.
  std::vector<std::vector<AlterPair>> matchings;
  if (n_alters % 2 == 0) {
    std::vector<int> ring(static_cast<std::size_t>(n_alters));
    std::iota(ring.begin(), ring.end(), 0);
    for (int r = 0; r < n_alters - 1; ++r) {
      std::vector<AlterPair> m;
      for (int i = 0; i < n_alters / 2; ++i) {
        m.emplace_back(AlterId{ring[static_cast<std::size_t>(i)]},
                       AlterId{ring[static_cast<std::size_t>(n_alters - 1 - i)]});
      }
      std::sort(m.begin(), m.end());
      matchings.push_back(std::move(m));
      std::rotate(ring.begin() + 1, ring.end() - 1, ring.end());
    }
  } else {
    matchings.push_back(all_alter_pairs(n_alters));
  }
  std::vector<AlterPair> out;
  for (std::size_t m = 0; out.size() < static_cast<std::size_t>(n_egos); m = (m + 1) % matchings.size()) {
    for (const auto& p : matchings[m]) {
      if (out.size() < static_cast<std::size_t>(n_egos)) out.push_back(p);
    }
  }
  return out;
}

namespace {

AgentProfile alter_profile(const SimConfig& c, int trial, int alter) {
  auto rng = rng_stream(c.seed, {kAlterProfileDomain, static_cast<std::uint64_t>(trial),
                                 static_cast<std::uint64_t>(alter)});
  AgentProfile p;
  p.fluency = uniform(rng, c.agents.alter_fluency_min, c.agents.alter_fluency_max);
  p.temperature = uniform(rng, c.agents.alter_temperature_min, c.agents.alter_temperature_max);
  p.gender = uniform(rng) < 0.5 ? Gender::A : Gender::B;
  return p;
}

AgentProfile ego_profile(const SimConfig& c, int trial, int ego) {
  auto rng = rng_stream(c.seed, {kEgoProfileDomain, static_cast<std::uint64_t>(trial),
                                 static_cast<std::uint64_t>(ego)});
  AgentProfile p;
  p.fluency = uniform(rng, c.agents.ego_fluency_min, c.agents.ego_fluency_max);
  p.temperature = uniform(rng, c.agents.ego_temperature_min, c.agents.ego_temperature_max);
  p.inspiration = uniform(rng, c.agents.inspiration_min, c.agents.inspiration_max);
  p.rating_noise = c.agents.rating_noise;
  p.adherence = c.adherence;
  p.gender = uniform(rng) < 0.5 ? Gender::A : Gender::B;
  return p;
}

std::vector<double> tempered(const Universe& u, double temperature) {
  std::vector<double> w;
  w.reserve(u.bins.size());
  for (const auto& b : u.bins) w.push_back(std::pow(b.popularity, 1.0 / temperature));
  return w;
}

std::string idea_id(int trial, Condition c, Role role, int author, int round, int attempt, int k) {
  std::string id = "t" + std::to_string(trial) + "-";
  if (role == Role::Alter) {
    id += "a" + std::to_string(author);
  } else {
    id += std::string(to_string(c)).substr(0, 1) + "e" + std::to_string(author);
  }
  return id + "-r" + std::to_string(round) + "-" + std::to_string(attempt) + "-" + std::to_string(k);
}

}  // namespace

TrialLog run_trial(const SimConfig& config, const World& world, int trial, Condition condition,
                   const TreeEnsemble* model) {
  config.validate();
  if (condition == Condition::Treatment && model == nullptr) {
    throw Error(ErrorCode::NotReady, "treatment trials need a trained model");
  }
  TrialLog log;
  TrialState& state = log.state;
  state = TrialState(trial, condition, config.n_alters);
  const auto t64 = static_cast<std::uint64_t>(trial);

  std::vector<AgentProfile> alters;
  for (int a = 0; a < config.n_alters; ++a) {
    alters.push_back(alter_profile(config, trial, a));
    state.set_gender(Role::Alter, a, alters.back().gender);
  }
  std::vector<AgentProfile> egos;
  for (int e = 0; e < config.n_egos; ++e) {
    egos.push_back(ego_profile(config, trial, e));
    state.set_gender(Role::Ego, e, egos.back().gender);
  }
  std::vector<int> arrival(static_cast<std::size_t>(config.n_egos));
  std::iota(arrival.begin(), arrival.end(), 0);
  {
    auto rng = rng_stream(config.seed, {kArrivalDomain, t64});
    std::shuffle(arrival.begin(), arrival.end(), rng);
  }
  for (std::size_t rank = 0; rank < arrival.size(); ++rank) {
    state.set_arrival_rank(EgoId{arrival[rank]}, static_cast<int>(rank));
  }
  const auto start = initial_assignment(config.n_alters, config.n_egos);
  for (int e = 0; e < config.n_egos; ++e) state.set_follow(1, EgoId{e}, start[static_cast<std::size_t>(e)]);
  if (config.rounds == 0) return log;

  std::vector<Universe> universes;
  std::vector<std::vector<std::vector<std::size_t>>> alter_bins;  // [round][alter] -> bin indices
  for (int r = 1; r <= config.rounds; ++r) {
    universes.push_back(Universe::build(world, config.universe, config.seed, trial, r));
    const Universe& u = universes.back();
    auto& per_alter = alter_bins.emplace_back();
    for (int a = 0; a < config.n_alters; ++a) {
      auto rng = rng_stream(config.seed, {kAlterIdeaDomain, t64, static_cast<std::uint64_t>(a),
                                          static_cast<std::uint64_t>(r)});
      const auto& prof = alters[static_cast<std::size_t>(a)];
      const auto weights = tempered(u, prof.temperature);
      const auto picks = sample_without_replacement(weights, static_cast<std::size_t>(idea_count(prof.fluency, rng)), rng);
      per_alter.push_back(picks);
      int k = 0;
      for (std::size_t b : picks) {
        IdeaRecord idea;
        idea.idea_id = idea_id(trial, condition, Role::Alter, a, r, 1, k++);
        idea.role = Role::Alter;
        idea.author_id = a;
        idea.trial = trial;
        idea.condition = condition;
        idea.round = r;
        idea.attempt = 1;
        idea.bin_id = u.bins[b].id;
        idea.text = u.text(b, world);
        idea.concept_ids = u.concept_ids(b, world);
        state.add_idea(std::move(idea));
      }
    }
  }

  std::optional<FeatureAssembler> assembler;
  if (condition == Condition::Treatment) assembler.emplace(world.resources, state);

  for (int e : arrival) {
    const EgoId ego{e};
    const auto& prof = egos[static_cast<std::size_t>(e)];
    const auto e64 = static_cast<std::uint64_t>(e);
    for (int t = 1; t <= config.rounds; ++t) {
      const Universe& u = universes[static_cast<std::size_t>(t - 1)];
      const auto t_64 = static_cast<std::uint64_t>(t);
      const AlterPair pair = state.round_network(t).follows.at(ego);
      auto add = [&](std::size_t b, int attempt, int k) {
        IdeaRecord idea;
        idea.idea_id = idea_id(trial, condition, Role::Ego, e, t, attempt, k);
        idea.role = Role::Ego;
        idea.author_id = e;
        idea.trial = trial;
        idea.condition = condition;
        idea.round = t;
        idea.attempt = attempt;
        idea.bin_id = u.bins[b].id;
        idea.text = u.text(b, world);
        idea.concept_ids = u.concept_ids(b, world);
        state.add_idea(std::move(idea));
      };

      // Attempt 1: independent ideation.
      auto rng1 = rng_stream(config.seed, {kEgoRoundDomain, t64, e64, t_64, kAttempt1});
      const auto first = sample_without_replacement(
          tempered(u, prof.temperature), static_cast<std::size_t>(idea_count(prof.fluency, rng1)), rng1);
      for (std::size_t k = 0; k < first.size(); ++k) add(first[k], 1, static_cast<int>(k));

      // Attempt 2: neighbours of the followed alters' ideas, never the
      // alters' own ideas nor anything already submitted.
      auto rng2 = rng_stream(config.seed, {kEgoRoundDomain, t64, e64, t_64, kAttempt2});
      std::vector<char> taken(u.bins.size(), 0);
      for (std::size_t b : first) taken[b] = 1;
      const auto& seen = alter_bins[static_cast<std::size_t>(t - 1)];
      for (AlterId a : {pair.first(), pair.second()}) {
        for (std::size_t b : seen[static_cast<std::size_t>(a.value)]) taken[b] = 1;
      }
      int k2 = 0;
      for (AlterId a : {pair.first(), pair.second()}) {
        for (std::size_t b : seen[static_cast<std::size_t>(a.value)]) {
          if (uniform(rng2) >= prof.inspiration) continue;
          std::vector<std::size_t> options;
          std::vector<double> weights;
          for (std::size_t n : u.bins[b].neighbors) {
            if (taken[n]) continue;
            options.push_back(n);
            weights.push_back(std::pow(u.bins[n].popularity, config.concentration));
          }
          if (options.empty()) continue;
          const std::size_t pick = options[weighted_pick(weights, rng2)];
          taken[pick] = 1;
          add(pick, 2, k2++);
        }
      }

      // Rewiring: rate every alter's ideas, then keep the two best.
      auto rng3 = rng_stream(config.seed, {kEgoRoundDomain, t64, e64, t_64, kRating});
      std::vector<double> score(static_cast<std::size_t>(config.n_alters), 0.0);
      for (int a = 0; a < config.n_alters; ++a) {
        const auto& bins = seen[static_cast<std::size_t>(a)];
        const auto ideas = state.ideas_of(Role::Alter, a, t);
        for (std::size_t k = 0; k < bins.size(); ++k) {
          const double raw = 1.0 + 4.0 * u.bins[bins[k]].rarity + prof.rating_noise * normal(rng3);
          const int rating = static_cast<int>(std::clamp(std::lround(raw), 1L, 5L));
          score[static_cast<std::size_t>(a)] += rating;
          log.ratings.push_back({trial, condition, t, e, a, ideas[k]->idea_id, rating});
        }
        if (!bins.empty()) score[static_cast<std::size_t>(a)] /= static_cast<double>(bins.size());
      }
      std::vector<int> ranked(static_cast<std::size_t>(config.n_alters));
      std::iota(ranked.begin(), ranked.end(), 0);
      std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
        return score[static_cast<std::size_t>(a)] > score[static_cast<std::size_t>(b)];
      });
      AlterPair choice(AlterId{ranked[0]}, AlterId{ranked[1]});

      if (condition == Condition::Treatment) {
        Recommendation rec = recommend(state, ego, t + 1, model, *assembler);
        auto rng4 = rng_stream(config.seed, {kAdherenceDomain, t64, e64, t_64});
        if (uniform(rng4) < prof.adherence) choice = rec.chosen_pair();
        log.recommendations.push_back(std::move(rec));
      }
      state.set_follow(t + 1, ego, choice);
    }
  }
  return log;
}

TrainingSet bootstrap_training(const SimConfig& config, const World& world,
                               std::vector<TrialState>* trials_out) {
  SimConfig c = config;
  c.rounds = config.bootstrap_rounds;
  std::vector<TrialState> trials;
  for (int k = 0; k < config.bootstrap_trials; ++k) {
    trials.push_back(run_trial(c, world, kBootstrapTrialOffset + k, Condition::Control, nullptr).state);
  }
  TrainingSet set = build_dataset(trials, world.resources);
  if (trials_out) *trials_out = std::move(trials);
  return set;
}

// ------------------------------------------------------------------ analysis

std::vector<GiniPoint> gini_trajectory(const TrialState& state) {
  std::vector<GiniPoint> out;
  for (int r : state.rounds_with_edges()) {
    const BipartiteRound& net = state.round_network(r);
    for (std::size_t s = 1; s <= net.arrival_order.size(); ++s) {
      const std::span<const EgoId> prefix(net.arrival_order.data(), s);
      const auto counts = net.follower_counts(prefix);
      out.push_back({r, static_cast<int>(s), gini_coefficient(FollowerShares::from_counts(counts)).value});
    }
  }
  return out;
}

io::Json ExperimentSummary::to_json() const {
  io::Json rows = io::Json::array();
  for (const auto& t : trials) {
    rows.push_back({{"trial", t.trial},
                    {"control_mean_marginal", t.control_marginal},
                    {"treatment_mean_marginal", t.treatment_marginal},
                    {"control_mean_gini_large", t.control_gini},
                    {"treatment_mean_gini_large", t.treatment_gini}});
  }
  return {{"trials", rows},
          {"n_trials", trials.size()},
          {"treatment_marginal_wins", marginal_wins},
          {"treatment_gini_wins", gini_wins},
          {"treatment_gini_positive", treatment_gini_positive},
          {"gini_sizes", {kGiniSizeMin, kGiniSizeMax}}};
}

namespace {

struct ArmStats {
  double marginal = 0.0;
  double gini = 0.0;
};

ArmStats write_arm(const TrialLog& log, const World& world, io::CsvWriter& metrics,
                   io::CsvWriter& collective, io::CsvWriter& gini_csv) {
  const TrialState& s = log.state;
  const std::string cond(to_string(s.condition()));
  ArmStats stats;
  double marginal_sum = 0.0;
  int marginal_n = 0;
  int last_round = 0;
  for (const auto& idea : s.ideas()) last_round = std::max(last_round, idea.round);
  for (int r = 1; r <= last_round; ++r) {
    const RoundPool pool = build_round_pool(s, r);
    std::map<EgoId, BinSet> all;
    std::vector<BinSet> sets;
    for (EgoId e : s.egos()) {
      all[e] = s.bins(Role::Ego, e.value, r);
      sets.push_back(all[e]);
    }
    const NoveltyScorer scorer = make_proxy_novelty_scorer(world.resources.table_a, World::prompt_token(r));
    const AlterPair* follow = nullptr;
    for (EgoId e : s.egos()) {
      follow = &s.round_network(r).follows.at(e);
      const int marginal = marginal_distinct_count(pool, s.arrival_rank(e), s.bins(Role::Ego, e.value, r, 2));
      const auto second = s.ideas_of(Role::Ego, e.value, r, 2);
      const double cq = creativity_quotient(world.resources.taxonomy,
                                            std::span<const std::string>(s.concepts(Role::Ego, e.value, r, 2)))
                            .quotient;
      metrics.cell(s.trial()).cell(cond).cell(e.value).cell(s.arrival_rank(e)).cell(r)
          .cell(marginal).cell(nonredundant_count(all, e)).cell(cq)
          .cell(best_novelty_score(scorer, second))
          .cell(follow->first().value).cell(follow->second().value);
      metrics.end_row();
      if (r >= 2) {
        marginal_sum += marginal;
        ++marginal_n;
      }
    }
    collective.cell(s.trial()).cell(cond).cell(r).cell(collective_distinct_count(sets));
    collective.end_row();
  }
  stats.marginal = marginal_n ? marginal_sum / marginal_n : 0.0;

  double gini_sum = 0.0;
  int gini_n = 0;
  for (const auto& p : gini_trajectory(s)) {
    gini_csv.cell(s.trial()).cell(cond).cell(p.round).cell(p.network_size).cell(p.gini);
    gini_csv.end_row();
    if (p.round >= 2 && p.network_size >= kGiniSizeMin && p.network_size <= kGiniSizeMax) {
      gini_sum += p.gini;
      ++gini_n;
    }
  }
  stats.gini = gini_n ? gini_sum / gini_n : 0.0;
  return stats;
}

void write_trial_records(const TrialLog& log, bool with_alters, std::ostream& ideas,
                         std::ostream& edges, std::ostream& participants) {
  for (const auto& idea : log.state.ideas()) {
    if (idea.role == Role::Ego || with_alters) append_jsonl(ideas, to_json(idea));
  }
  for (const auto& e : edge_records(log.state)) append_jsonl(edges, to_json(e));
  for (const auto& p : participant_records(log.state, with_alters)) append_jsonl(participants, to_json(p));
}

}  // namespace

ExperimentSummary run_experiment(const SimConfig& config, const World& world,
                                 const TreeEnsemble* model, const std::filesystem::path& out_dir) {
  config.validate();
  if (config.treatment && model == nullptr) {
    throw Error(ErrorCode::NotReady, "the treatment arm needs a trained model");
  }
  std::filesystem::create_directories(out_dir);
  std::ofstream ideas(out_dir / "ideas.jsonl", std::ios::binary);
  std::ofstream edges(out_dir / "edges.jsonl", std::ios::binary);
  std::ofstream participants(out_dir / "participants.jsonl", std::ios::binary);
  std::ofstream recs(out_dir / "recommendations.jsonl", std::ios::binary);
  std::ofstream ratings(out_dir / "ratings.jsonl", std::ios::binary);
  if (!ideas || !edges || !participants || !recs || !ratings) {
    throw Error(ErrorCode::Io, "cannot write into " + out_dir.string());
  }
  io::CsvWriter metrics(out_dir / "ego_metrics.csv");
  metrics.header({"trial", "condition", "ego_id", "arrival_rank", "round", "marginal_distinct",
                  "nonredundant", "cq", "best_novelty_proxy", "followed_a", "followed_b"});
  io::CsvWriter collective(out_dir / "collective.csv");
  collective.header({"trial", "condition", "round", "collective_distinct"});
  io::CsvWriter gini_csv(out_dir / "gini.csv");
  gini_csv.header({"trial", "condition", "round", "network_size", "gini"});

  ExperimentSummary summary;
  std::vector<DecisionRecord> decisions;
  double treatment_gini_total = 0.0;
  for (int trial = 1; trial <= config.trials; ++trial) {
    TrialSummary ts;
    ts.trial = trial;
    const TrialLog control = run_trial(config, world, trial, Condition::Control, nullptr);
    write_trial_records(control, true, ideas, edges, participants);
    for (const auto& r : control.ratings) append_jsonl(ratings, to_json(r));
    const ArmStats cs = write_arm(control, world, metrics, collective, gini_csv);
    ts.control_marginal = cs.marginal;
    ts.control_gini = cs.gini;
    if (config.treatment) {
      const TrialLog treated = run_trial(config, world, trial, Condition::Treatment, model);
      write_trial_records(treated, false, ideas, edges, participants);
      for (const auto& r : treated.ratings) append_jsonl(ratings, to_json(r));
      for (const auto& rec : treated.recommendations) {
        append_jsonl(recs, to_json(rec));
        decisions.push_back({rec.round, rec.network_size, rec.explanation.category});
      }
      const ArmStats ts_stats = write_arm(treated, world, metrics, collective, gini_csv);
      ts.treatment_marginal = ts_stats.marginal;
      ts.treatment_gini = ts_stats.gini;
      treatment_gini_total += ts_stats.gini;
      if (ts.treatment_marginal > ts.control_marginal) ++summary.marginal_wins;
      if (ts.treatment_gini < ts.control_gini) ++summary.gini_wins;
    }
    summary.trials.push_back(ts);
  }
  summary.treatment_gini_positive = config.treatment && treatment_gini_total > 0.0;
  if (!decisions.empty()) {
    const auto rows = dominance_profile(decisions);
    write_dominance_csv(out_dir / "dominance.csv", rows);
  } else {
    std::filesystem::remove(out_dir / "dominance.csv");
  }
  io::write_text(out_dir / "summary.json", summary.to_json().dump(2) + "\n");
  return summary;
}

}  // namespace socialmuse
