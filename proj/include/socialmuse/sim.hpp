// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "socialmuse/features.hpp"
#include "socialmuse/io.hpp"
#include "socialmuse/model.hpp"
#include "socialmuse/recommender.hpp"
#include "socialmuse/trial.hpp"

namespace socialmuse {

/// Independent generator for a key path, e.g. (seed, trial, ego, round, stage).
std::mt19937_64 rng_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

struct WorldConfig {
  std::vector<int> branching{6, 5, 5};
  int dim = 8;
  double top_spread = 3.0;
  double mid_spread = 1.5;
  double leaf_spread = 0.8;
  double table_b_noise = 0.3;
};

struct UniverseConfig {
  int bins = 120;
  double zipf_alpha = 1.0;
  int neighbors = 6;
  double position_noise = 0.35;
  double second_concept_prob = 0.5;
};

struct AgentConfig {
  double ego_fluency_min = 3.0;
  double ego_fluency_max = 7.0;
  double ego_temperature_min = 0.7;
  double ego_temperature_max = 1.5;
  double inspiration_min = 0.4;
  double inspiration_max = 0.8;
  double rating_noise = 0.8;
  double alter_fluency_min = 4.0;
  double alter_fluency_max = 9.0;
  double alter_temperature_min = 0.5;
  double alter_temperature_max = 3.0;
};

struct ModelConfig {
  /// "default" (small grid), "reference" (full 1620-point grid) or explicit.
  std::string grid = "default";
  std::vector<Hyperparams> explicit_grid;
  Hyperparams rfe_params{30, 0.3, 3, 1.0, 1.0, 25};
  bool rfe = true;
  int folds = 5;
  double test_ratio = 0.2;

  std::vector<Hyperparams> resolved_grid() const;
  io::Json to_json() const;
  /// Missing fields keep their defaults; unknown fields are rejected.
  static ModelConfig from_json(const io::Json& j, const std::string& where = "model");
};

struct SimConfig {
  std::uint64_t seed = 7;
  int trials = 10;
  int rounds = 5;
  int n_alters = 6;
  int n_egos = 18;
  double adherence = 0.8;
  /// Sharpness of the neighbour choice during inspired ideation; larger
  /// values make egos who follow the same alter converge on the same ideas.
  double concentration = 3.0;
  int bootstrap_trials = 20;
  int bootstrap_rounds = 5;
  /// Whether the experiment runs the treatment arm.
  bool treatment = true;
  WorldConfig world;
  UniverseConfig universe;
  AgentConfig agents;
  ModelConfig model;

  /// Throws InvalidConfig naming the offending field.
  void validate() const;
  io::Json to_json() const;
  /// Missing fields keep their defaults; unknown fields are rejected.
  static SimConfig from_json(const io::Json& j);
};

/// Synthetic lexical world shared by every trial of a run: taxonomy, two
/// embedding tables, one token per concept and one prompt word per round.
struct World {
  SemanticResources resources;
  std::vector<std::string> concept_ids;     // non-root concepts
  std::vector<std::string> concept_tokens;  // aligned with concept_ids
  std::vector<std::size_t> leaves;          // indices into concept_ids
  std::vector<std::vector<double>> latent;  // aligned with concept_ids
  std::vector<std::vector<double>> prompts;  // per round, 0-based

  static World build(const WorldConfig& config, std::uint64_t seed, int max_rounds);
  static std::string prompt_token(int round);
  void save(const std::filesystem::path& dir) const;
};

struct IdeaBin {
  BinId id = 0;
  std::vector<std::size_t> concepts;  // indices into World::concept_ids
  std::vector<double> position;
  double popularity = 0.0;  // normalized
  double rarity = 0.0;      // popularity rank / (bins - 1), 0 = most popular
  std::vector<std::size_t> neighbors;
};

/// Idea catalog of one (trial, round).
struct Universe {
  int round = 1;
  std::vector<IdeaBin> bins;

  static Universe build(const World& world, const UniverseConfig& config, std::uint64_t seed,
                        int trial, int round);
  std::string text(std::size_t bin, const World& world) const;
  std::vector<std::string> concept_ids(std::size_t bin, const World& world) const;
};

struct AgentProfile {
  double fluency = 0.0;
  double temperature = 1.0;
  double inspiration = 0.0;
  double rating_noise = 0.0;
  double adherence = 0.0;
  Gender gender = Gender::A;
};

struct RatingRecord {
  int trial = 0;
  Condition condition = Condition::Control;
  int round = 1;
  std::int32_t ego_id = 0;
  std::int32_t alter_id = 0;
  std::string idea_id;
  int rating = 0;
};
io::Json to_json(const RatingRecord& r);

struct TrialLog {
  TrialState state;
  std::vector<Recommendation> recommendations;
  std::vector<RatingRecord> ratings;
};

/// Fixed starting topology: pairs drawn from round-robin perfect matchings
/// so every alter starts with the same follower count when possible.
std::vector<AlterPair> initial_assignment(int n_alters, int n_egos);

/// Runs one (trial, condition). Treatment needs a model.
TrialLog run_trial(const SimConfig& config, const World& world, int trial, Condition condition,
                   const TreeEnsemble* model);

/// Control-only trials in a separate trial-index range, turned into rows.
TrainingSet bootstrap_training(const SimConfig& config, const World& world,
                               std::vector<TrialState>* trials_out = nullptr);

inline constexpr int kBootstrapTrialOffset = 100000;

struct TrialSummary {
  int trial = 0;
  double control_marginal = 0.0;
  double treatment_marginal = 0.0;
  double control_gini = 0.0;
  double treatment_gini = 0.0;
};

struct ExperimentSummary {
  std::vector<TrialSummary> trials;
  int marginal_wins = 0;
  int gini_wins = 0;
  bool treatment_gini_positive = false;
  io::Json to_json() const;
};

/// Runs every paired trial, writes the run directory and returns the summary.
ExperimentSummary run_experiment(const SimConfig& config, const World& world,
                                 const TreeEnsemble* model, const std::filesystem::path& out_dir);

/// Per-size Gini of every round's network, sizes 1..n by arrival order.
struct GiniPoint {
  int round = 1;
  int network_size = 1;
  double gini = 0.0;
};
std::vector<GiniPoint> gini_trajectory(const TrialState& state);

/// Smallest and largest network size counted in the Gini comparison.
inline constexpr int kGiniSizeMin = 11;
inline constexpr int kGiniSizeMax = 18;

}  // namespace socialmuse
