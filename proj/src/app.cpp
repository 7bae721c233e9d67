// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#include "socialmuse/app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>

#include "socialmuse/error.hpp"
#include "socialmuse/metrics.hpp"
#include "socialmuse/model.hpp"
#include "socialmuse/recommender.hpp"
#include "socialmuse/sim.hpp"

namespace socialmuse {

namespace fs = std::filesystem;

fs::path resolve_input(const std::string& path) {
  fs::path p(path);
  if (p.is_absolute()) return p;
  if (const char* dir = std::getenv(kDataDirEnv); dir != nullptr && *dir != '\0') return fs::path(dir) / p;
  return p;
}

namespace {

std::string require_string(const io::Json& config, const char* key) {
  auto it = config.find(key);
  if (it == config.end() || !it->is_string()) {
    throw Error(ErrorCode::InvalidConfig, std::string("missing required setting '") + key + "'");
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const io::Json& config, const char* key) {
  auto it = config.find(key);
  if (it == config.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(ErrorCode::InvalidConfig, std::string("setting '") + key + "' must be a string");
  return it->get<std::string>();
}

fs::path existing_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw Error(ErrorCode::Io, "missing input file: " + p.string());
  return p;
}

fs::path input_path(const io::Json& config, const char* dir_key, const char* key, const char* file_name) {
  if (auto explicit_path = optional_string(config, key)) return resolve_input(*explicit_path);
  if (auto dir = optional_string(config, dir_key)) return resolve_input(*dir) / file_name;
  throw Error(ErrorCode::InvalidConfig,
              std::string("set either '") + dir_key + "' or '" + key + "'");
}

TrialFiles trial_files(const io::Json& config, const char* dir_key) {
  TrialFiles f{input_path(config, dir_key, "ideas", "ideas.jsonl"),
               input_path(config, dir_key, "edges", "edges.jsonl"),
               input_path(config, dir_key, "participants", "participants.jsonl")};
  existing_file(f.ideas);
  existing_file(f.edges);
  existing_file(f.participants);
  return f;
}

struct ResourcePaths {
  fs::path table_a, table_b, edges, lexicon;
};

ResourcePaths resource_paths(const io::Json& config) {
  ResourcePaths r{input_path(config, "resources", "embeddings_a", "embeddings_a.txt"),
                  input_path(config, "resources", "embeddings_b", "embeddings_b.txt"),
                  input_path(config, "resources", "taxonomy_edges", "taxonomy_edges.tsv"),
                  input_path(config, "resources", "taxonomy_lexicon", "taxonomy_lexicon.tsv")};
  for (const auto* p : {&r.table_a, &r.table_b, &r.edges, &r.lexicon}) existing_file(*p);
  return r;
}

SemanticResources load_resources(const ResourcePaths& p) {
  SemanticResources r;
  r.taxonomy = Taxonomy::load(p.edges, p.lexicon);
  r.table_a = EmbeddingTable::load(p.table_a, "table-A");
  r.table_b = EmbeddingTable::load(p.table_b, "table-B");
  return r;
}

/// Ideas without a bin get one from the text normal form of their trial.
void ensure_bins(std::vector<TrialState>& trials) {
  for (auto& state : trials) {
    auto& ideas = state.mutable_ideas();
    const bool missing = std::any_of(ideas.begin(), ideas.end(), [](const IdeaRecord& r) { return !r.bin_id; });
    if (!missing) continue;
    const auto binned = bin_text_ideas(ideas);
    for (std::size_t i = 0; i < ideas.size(); ++i) {
      if (!ideas[i].bin_id) ideas[i].bin_id = binned[i].bin_id;
    }
  }
}

std::vector<TrialState> load_corpus(const TrialFiles& files, const SemanticResources& res, int n_alters) {
  auto trials = load_trials(files, n_alters);
  attach_concepts(trials, res.taxonomy);
  ensure_bins(trials);
  return trials;
}

std::uint64_t config_seed(const io::Json& config) {
  auto it = config.find("seed");
  if (it == config.end()) return 0;
  if (!it->is_number_unsigned() && !it->is_number_integer()) {
    throw Error(ErrorCode::InvalidConfig, "seed must be a non-negative integer");
  }
  return it->get<std::uint64_t>();
}

io::Json params_json(const Hyperparams& p) {
  return {{"n_estimators", p.n_estimators}, {"learning_rate", p.learning_rate},
          {"max_depth", p.max_depth},       {"subsample", p.subsample},
          {"colsample_bytree", p.colsample_bytree}, {"max_leaves", p.max_leaves}};
}

void write_rfe_report(const fs::path& path, const RfeResult& rfe) {
  io::CsvWriter out(path);
  out.header({"step", "n_features", "cv_r2", "dropped", "selected"});
  for (std::size_t s = 0; s < rfe.steps.size(); ++s) {
    const auto& step = rfe.steps[s];
    out.cell(s).cell(step.features.size()).cell(step.cv_r2);
    out.cell(step.dropped ? feature_names()[*step.dropped] : std::string_view{});
    out.cell(step.features == rfe.selected ? 1 : 0);
    out.end_row();
  }
}

/// Shared tail of `train` and `simulate`: fit, persist, summarize.
std::pair<TreeEnsemble, io::Json> train_and_save(const TrainingSet& data, const ModelConfig& mc,
                                                 std::uint64_t seed, const fs::path& out) {
  if (data.rows.empty()) throw Error(ErrorCode::InvalidInput, "the corpus yields no training rows");
  TrainOptions opt;
  opt.grid = mc.resolved_grid();
  opt.rfe_params = mc.rfe_params;
  opt.folds = mc.folds;
  opt.test_ratio = mc.test_ratio;
  opt.seed = seed;
  opt.run_rfe = mc.rfe;
  TrainReport report = train_model(data, opt);
  fs::create_directories(out);
  report.model.save(out / "model.json");
  write_cv_report(out / "cv_report.csv", report);
  write_rfe_report(out / "rfe_report.csv", report.rfe);
  data.write_csv(out / "training_features.csv");

  io::Json selected = io::Json::array();
  for (std::size_t f : report.model.selected_features) selected.push_back(feature_names()[f]);
  io::Json summary{
      {"model", (out / "model.json").string()},
      {"model_hash", io::hex64(io::fnv1a(report.model.serialized()))},
      {"n_rows", data.rows.size()},
      {"n_train_rows", report.split.train.size()},
      {"n_test_rows", report.split.test.size()},
      {"test_r2", report.test_r2},
      {"test_mae", report.test_mae},
      {"ridge_test_r2", report.ridge_test_r2},
      {"ridge_test_mae", report.ridge_test_mae},
      {"best_params", params_json(report.model.params)},
      {"selected_features", selected},
  };
  return {std::move(report.model), std::move(summary)};
}

void write_trial_files(const fs::path& dir, const std::vector<TrialState>& trials) {
  fs::create_directories(dir);
  std::ofstream ideas(dir / "ideas.jsonl", std::ios::binary);
  std::ofstream edges(dir / "edges.jsonl", std::ios::binary);
  std::ofstream participants(dir / "participants.jsonl", std::ios::binary);
  if (!ideas || !edges || !participants) throw Error(ErrorCode::Io, "cannot write into " + dir.string());
  for (const auto& state : trials) {
    for (const auto& idea : state.ideas()) append_jsonl(ideas, to_json(idea));
    for (const auto& e : edge_records(state)) append_jsonl(edges, to_json(e));
    for (const auto& p : participant_records(state, true)) append_jsonl(participants, to_json(p));
  }
}

}  // namespace

// ------------------------------------------------------------------ train

io::Json cmd_train(const io::Json& config) {
  const fs::path out = require_string(config, "out");
  const TrialFiles files = trial_files(config, "data");
  const ResourcePaths paths = resource_paths(config);
  io::Json model_json = io::Json::object();
  for (const char* key : {"grid", "rfe", "rfe_params", "folds", "test_ratio"}) {
    if (config.contains(key)) model_json[key] = config[key];
  }
  const ModelConfig mc = ModelConfig::from_json(model_json, "train");
  const int n_alters = config.value("n_alters", 6);

  const SemanticResources res = load_resources(paths);
  const auto trials = load_corpus(files, res, n_alters);
  const TrainingSet data = build_dataset(trials, res);
  return train_and_save(data, mc, config_seed(config), out).second;
}

// ------------------------------------------------------------------ recommend

io::Json cmd_recommend(const io::Json& config) {
  const fs::path out = require_string(config, "out");
  const TrialFiles files = trial_files(config, "snapshot");
  const ResourcePaths paths = resource_paths(config);
  const fs::path model_path = existing_file(resolve_input(require_string(config, "model")));
  const int n_alters = config.value("n_alters", 6);

  const TreeEnsemble model = TreeEnsemble::load(model_path);
  const SemanticResources res = load_resources(paths);
  const auto trials = load_corpus(files, res, n_alters);

  fs::create_directories(out);
  std::ofstream log(out / "recommendations.jsonl", std::ios::binary);
  if (!log) throw Error(ErrorCode::Io, "cannot write " + (out / "recommendations.jsonl").string());
  int pending = 0;
  for (const auto& state : trials) {
    FeatureAssembler assembler(res, state);
    int last_round = 0;
    for (const auto& idea : state.ideas()) last_round = std::max(last_round, idea.round);
    for (EgoId ego : state.egos()) {
      for (int t = 2; t <= last_round + 1; ++t) {
        if (!state.has_ideas(Role::Ego, ego.value, t - 1) || state.has_follow(t, ego)) continue;
        append_jsonl(log, to_json(recommend(state, ego, t, &model, assembler)));
        ++pending;
      }
    }
  }
  return {{"pending", pending}, {"recommendations", (out / "recommendations.jsonl").string()}};
}

// ------------------------------------------------------------------ simulate

io::Json cmd_simulate(const io::Json& config) {
  const fs::path out = require_string(config, "out");
  const auto model_path = optional_string(config, "model_file");
  io::Json sim_json = config;
  sim_json.erase("out");
  sim_json.erase("model_file");
  const SimConfig cfg = SimConfig::from_json(sim_json);
  cfg.validate();
  std::optional<fs::path> pretrained;
  if (model_path) pretrained = existing_file(resolve_input(*model_path));

  fs::create_directories(out);
  const std::string config_text = cfg.to_json().dump(2) + "\n";
  io::write_text(out / "config.json", config_text);

  const World world = World::build(cfg.world, cfg.seed, std::max(cfg.rounds, cfg.bootstrap_rounds) + 1);
  world.save(out / "resources");

  std::optional<TreeEnsemble> model;
  io::Json training = nullptr;
  const bool needs_model = cfg.treatment && cfg.trials > 0 && cfg.rounds > 0;
  if (pretrained) {
    model = TreeEnsemble::load(*pretrained);
  } else if (needs_model) {
    std::vector<TrialState> boot;
    const TrainingSet data = bootstrap_training(cfg, world, &boot);
    write_trial_files(out / "bootstrap", boot);
    auto [m, summary] = train_and_save(data, cfg.model, cfg.seed, out);
    model = std::move(m);
    training = std::move(summary);
  }

  const ExperimentSummary summary = run_experiment(cfg, world, model ? &*model : nullptr, out);

  io::Json files = io::Json::object();
  std::vector<fs::path> outputs;
  for (const auto& entry : fs::recursive_directory_iterator(out)) {
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json") outputs.push_back(entry.path());
  }
  std::sort(outputs.begin(), outputs.end());
  for (const auto& p : outputs) {
    files[fs::relative(p, out).generic_string()] = io::hex64(io::fnv1a(io::read_text(p)));
  }
  const io::Json manifest{
      {"tool", "socialmuse"},
      {"version", kVersion},
      {"seed", cfg.seed},
      {"config_hash", io::hex64(io::fnv1a(config_text))},
      {"model_source", pretrained ? pretrained->string() : (needs_model ? "bootstrap" : "none")},
      {"files", files},
  };
  io::write_text(out / "manifest.json", manifest.dump(2) + "\n");

  io::Json result = summary.to_json();
  result["out"] = out.string();
  result["training"] = training;
  return result;
}

// ------------------------------------------------------------------ report

namespace {

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  int n = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double sd() const {
    if (n < 2) return 0.0;
    return std::sqrt(std::max(0.0, (sum_sq - sum * sum / n) / (n - 1)));
  }
};

double cell_number(const io::CsvTable& t, const std::vector<std::string>& row, std::size_t col) {
  try {
    return std::stod(row.at(col));
  } catch (const std::exception&) {
    throw Error(ErrorCode::Schema, "non-numeric cell in column '" + t.columns[col] + "'");
  }
}

}  // namespace

io::Json cmd_report(const io::Json& config) {
  const fs::path run = resolve_input(require_string(config, "run_dir"));
  const fs::path metrics_path = run / "ego_metrics.csv";
  const fs::path gini_path = run / "gini.csv";
  if (!fs::is_directory(run) || !fs::is_regular_file(metrics_path) || !fs::is_regular_file(gini_path)) {
    throw Error(ErrorCode::NotFound, "no simulation outputs in " + run.string());
  }
  const fs::path out = optional_string(config, "out") ? fs::path(*optional_string(config, "out")) : run / "report";
  fs::create_directories(out);

  const io::CsvTable metrics = io::read_csv(metrics_path);
  const std::vector<std::string> metric_names{"marginal_distinct", "nonredundant", "cq", "best_novelty_proxy"};
  const std::size_t cond_col = metrics.column("condition");
  const std::size_t round_col = metrics.column("round");
  std::map<std::pair<std::string, std::string>, Moments> overall;
  std::map<std::tuple<std::string, std::string, int>, Moments> by_round;
  std::set<std::string> conditions;
  for (const auto& row : metrics.rows) {
    const std::string& cond = row.at(cond_col);
    conditions.insert(cond);
    const int round = static_cast<int>(cell_number(metrics, row, round_col));
    for (const auto& m : metric_names) {
      const double v = cell_number(metrics, row, metrics.column(m));
      by_round[{m, cond, round}].add(v);
      if (round >= 2) overall[{m, cond}].add(v);
    }
  }
  {
    io::CsvWriter w(out / "metric_comparison.csv");
    w.header({"metric", "condition", "mean", "sd", "n"});
    for (const auto& m : metric_names) {
      for (const auto& c : conditions) {
        const auto it = overall.find({m, c});
        if (it == overall.end()) continue;
        w.cell(m).cell(c).cell(it->second.mean()).cell(it->second.sd()).cell(it->second.n);
        w.end_row();
      }
    }
  }
  {
    io::CsvWriter w(out / "metric_by_round.csv");
    w.header({"metric", "condition", "round", "mean", "sd", "n"});
    for (const auto& [key, mom] : by_round) {
      const auto& [m, c, r] = key;
      w.cell(m).cell(c).cell(r).cell(mom.mean()).cell(mom.sd()).cell(mom.n);
      w.end_row();
    }
  }

  const io::CsvTable gini = io::read_csv(gini_path);
  std::map<std::pair<std::string, int>, Moments> gini_by_size;
  for (const auto& row : gini.rows) {
    if (cell_number(gini, row, gini.column("round")) < 2) continue;
    const int size = static_cast<int>(cell_number(gini, row, gini.column("network_size")));
    gini_by_size[{row.at(gini.column("condition")), size}].add(cell_number(gini, row, gini.column("gini")));
  }
  {
    io::CsvWriter w(out / "gini_by_size.csv");
    w.header({"condition", "network_size", "mean_gini", "sd", "n"});
    for (const auto& [key, mom] : gini_by_size) {
      w.cell(key.first).cell(key.second).cell(mom.mean()).cell(mom.sd()).cell(mom.n);
      w.end_row();
    }
  }

  io::Json summary{{"run_dir", run.string()}, {"out", out.string()}};
  io::Json comparisons = io::Json::object();
  for (const auto& m : metric_names) {
    io::Json entry = io::Json::object();
    for (const auto& c : conditions) {
      if (auto it = overall.find({m, c}); it != overall.end()) entry[c] = it->second.mean();
    }
    comparisons[m] = entry;
  }
  summary["metric_means_rounds_2_plus"] = comparisons;

  std::vector<DecisionRecord> decisions;
  const fs::path recs = run / "recommendations.jsonl";
  if (fs::is_regular_file(recs)) {
    io::for_each_jsonl(recs, [&](const io::Json& j, std::size_t) { decisions.push_back(decision_from_json(j)); });
  }
  if (decisions.empty()) {
    fs::remove(out / "dominance.csv");
    summary["dominance"] = "absent: run has no recommendations (control-only)";
  } else {
    const auto rows = dominance_profile(decisions);
    write_dominance_csv(out / "dominance.csv", rows);
    summary["dominance"] = (out / "dominance.csv").string();
    summary["decisions"] = decisions.size();
  }
  io::write_text(out / "report.json", summary.dump(2) + "\n");
  return summary;
}

}  // namespace socialmuse
