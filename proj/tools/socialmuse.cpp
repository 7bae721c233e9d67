// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end over the C API. A config file supplies defaults;
// flags given on the command line replace its values.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "socialmuse/socialmuse.h"

namespace {

using Json = nlohmann::json;

struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
  std::map<std::string, std::string> strings;
  std::optional<int> trials;
  std::optional<int> rounds;
  std::optional<double> adherence;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Random seed");
  sub->add_option("--config", c.config, "JSON config file; flags override its values");
  sub->add_option("--out", c.out, "Output directory");
}

void add_path(CLI::App* sub, Common& c, const std::string& flag, const std::string& key, const std::string& help) {
  sub->add_option_function<std::string>(
      "--" + flag, [&c, key](const std::string& v) { c.strings[key] = v; }, help);
}

int fail(int code, const std::string& message) {
  std::cerr << "socialmuse: error: " << message << "\n";
  return code;
}

Json load_config(const std::string& path) {
  if (path.empty()) return Json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw std::runtime_error("config file " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("config file " + path + " must hold a JSON object");
  return j;
}

Json merged(const Common& c) {
  Json j = load_config(c.config);
  if (c.seed) j["seed"] = *c.seed;
  if (!c.out.empty()) j["out"] = c.out;
  for (const auto& [k, v] : c.strings) j[k] = v;
  if (c.trials) j["trials"] = *c.trials;
  if (c.rounds) j["rounds"] = *c.rounds;
  if (c.adherence) j["adherence"] = *c.adherence;
  return j;
}

using Command = sm_status (*)(const char*, char**);

int run(Command cmd, const Json& config) {
  char* out = nullptr;
  const sm_status s = cmd(config.dump().c_str(), &out);
  if (s != SM_OK) {
    return fail(static_cast<int>(s), std::string(sm_status_name(s)) + ": " + sm_last_error());
  }
  std::cout << Json::parse(out).dump(2) << "\n";
  sm_string_free(out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SocialMuse peer recommendation, creativity metrics and simulation"};
  app.set_version_flag("--version", std::string(sm_version()));
  app.require_subcommand(1);

  Common train_opts, rec_opts, sim_opts, report_opts;

  auto* train = app.add_subcommand("train", "Fit the recommendation model on idea and follow logs");
  add_common(train, train_opts);
  add_path(train, train_opts, "data", "data", "Directory with ideas/edges/participants .jsonl");
  add_path(train, train_opts, "resources", "resources", "Directory with embeddings and taxonomy files");
  add_path(train, train_opts, "grid", "grid", "Hyperparameter grid: default or reference");

  auto* rec = app.add_subcommand("recommend", "Score every pending ego in a trial snapshot");
  add_common(rec, rec_opts);
  add_path(rec, rec_opts, "snapshot", "snapshot", "Directory with ideas/edges/participants .jsonl");
  add_path(rec, rec_opts, "resources", "resources", "Directory with embeddings and taxonomy files");
  add_path(rec, rec_opts, "model", "model", "Model file written by train");

  auto* sim = app.add_subcommand("simulate", "Run the paired control/treatment experiment");
  add_common(sim, sim_opts);
  add_path(sim, sim_opts, "model", "model_file", "Use this model instead of bootstrap training");
  add_path(sim, sim_opts, "grid", "grid", "Hyperparameter grid: default or reference");
  sim->add_option("--trials", sim_opts.trials, "Paired trials");
  sim->add_option("--rounds", sim_opts.rounds, "Rounds per trial");
  sim->add_option("--adherence", sim_opts.adherence, "Probability a treatment ego accepts");

  auto* report = app.add_subcommand("report", "Summarize a simulation run directory");
  add_common(report, report_opts);
  add_path(report, report_opts, "run-dir", "run_dir", "Run directory written by simulate");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return run(sm_train, merged(train_opts));
    if (*rec) return run(sm_recommend, merged(rec_opts));
    if (*sim) {
      Json config = merged(sim_opts);
      if (config.contains("grid")) {
        // The grid choice lives in the simulator's model block.
        config["model"]["grid"] = config["grid"];
        config.erase("grid");
      }
      return run(sm_simulate, config);
    }
    if (*report) return run(sm_report, merged(report_opts));
  } catch (const std::exception& e) {
    return fail(SM_ERR_INVALID_CONFIG, e.what());
  }
  return fail(SM_ERR_INTERNAL, "no subcommand");
}
