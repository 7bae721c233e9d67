// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "socialmuse/io.hpp"

namespace socialmuse {

inline constexpr std::string_view kVersion = "0.1.0";
/// Environment variable naming the directory relative input paths resolve against.
inline constexpr const char* kDataDirEnv = "SOCIALMUSE_DATA_DIR";

/// Resolves a relative input path against the data directory, if one is set.
std::filesystem::path resolve_input(const std::string& path);

// Every command takes one JSON object (config file merged with flags) and
// returns a JSON summary. Errors are thrown as socialmuse::Error.

/// Keys: data (dir with ideas/edges/participants .jsonl) or ideas/edges/participants;
/// resources (dir) or embeddings_a/embeddings_b/taxonomy_edges/taxonomy_lexicon;
/// out; seed; grid; rfe; rfe_params; folds; test_ratio; n_alters.
io::Json cmd_train(const io::Json& config);

/// Keys: snapshot (dir) or ideas/edges/participants; resources or the four
/// resource paths; model; out (directory for recommendations.jsonl).
io::Json cmd_recommend(const io::Json& config);

/// Keys: every simulator field plus out and optional model_file (skips bootstrap).
io::Json cmd_simulate(const io::Json& config);

/// Keys: run_dir; out (defaults to run_dir/report).
io::Json cmd_report(const io::Json& config);

}  // namespace socialmuse
