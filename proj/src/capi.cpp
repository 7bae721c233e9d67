// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#include "socialmuse/socialmuse.h"

#include <cstring>
#include <string>

#include "socialmuse/app.hpp"
#include "socialmuse/error.hpp"
#include "socialmuse/features.hpp"
#include "socialmuse/graph.hpp"
#include "socialmuse/model.hpp"

struct sm_model {
  socialmuse::TreeEnsemble ensemble;
};

namespace {

thread_local std::string g_last_error;

sm_status fail(sm_status s, const std::string& message) {
  g_last_error = message;
  return s;
}

template <class F>
sm_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return SM_OK;
  } catch (const socialmuse::Error& e) {
    return fail(static_cast<sm_status>(static_cast<int>(e.code())), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(SM_ERR_INVALID_INPUT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SM_ERR_INTERNAL, "unknown failure");
  }
}

char* dup_string(const std::string& s) {
  char* p = new char[s.size() + 1];
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

socialmuse::FeatureVector to_vector(const double* features, size_t n) {
  using socialmuse::Error;
  using socialmuse::ErrorCode;
  if (features == nullptr) throw Error(ErrorCode::InvalidInput, "features is null");
  if (n != socialmuse::kFeatureCount) {
    throw Error(ErrorCode::InvalidInput, "expected " + std::to_string(socialmuse::kFeatureCount) +
                                             " features, got " + std::to_string(n));
  }
  socialmuse::FeatureVector v;
  std::memcpy(v.values.data(), features, n * sizeof(double));
  return v;
}

template <class Cmd>
sm_status run_command(const char* config_json, char** out, Cmd cmd) {
  if (out == nullptr) return fail(SM_ERR_INVALID_INPUT, "output pointer is null");
  *out = nullptr;
  if (config_json == nullptr) return fail(SM_ERR_INVALID_INPUT, "config is null");
  return guarded([&] {
    nlohmann::json config;
    try {
      config = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
      throw socialmuse::Error(socialmuse::ErrorCode::InvalidConfig, std::string("config is not JSON: ") + e.what());
    }
    if (!config.is_object()) throw socialmuse::Error(socialmuse::ErrorCode::InvalidConfig, "config must be an object");
    *out = dup_string(cmd(config).dump());
  });
}

}  // namespace

extern "C" {

const char* sm_version(void) { return socialmuse::kVersion.data(); }

const char* sm_last_error(void) { return g_last_error.c_str(); }

const char* sm_status_name(sm_status status) {
  if (status == SM_OK) return "ok";
  if (status < SM_ERR_INVALID_INPUT || status > SM_ERR_INTERNAL) return "unknown";
  return socialmuse::to_string(static_cast<socialmuse::ErrorCode>(status));
}

size_t sm_feature_count(void) { return socialmuse::kFeatureCount; }

const char* sm_feature_name(size_t index) {
  if (index >= socialmuse::kFeatureCount) return nullptr;
  return socialmuse::feature_names()[index].data();
}

sm_status sm_gini(const double* counts, size_t n, double* out, int* degenerate) {
  if (out == nullptr || (counts == nullptr && n > 0)) return fail(SM_ERR_INVALID_INPUT, "null argument");
  return guarded([&] {
    const auto shares = socialmuse::FollowerShares::from_counts(std::span<const double>(counts, n));
    const auto g = socialmuse::gini_coefficient(shares);
    *out = g.value;
    if (degenerate != nullptr) *degenerate = g.degenerate ? 1 : 0;
  });
}

sm_status sm_model_load(const char* path, sm_model** out) {
  if (path == nullptr || out == nullptr) return fail(SM_ERR_INVALID_INPUT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new sm_model{socialmuse::TreeEnsemble::load(path)}; });
}

sm_status sm_model_save(const sm_model* model, const char* path) {
  if (model == nullptr || path == nullptr) return fail(SM_ERR_INVALID_INPUT, "null argument");
  return guarded([&] { model->ensemble.save(path); });
}

void sm_model_free(sm_model* model) { delete model; }

sm_status sm_model_predict(const sm_model* model, const double* features, size_t n, double* out) {
  if (model == nullptr) return fail(SM_ERR_NOT_READY, "no model loaded");
  if (out == nullptr) return fail(SM_ERR_INVALID_INPUT, "output pointer is null");
  return guarded([&] { *out = model->ensemble.predict(to_vector(features, n)); });
}

sm_status sm_model_shap(const sm_model* model, const double* features, size_t n, double* phi,
                        double* base) {
  if (model == nullptr) return fail(SM_ERR_NOT_READY, "no model loaded");
  if (phi == nullptr || base == nullptr) return fail(SM_ERR_INVALID_INPUT, "output pointer is null");
  return guarded([&] {
    const auto a = model->ensemble.shap(to_vector(features, n));
    std::memcpy(phi, a.phi.data(), a.phi.size() * sizeof(double));
    *base = a.base;
  });
}

sm_status sm_train(const char* config_json, char** out) {
  return run_command(config_json, out, socialmuse::cmd_train);
}
sm_status sm_recommend(const char* config_json, char** out) {
  return run_command(config_json, out, socialmuse::cmd_recommend);
}
sm_status sm_simulate(const char* config_json, char** out) {
  return run_command(config_json, out, socialmuse::cmd_simulate);
}
sm_status sm_report(const char* config_json, char** out) {
  return run_command(config_json, out, socialmuse::cmd_report);
}

void sm_string_free(char* s) { delete[] s; }

}  // extern "C"
