// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace socialmuse {

enum class ErrorCode {
  InvalidInput = 1,
  NotFound,
  Io,
  Schema,
  NotReady,
  InvalidConfig,
  MissingVocabulary,
  Internal,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception carrying a stable error category. The C API maps the category
/// onto its status codes one-to-one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace socialmuse
