// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#include "ponvdba/errors.hpp"

#include <utility>

namespace ponvdba {

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string msg = "scenario validation failed:";
  for (const auto& p : problems) {
    msg += "\n  - ";
    msg += p;
  }
  return msg;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> problems)
    : Error(join_problems(problems)), problems_(std::move(problems)) {}

RuntimeInvariantViolation::RuntimeInvariantViolation(unsigned long long frame,
                                                     const std::string& what)
    : Error("frame " + std::to_string(frame) + ": " + what), frame_(frame) {}

}  // namespace ponvdba
