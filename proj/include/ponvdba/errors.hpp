// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ponvdba {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// dbru_ingest
class UnknownAllocId : public Error {
 public:
  using Error::Error;
};

// vdba_engine
class UnknownAlgorithm : public Error {
 public:
  using Error::Error;
};
class DuplicateAlgorithmId : public Error {
 public:
  using Error::Error;
};
class DemandMismatch : public Error {
 public:
  using Error::Error;
};
class RegistryError : public Error {
 public:
  using Error::Error;
};

// merging_engine
class FrameMismatch : public Error {
 public:
  using Error::Error;
};
class DuplicateSlice : public Error {
 public:
  using Error::Error;
};
class UnknownSlice : public Error {
 public:
  using Error::Error;
};
class MapRejected : public Error {
 public:
  using Error::Error;
};

// metrics
class InsufficientSamples : public Error {
 public:
  using Error::Error;
};
class AllZero : public Error {
 public:
  using Error::Error;
};
class ConfigMismatch : public Error {
 public:
  using Error::Error;
};

// harness
class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> problems);

  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

class RuntimeInvariantViolation : public Error {
 public:
  RuntimeInvariantViolation(unsigned long long frame, const std::string& what);

  unsigned long long frame() const { return frame_; }

 private:
  unsigned long long frame_;
};

}  // namespace ponvdba
