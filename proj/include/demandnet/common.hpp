/*
 * Copyright 2026 The DemandNet Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace demandnet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Base of every error raised by the library. Subclasses name the contract
// that was violated so callers (and the CLI) can map them to messages.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class GapError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class UndefinedCorrelation : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class PrerequisiteError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss. Carries the serialized parameters of
// the last epoch whose loss was finite.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::string last_good_checkpoint)
      : Error(what), last_good_checkpoint_(std::move(last_good_checkpoint)) {}
  const std::string& last_good_checkpoint() const {
    return last_good_checkpoint_;
  }

 private:
  std::string last_good_checkpoint_;
};

// SplitMix64 finalizer; used to derive independent stream seeds.
uint64_t mix_seed(uint64_t seed, uint64_t stream);

// Seedable, stream-addressable random source. Two Rng objects built from the
// same (seed, stream) produce identical sequences.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0);

  uint64_t next() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal(double mean = 0.0, double sd = 1.0);
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

  std::string state() const;
  void set_state(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

}  // namespace demandnet
