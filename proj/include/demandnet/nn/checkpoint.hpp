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

// Versioned little-endian binary container. Doubles are stored as their raw
// 64-bit patterns, so save -> load is bit-exact.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "demandnet/common.hpp"
#include "demandnet/nn/param.hpp"

namespace demandnet::nn {

inline constexpr std::string_view kCheckpointMagic = "DNCK";
inline constexpr uint32_t kCheckpointVersion = 1;

class BinaryWriter {
 public:
  void u8(uint8_t v) { buffer_.push_back(static_cast<char>(v)); }
  void u32(uint32_t v);
  void u64(uint64_t v);
  void i64(int64_t v) { u64(static_cast<uint64_t>(v)); }
  void f64(double v);
  void str(std::string_view s);
  void matrix(const Matrix& m);
  void doubles(std::span<const double> values);

  // Magic, version and a kind tag identifying the payload.
  void header(std::string_view kind);

  const std::string& bytes() const { return buffer_; }

 private:
  std::string buffer_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::string_view data) : data_(data) {}

  uint8_t u8();
  uint32_t u32();
  uint64_t u64();
  int64_t i64() { return static_cast<int64_t>(u64()); }
  double f64();
  std::string str();
  Matrix matrix();
  std::vector<double> doubles();

  // Validates magic, version and kind.
  void header(std::string_view kind);

  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const;
  std::string_view data_;
  std::size_t pos_ = 0;
};

void write_params(BinaryWriter& out, std::span<Param* const> params);
// Names and shapes must match the destination parameters.
void read_params(BinaryReader& in, std::span<Param* const> params);

}  // namespace demandnet::nn
