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

#include "demandnet/nn/checkpoint.hpp"

#include <bit>
#include <cstring>

namespace demandnet::nn {

void BinaryWriter::u32(uint32_t v) {
  for (int i = 0; i < 4; ++i) buffer_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void BinaryWriter::u64(uint64_t v) {
  for (int i = 0; i < 8; ++i) buffer_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void BinaryWriter::f64(double v) { u64(std::bit_cast<uint64_t>(v)); }

void BinaryWriter::str(std::string_view s) {
  u64(s.size());
  buffer_.append(s.data(), s.size());
}

void BinaryWriter::matrix(const Matrix& m) {
  u64(static_cast<uint64_t>(m.rows()));
  u64(static_cast<uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) f64(m.data()[i]);
}

void BinaryWriter::doubles(std::span<const double> values) {
  u64(values.size());
  for (const double v : values) f64(v);
}

void BinaryWriter::header(std::string_view kind) {
  buffer_.append(kCheckpointMagic.data(), kCheckpointMagic.size());
  u32(kCheckpointVersion);
  str(kind);
}

void BinaryReader::need(std::size_t n) const {
  if (data_.size() - pos_ < n) throw ParseError("checkpoint truncated");
}

uint8_t BinaryReader::u8() {
  need(1);
  return static_cast<uint8_t>(data_[pos_++]);
}

uint32_t BinaryReader::u32() {
  need(4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(static_cast<unsigned char>(data_[pos_++])) << (8 * i);
  }
  return v;
}

uint64_t BinaryReader::u64() {
  need(8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<uint64_t>(static_cast<unsigned char>(data_[pos_++])) << (8 * i);
  }
  return v;
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::string BinaryReader::str() {
  const uint64_t n = u64();
  need(n);
  std::string s(data_.substr(pos_, n));
  pos_ += n;
  return s;
}

Matrix BinaryReader::matrix() {
  const auto rows = static_cast<Eigen::Index>(u64());
  const auto cols = static_cast<Eigen::Index>(u64());
  need(static_cast<std::size_t>(rows * cols) * 8);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = f64();
  return m;
}

std::vector<double> BinaryReader::doubles() {
  const uint64_t n = u64();
  need(n * 8);
  std::vector<double> out(n);
  for (auto& v : out) v = f64();
  return out;
}

void BinaryReader::header(std::string_view kind) {
  need(kCheckpointMagic.size());
  if (data_.substr(pos_, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw ParseError("not a checkpoint (bad magic)");
  }
  pos_ += kCheckpointMagic.size();
  const uint32_t version = u32();
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::string found = str();
  if (found != kind) {
    throw ParseError("checkpoint holds '" + found + "', expected '" +
                     std::string(kind) + "'");
  }
}

void write_params(BinaryWriter& out, std::span<Param* const> params) {
  out.u64(params.size());
  for (const Param* p : params) {
    out.str(p->name);
    out.u8(p->decay ? 1 : 0);
    out.matrix(p->value);
  }
}

void read_params(BinaryReader& in, std::span<Param* const> params) {
  const uint64_t n = in.u64();
  if (n != params.size()) {
    throw ParseError("checkpoint has " + std::to_string(n) +
                     " parameters, model expects " + std::to_string(params.size()));
  }
  for (Param* p : params) {
    const std::string name = in.str();
    if (name != p->name) {
      throw ParseError("checkpoint parameter '" + name + "' where '" + p->name +
                       "' was expected");
    }
    p->decay = in.u8() != 0;
    Matrix value = in.matrix();
    if (value.rows() != p->value.rows() || value.cols() != p->value.cols()) {
      throw ParseError("checkpoint parameter '" + name + "' has wrong shape");
    }
    p->value = std::move(value);
    p->grad.setZero(p->value.rows(), p->value.cols());
  }
}

}  // namespace demandnet::nn
