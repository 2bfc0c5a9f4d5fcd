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

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "demandnet/common.hpp"
#include "demandnet/data/series.hpp"
#include "demandnet/io.hpp"

namespace demandnet::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("demandnet_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

inline std::string write_text(const TempDir& dir, const std::string& name,
                              const std::string& text) {
  const std::string path = dir.file(name);
  io::atomic_write(path, text);
  return path;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng,
                            double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-scale, scale);
  }
  return m;
}

// Single-series bundle: target t, covariates {x, policy}.
inline data::SeriesBundle ramp_bundle(std::size_t length, const std::string& id = "A") {
  data::SeriesBundle b;
  b.id = id;
  b.start_day = data::parse_date("2020-01-01");
  b.covariates = Matrix::Zero(static_cast<Eigen::Index>(length), 2);
  b.covariate_names = {"x", "policy"};
  b.policy_index = 1;
  for (std::size_t t = 0; t < length; ++t) {
    b.target.push_back(static_cast<double>(t));
    b.covariates(static_cast<Eigen::Index>(t), 0) = 0.5 * static_cast<double>(t);
    b.covariates(static_cast<Eigen::Index>(t), 1) = t >= length / 2 ? 0.5 : 0.0;
  }
  return b;
}

}  // namespace demandnet::testing
