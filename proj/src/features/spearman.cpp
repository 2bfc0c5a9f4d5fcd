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

#include "demandnet/features/spearman.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "demandnet/io.hpp"

namespace demandnet::features {

std::vector<double> rank_with_ties(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("rank: empty input");
  for (const double v : values) {
    if (std::isnan(v)) throw InvalidArgument("rank: NaN input");
  }
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Positions i+1 .. j (1-based) share their mean.
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mean_rank;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("spearman: lengths " + std::to_string(a.size()) +
                            " and " + std::to_string(b.size()));
  }
  if (a.size() < 2) throw InvalidArgument("spearman: need at least 2 observations");
  const std::vector<double> ra = rank_with_ties(a);
  const std::vector<double> rb = rank_with_ties(b);
  const double n = static_cast<double>(ra.size());
  const double mean_a = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mean_b = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - mean_a;
    const double db = rb[i] - mean_b;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    throw UndefinedCorrelation("spearman: constant input has no rank variance");
  }
  return std::clamp(sab / (std::sqrt(saa) * std::sqrt(sbb)), -1.0, 1.0);
}

std::vector<std::string> CorrelationReport::retained_names() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (retained[i]) out.push_back(names[i]);
  }
  return out;
}

CorrelationReport filter_static(const std::vector<std::string>& names,
                                const Matrix& profiles,
                                std::span<const double> target_stat,
                                double band) {
  if (profiles.rows() < 3) {
    throw InsufficientDataError("static filter needs at least 3 series, got " +
                                std::to_string(profiles.rows()));
  }
  if (static_cast<std::size_t>(profiles.cols()) != names.size()) {
    throw DimensionMismatch("static filter: name count != feature count");
  }
  if (static_cast<std::size_t>(profiles.rows()) != target_stat.size()) {
    throw DimensionMismatch("static filter: target length != series count");
  }
  const std::size_t s = names.size();
  std::vector<std::vector<double>> columns(s);
  for (std::size_t j = 0; j < s; ++j) {
    const Vector col = profiles.col(static_cast<Eigen::Index>(j));
    columns[j].assign(col.data(), col.data() + col.size());
  }
  auto safe = [](std::span<const double> a, std::span<const double> b) {
    try {
      return spearman(a, b);
    } catch (const UndefinedCorrelation&) {
      return 0.0;
    }
  };
  CorrelationReport report;
  report.names = names;
  report.band = band;
  report.pairwise = Matrix::Identity(static_cast<Eigen::Index>(s),
                                     static_cast<Eigen::Index>(s));
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = i + 1; j < s; ++j) {
      const double r = safe(columns[i], columns[j]);
      report.pairwise(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r;
      report.pairwise(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = r;
    }
  }
  for (std::size_t j = 0; j < s; ++j) {
    const double r = safe(columns[j], target_stat);
    report.target_correlation.push_back(r);
    // Closed boundary: |r| equal to the band (up to rounding) is kept.
    report.retained.push_back(std::abs(r) >= band - 1e-12);
  }
  return report;
}

std::size_t shock_onset(const data::SeriesBundle& bundle) {
  const auto policy = bundle.policy();
  for (std::size_t t = 0; t < policy.size(); ++t) {
    if (policy[t] > 0.0) return t;
  }
  return policy.size();
}

double shock_response(const data::SeriesBundle& bundle, data::Range range) {
  const std::size_t onset = shock_onset(bundle);
  const std::size_t end = std::min(range.end, bundle.length());
  if (onset <= range.begin || onset >= end) {
    throw InsufficientDataError("series '" + bundle.id +
                                "': shock onset outside the statistic range");
  }
  double pre = 0.0;
  double post = 0.0;
  for (std::size_t t = range.begin; t < onset; ++t) pre += bundle.target[t];
  for (std::size_t t = onset; t < end; ++t) post += bundle.target[t];
  pre /= static_cast<double>(onset - range.begin);
  post /= static_cast<double>(end - onset);
  if (pre == 0.0) {
    throw InsufficientDataError("series '" + bundle.id + "': zero pre-shock mean");
  }
  return post / pre;
}

std::string correlation_matrix_csv(const CorrelationReport& report) {
  std::string out = "feature";
  for (const auto& n : report.names) out += "," + n;
  out += "\n";
  for (std::size_t i = 0; i < report.names.size(); ++i) {
    out += report.names[i];
    for (std::size_t j = 0; j < report.names.size(); ++j) {
      out += "," + io::format_double(report.pairwise(static_cast<Eigen::Index>(i),
                                                     static_cast<Eigen::Index>(j)));
    }
    out += "\n";
  }
  return out;
}

}  // namespace demandnet::features
