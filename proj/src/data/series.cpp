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

#include "demandnet/data/series.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "demandnet/io.hpp"

namespace demandnet::data {
namespace {

std::size_t find_column(const std::vector<std::string>& header,
                        const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw SchemaError("missing column '" + name + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    lines.push_back(line);
  }
  return lines;
}

double parse_cell(const std::vector<std::string>& fields, std::size_t column,
                  const std::vector<std::string>& header, std::size_t line) {
  if (column >= fields.size()) {
    throw ParseError("row " + std::to_string(line) + " column " +
                     std::to_string(column + 1) + " ('" + header[column] +
                     "'): missing value");
  }
  const auto value = io::parse_double(fields[column]);
  if (!value || !std::isfinite(*value)) {
    throw ParseError("row " + std::to_string(line) + " column " +
                     std::to_string(column + 1) + " ('" + header[column] +
                     "'): not a number: '" + fields[column] + "'");
  }
  return *value;
}

struct RawRow {
  int64_t day;
  std::size_t line;
  double target;
  std::vector<double> covariates;
};

void load_static(const std::string& path, std::vector<SeriesBundle>& bundles,
                 const std::string& id_column) {
  const auto lines = split_lines(io::read_file(path));
  if (lines.empty()) throw SchemaError("static sidecar has no header: " + path);
  const auto header = io::split_csv_line(lines[0]);
  const std::size_t id_col = find_column(header, id_column);
  std::vector<std::size_t> feature_cols;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == id_col) continue;
    feature_cols.push_back(c);
    names.push_back(header[c]);
  }
  std::map<std::string, std::vector<double>> by_id;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = io::split_csv_line(lines[i]);
    if (id_col >= fields.size()) {
      throw ParseError("static row " + std::to_string(i + 1) + ": missing id");
    }
    std::vector<double> values;
    for (const std::size_t c : feature_cols) {
      values.push_back(parse_cell(fields, c, header, i + 1));
    }
    by_id[fields[id_col]] = std::move(values);
  }
  for (auto& bundle : bundles) {
    const auto it = by_id.find(bundle.id);
    if (it == by_id.end()) {
      throw SchemaError("static sidecar has no row for series '" + bundle.id +
                        "'");
    }
    bundle.static_names = names;
    bundle.static_values = it->second;
  }
}

}  // namespace

std::vector<double> SeriesBundle::policy() const {
  std::vector<double> out(length());
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] = covariates(static_cast<Eigen::Index>(t), policy_index);
  }
  return out;
}

void SeriesBundle::validate() const {
  if (static_cast<std::size_t>(covariates.rows()) != target.size()) {
    throw DimensionMismatch("series '" + id + "': target length " +
                            std::to_string(target.size()) +
                            " != covariate rows " +
                            std::to_string(covariates.rows()));
  }
  if (covariate_names.size() != covariate_count()) {
    throw DimensionMismatch("series '" + id + "': covariate name count");
  }
  if (policy_index < 0 ||
      static_cast<std::size_t>(policy_index) >= covariate_count()) {
    throw SchemaError("series '" + id + "': policy column out of range");
  }
  if (static_names.size() != static_values.size()) {
    throw DimensionMismatch("series '" + id + "': static name count");
  }
  for (std::size_t t = 0; t < target.size(); ++t) {
    if (!std::isfinite(target[t])) {
      throw NumericError("series '" + id + "': non-finite target at row " +
                         std::to_string(t));
    }
  }
  if (!covariates.allFinite()) {
    throw NumericError("series '" + id + "': non-finite covariate");
  }
  for (std::size_t t = 0; t < target.size(); ++t) {
    const double p = covariates(static_cast<Eigen::Index>(t), policy_index);
    if (p < 0.0 || p > 1.0) {
      throw RangeError("series '" + id + "': policy level " +
                       io::format_double(p) + " outside [0,1] at " +
                       format_date(start_day + static_cast<int64_t>(t)));
    }
  }
}

int64_t parse_date(const std::string& text) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3) {
    throw ParseError("invalid ISO-8601 date: '" + text + "'");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) throw ParseError("invalid calendar date: '" + text + "'");
  return std::chrono::sys_days(ymd).time_since_epoch().count();
}

std::string format_date(int64_t day) {
  const std::chrono::year_month_day ymd{
      std::chrono::sys_days{std::chrono::days{day}}};
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "%04d-%02u-%02u",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buffer;
}

std::vector<SeriesBundle> load_dataset(const std::string& path,
                                       const CsvSchema& schema) {
  const auto lines = split_lines(io::read_file(path));
  if (lines.empty()) throw SchemaError("dataset has no header row: " + path);
  const auto header = io::split_csv_line(lines[0]);
  const std::size_t id_col = find_column(header, schema.id_column);
  const std::size_t date_col = find_column(header, schema.date_column);
  const std::size_t target_col = find_column(header, schema.target_column);

  std::vector<std::size_t> cov_cols;
  std::vector<std::string> cov_names;
  if (schema.covariate_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == id_col || c == date_col || c == target_col) continue;
      cov_cols.push_back(c);
      cov_names.push_back(header[c]);
    }
  } else {
    for (const auto& name : schema.covariate_columns) {
      cov_cols.push_back(find_column(header, name));
      cov_names.push_back(name);
    }
  }
  const auto policy_it =
      std::find(cov_names.begin(), cov_names.end(), schema.policy_column);
  if (policy_it == cov_names.end()) {
    throw SchemaError("missing column '" + schema.policy_column + "'");
  }
  const int policy_index = static_cast<int>(policy_it - cov_names.begin());

  std::vector<std::string> order;
  std::map<std::string, std::vector<RawRow>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto fields = io::split_csv_line(lines[i]);
    if (fields.size() < header.size()) {
      throw ParseError("row " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    RawRow row;
    row.line = line_no;
    row.day = parse_date(fields[date_col]);
    row.target = parse_cell(fields, target_col, header, line_no);
    for (const std::size_t c : cov_cols) {
      row.covariates.push_back(parse_cell(fields, c, header, line_no));
    }
    const double policy = row.covariates[static_cast<std::size_t>(policy_index)];
    if (policy < 0.0 || policy > 1.0) {
      throw RangeError("row " + std::to_string(line_no) + " column '" +
                       schema.policy_column + "': policy level " +
                       fields[cov_cols[static_cast<std::size_t>(policy_index)]] +
                       " outside [0,1]");
    }
    const std::string& id = fields[id_col];
    auto [it, inserted] = rows.try_emplace(id);
    if (inserted) order.push_back(id);
    it->second.push_back(std::move(row));
  }

  std::vector<SeriesBundle> bundles;
  bundles.reserve(order.size());
  for (const auto& id : order) {
    auto& series_rows = rows[id];
    std::stable_sort(series_rows.begin(), series_rows.end(),
                     [](const RawRow& a, const RawRow& b) {
                       return a.day < b.day;
                     });
    for (std::size_t t = 1; t < series_rows.size(); ++t) {
      const int64_t step = series_rows[t].day - series_rows[t - 1].day;
      if (step == 0) {
        throw GapError("series '" + id + "': duplicate date " +
                       format_date(series_rows[t].day) + " (row " +
                       std::to_string(series_rows[t].line) + ")");
      }
      if (step != 1) {
        throw GapError("series '" + id + "': gap after " +
                       format_date(series_rows[t - 1].day) +
                       ", first missing date " +
                       format_date(series_rows[t - 1].day + 1));
      }
    }
    SeriesBundle bundle;
    bundle.id = id;
    bundle.start_day = series_rows.front().day;
    bundle.covariate_names = cov_names;
    bundle.policy_index = policy_index;
    bundle.target.resize(series_rows.size());
    bundle.covariates.resize(static_cast<Eigen::Index>(series_rows.size()),
                             static_cast<Eigen::Index>(cov_cols.size()));
    for (std::size_t t = 0; t < series_rows.size(); ++t) {
      bundle.target[t] = series_rows[t].target;
      for (std::size_t j = 0; j < cov_cols.size(); ++j) {
        bundle.covariates(static_cast<Eigen::Index>(t),
                          static_cast<Eigen::Index>(j)) =
            series_rows[t].covariates[j];
      }
    }
    bundles.push_back(std::move(bundle));
  }
  if (schema.static_path) load_static(*schema.static_path, bundles, schema.id_column);
  for (const auto& b : bundles) b.validate();
  return bundles;
}

void write_dataset(const std::string& path,
                   const std::vector<SeriesBundle>& bundles) {
  std::string out = "series_id,date,target";
  if (!bundles.empty()) {
    for (const auto& name : bundles.front().covariate_names) out += "," + name;
  }
  out += "\n";
  for (const auto& b : bundles) {
    for (std::size_t t = 0; t < b.length(); ++t) {
      out += b.id;
      out += ",";
      out += format_date(b.start_day + static_cast<int64_t>(t));
      out += ",";
      out += io::format_double(b.target[t]);
      for (Eigen::Index j = 0; j < b.covariates.cols(); ++j) {
        out += ",";
        out += io::format_double(b.covariates(static_cast<Eigen::Index>(t), j));
      }
      out += "\n";
    }
  }
  io::atomic_write(path, out);
}

void write_static(const std::string& path,
                  const std::vector<SeriesBundle>& bundles) {
  std::string out = "series_id";
  if (!bundles.empty()) {
    for (const auto& name : bundles.front().static_names) out += "," + name;
  }
  out += "\n";
  for (const auto& b : bundles) {
    out += b.id;
    for (const double v : b.static_values) out += "," + io::format_double(v);
    out += "\n";
  }
  io::atomic_write(path, out);
}

NormStats fit_norm_stats(const SeriesBundle& bundle, Range fit_range) {
  if (fit_range.empty()) throw InsufficientDataError("empty training range");
  if (fit_range.end > bundle.length()) {
    throw InvalidArgument("normalization range exceeds series length");
  }
  const std::size_t channels = 1 + bundle.covariate_count();
  NormStats stats;
  stats.location.assign(channels, 0.0);
  stats.scale.assign(channels, 1.0);
  stats.constant.assign(channels, false);
  stats.passthrough_channel = 1 + bundle.policy_index;
  const double n = static_cast<double>(fit_range.size());
  for (std::size_t c = 0; c < channels; ++c) {
    if (static_cast<int>(c) == stats.passthrough_channel) continue;
    auto value = [&](std::size_t t) {
      return c == 0 ? bundle.target[t]
                    : bundle.covariates(static_cast<Eigen::Index>(t),
                                        static_cast<Eigen::Index>(c - 1));
    };
    double sum = 0.0;
    for (std::size_t t = fit_range.begin; t < fit_range.end; ++t) sum += value(t);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t t = fit_range.begin; t < fit_range.end; ++t) {
      const double d = value(t) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    stats.location[c] = mean;
    if (sd > 1e-12 * std::max(1.0, std::abs(mean))) {
      stats.scale[c] = sd;
    } else {
      stats.scale[c] = 1.0;
      stats.constant[c] = true;
    }
  }
  return stats;
}

NormStats fit_norm_stats(const SeriesBundle& bundle,
                         const DatasetSplit& split) {
  return fit_norm_stats(bundle, split.train);
}

SeriesBundle normalize(const SeriesBundle& bundle, const NormStats& stats) {
  if (stats.channels() != 1 + bundle.covariate_count()) {
    throw DimensionMismatch("normalization channel count");
  }
  SeriesBundle out = bundle;
  for (std::size_t t = 0; t < out.length(); ++t) {
    out.target[t] = stats.normalize(0, bundle.target[t]);
    for (Eigen::Index j = 0; j < out.covariates.cols(); ++j) {
      const std::size_t c = static_cast<std::size_t>(j) + 1;
      if (static_cast<int>(c) == stats.passthrough_channel) continue;
      out.covariates(static_cast<Eigen::Index>(t), j) =
          stats.normalize(c, bundle.covariates(static_cast<Eigen::Index>(t), j));
    }
  }
  return out;
}

SeriesBundle denormalize(const SeriesBundle& bundle, const NormStats& stats) {
  if (stats.channels() != 1 + bundle.covariate_count()) {
    throw DimensionMismatch("normalization channel count");
  }
  SeriesBundle out = bundle;
  for (std::size_t t = 0; t < out.length(); ++t) {
    out.target[t] = stats.denormalize(0, bundle.target[t]);
    for (Eigen::Index j = 0; j < out.covariates.cols(); ++j) {
      const std::size_t c = static_cast<std::size_t>(j) + 1;
      if (static_cast<int>(c) == stats.passthrough_channel) continue;
      out.covariates(static_cast<Eigen::Index>(t), j) = stats.denormalize(
          c, bundle.covariates(static_cast<Eigen::Index>(t), j));
    }
  }
  return out;
}

SupervisedSample window_at(const SeriesBundle& bundle, std::size_t tau,
                           std::size_t horizon, std::size_t origin) {
  if (origin < tau || origin > bundle.length()) {
    throw InsufficientDataError("window origin " + std::to_string(origin) +
                                " needs " + std::to_string(tau) +
                                " rows of history");
  }
  const std::size_t m = bundle.covariate_count();
  SupervisedSample s;
  s.origin = origin;
  s.window.resize(static_cast<Eigen::Index>(tau), static_cast<Eigen::Index>(1 + m));
  for (std::size_t r = 0; r < tau; ++r) {
    const std::size_t t = origin - tau + r;
    const auto row = static_cast<Eigen::Index>(r);
    s.window(row, 0) = bundle.target[t];
    s.window.row(row).tail(static_cast<Eigen::Index>(m)) =
        bundle.covariates.row(static_cast<Eigen::Index>(t));
  }
  const std::size_t available = std::min(horizon, bundle.length() - origin);
  s.label.resize(static_cast<Eigen::Index>(available));
  s.future_policies.resize(static_cast<Eigen::Index>(horizon));
  for (std::size_t h = 0; h < horizon; ++h) {
    const std::size_t t = std::min(origin + h, bundle.length() - 1);
    s.future_policies(static_cast<Eigen::Index>(h)) =
        bundle.covariates(static_cast<Eigen::Index>(t), bundle.policy_index);
    if (h < available) {
      s.label(static_cast<Eigen::Index>(h)) = bundle.target[origin + h];
    }
  }
  return s;
}

std::vector<SupervisedSample> make_windows(const SeriesBundle& bundle,
                                           std::size_t tau,
                                           std::size_t horizon) {
  if (tau == 0 || horizon == 0) {
    throw InvalidArgument("window length and horizon must be positive");
  }
  if (bundle.length() < tau + horizon) {
    throw InsufficientDataError(
        "series '" + bundle.id + "' has " + std::to_string(bundle.length()) +
        " rows, windowing needs " + std::to_string(tau + horizon));
  }
  return windows_with_labels_in(bundle, tau, horizon, {0, bundle.length()});
}

std::vector<SupervisedSample> windows_with_labels_in(
    const SeriesBundle& bundle, std::size_t tau, std::size_t horizon,
    Range labels) {
  std::vector<SupervisedSample> out;
  const std::size_t end = std::min(labels.end, bundle.length());
  const std::size_t first = std::max(labels.begin, tau);
  for (std::size_t origin = first; origin + horizon <= end; ++origin) {
    out.push_back(window_at(bundle, tau, horizon, origin));
  }
  return out;
}

DatasetSplit split_time(std::size_t length, const SplitFractions& fractions) {
  if (fractions.train <= 0.0 || fractions.validation <= 0.0 ||
      fractions.test <= 0.0) {
    throw InvalidArgument("split fractions must be positive");
  }
  const double sum = fractions.train + fractions.validation + fractions.test;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw InvalidArgument("split fractions sum to " + io::format_double(sum) +
                          ", expected 1");
  }
  const auto n = static_cast<double>(length);
  // The small slack keeps exact products such as 0.8 * 100 from flooring to 79.
  auto boundary = [&](double fraction) {
    return static_cast<std::size_t>(std::floor(fraction * n + 1e-9));
  };
  const std::size_t train_end = std::min(boundary(fractions.train), length);
  const std::size_t val_end = std::min(
      boundary(fractions.train + fractions.validation), length);
  return {{0, train_end}, {train_end, val_end}, {val_end, length}};
}

DatasetSplit split_time(const SeriesBundle& bundle,
                        const SplitFractions& fractions) {
  return split_time(bundle.length(), fractions);
}

std::pair<std::vector<SeriesBundle>, std::vector<SeriesBundle>> holdout_series(
    const std::vector<SeriesBundle>& bundles,
    const std::set<std::string>& held_ids) {
  if (held_ids.empty()) throw InvalidArgument("held-out set is empty");
  for (const auto& id : held_ids) {
    const bool known = std::any_of(bundles.begin(), bundles.end(),
                                   [&](const SeriesBundle& b) { return b.id == id; });
    if (!known) throw InvalidArgument("unknown series id '" + id + "'");
  }
  std::vector<SeriesBundle> train;
  std::vector<SeriesBundle> unseen;
  for (const auto& b : bundles) {
    (held_ids.count(b.id) ? unseen : train).push_back(b);
  }
  if (train.empty()) {
    throw InvalidArgument("held-out set covers every series; nothing to train on");
  }
  return {std::move(train), std::move(unseen)};
}

}  // namespace demandnet::data
