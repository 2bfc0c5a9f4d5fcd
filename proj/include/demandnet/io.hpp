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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace demandnet::io {

// Splits one CSV record. Double-quoted fields may contain commas; a doubled
// quote inside a quoted field is a literal quote.
std::vector<std::string> split_csv_line(std::string_view line);

std::optional<double> parse_double(std::string_view text);

// Shortest text that parses back to the identical double.
std::string format_double(double value);

std::string read_file(const std::string& path);

// Writes to a sibling temporary file and renames it over `path`.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace demandnet::io
