// Copyright 2026 The shardrisk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Result tables and their CSV, JSON and text renderings.

#ifndef SHARDRISK_SRC_CLI_TABLE_HPP_
#define SHARDRISK_SRC_CLI_TABLE_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace shardrisk::cli {

/// An empty cell, an integer, a real, text or a boolean.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  /// Appends an all-empty row and returns it.
  std::vector<Cell>& add_row();
  /// Index of `name`; throws std::out_of_range if absent.
  std::size_t column(std::string_view name) const;
};

enum class Format { kCsv, kJson, kText };

Format parse_format(std::string_view name);

/// Shortest text that reads back to the same double; "inf", "-inf", "nan"
/// for the non-finite values.
std::string format_double(double value);

std::string render_csv(const Table& table);
/// An array of row objects in column order. Non-finite reals become null.
std::string render_json(const Table& table);
std::string render_text(const Table& table);
std::string render(const Table& table, Format format);

}  // namespace shardrisk::cli

#endif  // SHARDRISK_SRC_CLI_TABLE_HPP_
