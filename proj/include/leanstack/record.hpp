// Copyright 2026 The leanstack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Text-record data model: a record is one LF-terminated line of
// single-space separated, non-empty fields. Column indices are 1-based.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace leanstack {

enum class Ordering { Less, Equal, Greater };

enum class KeyMode { Lexicographic, Numeric };
enum class Direction { Ascending, Descending };

/// Inclusive column span plus comparison mode.
struct KeyRange {
  std::size_t from = 1;
  std::size_t to = 1;
  KeyMode mode = KeyMode::Lexicographic;
  Direction direction = Direction::Ascending;

  std::size_t width() const noexcept { return to - from + 1; }
  /// Canonical `key=FROM[/TO][@num][@desc]` form.
  std::string to_string() const;

  friend bool operator==(const KeyRange&, const KeyRange&) = default;
};

/// Parses `key=FROM[/TO][@num][@desc]`. Throws Error on malformed input,
/// FROM > TO, or non-positive indices.
KeyRange parse_key_spec(std::string_view text);

/// Builds a lexicographic ascending range from two positional column
/// arguments, as in `count 1 1`.
KeyRange key_from_columns(std::string_view from, std::string_view to);

/// Parses a positive 1-based column index.
std::size_t parse_column(std::string_view text);

class Record {
 public:
  Record() = default;
  explicit Record(std::vector<std::string> fields);

  /// Parses one line (an optional single trailing LF is accepted).
  static Record parse(std::string_view line);

  std::size_t width() const noexcept { return fields_.size(); }
  const std::vector<std::string>& fields() const noexcept { return fields_; }
  /// 1-based field access; throws on out-of-range index.
  const std::string& field(std::size_t index) const;

  /// Fields joined by one space, terminated by one LF.
  std::string serialize() const;

  friend bool operator==(const Record&, const Record&) = default;

 private:
  std::vector<std::string> fields_;
};

Ordering compare_records(const Record& a, const Record& b, const KeyRange& key);

/// Same as compare_records but operates on raw lines (no trailing LF)
/// without allocating.
Ordering compare_lines(std::string_view a, std::string_view b, const KeyRange& key);

Record project(const Record& r, std::span<const std::size_t> columns);

// Raw-line helpers used by the streaming commands.

std::size_t count_fields(std::string_view line) noexcept;
/// 1-based field of a raw line; throws if the line is narrower.
std::string_view field_of(std::string_view line, std::size_t index);
/// Contiguous text covering columns key.from..key.to; throws if narrower.
std::string_view key_text(std::string_view line, const KeyRange& key);
/// Appends the projection of `line` onto `columns` (no LF) to `out`.
void project_line(std::string_view line, std::span<const std::size_t> columns,
                  std::string& out);

}  // namespace leanstack
