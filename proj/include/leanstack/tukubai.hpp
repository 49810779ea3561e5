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

// Single-node streaming commands. Every command reads LF-terminated
// records from an input stream and writes records to an output stream.

#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "leanstack/record.hpp"

namespace leanstack {

inline constexpr std::uint64_t kDefaultMemBudget = std::uint64_t{256} << 20;
inline constexpr std::size_t kMaxMergeFanIn = 64;

/// Maximum in-memory working set for sorting, in bytes. Always positive.
class MemoryBudget {
 public:
  MemoryBudget() = default;
  explicit MemoryBudget(std::uint64_t bytes);
  std::uint64_t bytes() const noexcept { return bytes_; }

 private:
  std::uint64_t bytes_ = kDefaultMemBudget;
};

/// Parses a byte count with an optional K/M/G suffix (binary multiples).
std::uint64_t parse_byte_count(std::string_view text);

struct SortOptions {
  MemoryBudget budget;
  std::filesystem::path tmpdir;  // empty: default_tmpdir()
  std::size_t max_fan_in = kMaxMergeFanIn;
};

/// A spilled run: a scratch file whose records are non-decreasing under `key`.
struct SortedRun {
  std::filesystem::path path;
  KeyRange key;
  std::uint64_t count = 0;
};

struct SortStats {
  std::uint64_t records = 0;
  std::size_t runs_spilled = 0;
  std::size_t merge_passes = 0;
};

/// Stable sort under `key`. Input larger than the budget is spilled to
/// sorted runs under opts.tmpdir and k-way merged (hierarchically once
/// more than max_fan_in runs exist).
SortStats msort(std::istream& in, std::ostream& out, const KeyRange& key,
                const SortOptions& opts = {});

/// Byte-wise sort of whole lines; the canonical order used before digesting
/// order-insensitive outputs.
SortStats sort_lines(std::istream& in, std::ostream& out, const SortOptions& opts = {});

std::uint64_t lcnt(std::istream& in);

/// One record per distinct key: key columns followed by the group size.
void count_by_key(std::istream& in, std::ostream& out, const KeyRange& key);

/// K-way merge of individually sorted inputs; ties go to the lower input
/// index. `labels`, when given, name the inputs in order-violation errors.
void dmerge(std::span<std::istream* const> inputs, std::ostream& out, const KeyRange& key,
            std::span<const std::string> labels = {});

/// One record per distinct key: key columns followed by the exact decimal
/// sum of each column in `sum`.
void sm2(std::istream& in, std::ostream& out, const KeyRange& key, const KeyRange& sum);

/// One single-field record per whitespace-delimited word.
void tokenize(std::istream& in, std::ostream& out);

/// Non-overlapping, left-to-right occurrences of `needle` within one line.
std::uint64_t count_occurrences(std::string_view line, std::string_view needle) noexcept;
/// Sum of count_occurrences over every line of the stream.
std::uint64_t grep_count(std::istream& in, std::string_view needle);

/// Records whose `column` value is strictly greater than `threshold`.
void select_rows(std::istream& in, std::ostream& out, std::size_t column,
                 std::string_view threshold);

/// Inner merge join of two sorted streams.
void merge_join(std::istream& left, std::istream& right, std::ostream& out,
                const KeyRange& left_key, const KeyRange& right_key);

/// Streaming projection (the `self` command).
void self(std::istream& in, std::ostream& out, std::span<const std::size_t> columns);

/// True if `text` is well-formed UTF-8 without NUL bytes.
bool is_valid_text(std::string_view text) noexcept;

}  // namespace leanstack
