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

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "leanstack/record.hpp"

namespace leanstack {

/// True for `[+-]?[0-9]+(\.[0-9]+)?`.
bool is_decimal(std::string_view text) noexcept;

/// Exact comparison of two decimal literals of any length. Throws Error
/// if either operand is not a decimal.
Ordering compare_decimal(std::string_view a, std::string_view b);

/// Fixed-point decimal used for exact sums. Holds up to 18 fractional
/// digits and a 128-bit mantissa; arithmetic throws on overflow.
class Decimal {
 public:
  static constexpr int kMaxScale = 18;

  Decimal() = default;
  static Decimal parse(std::string_view text);

  Decimal& operator+=(const Decimal& other);

  int scale() const noexcept { return scale_; }
  /// Rendered with exactly scale() fractional digits.
  std::string to_string() const;
  void append_to(std::string& out) const;

  friend bool operator==(const Decimal&, const Decimal&) = default;

 private:
  void rescale(int scale);

  __int128 mantissa_ = 0;
  int scale_ = 0;
};

}  // namespace leanstack
