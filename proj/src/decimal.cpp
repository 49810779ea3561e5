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

#include "leanstack/decimal.hpp"

#include <algorithm>

#include "leanstack/error.hpp"

namespace leanstack {
namespace {

struct DecimalParts {
  bool negative = false;
  std::string_view integer;   // leading zeros stripped
  std::string_view fraction;  // trailing zeros stripped
};

bool split_decimal(std::string_view text, DecimalParts& parts) noexcept {
  if (text.empty()) return false;
  if (text.front() == '+' || text.front() == '-') {
    parts.negative = text.front() == '-';
    text.remove_prefix(1);
  }
  const std::size_t dot = text.find('.');
  std::string_view integer = text.substr(0, dot);
  std::string_view fraction =
      dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (integer.empty()) return false;
  if (dot != std::string_view::npos && fraction.empty()) return false;
  auto digits = [](std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (!digits(integer) || !digits(fraction)) return false;
  while (!integer.empty() && integer.front() == '0') integer.remove_prefix(1);
  while (!fraction.empty() && fraction.back() == '0') fraction.remove_suffix(1);
  parts.integer = integer;
  parts.fraction = fraction;
  if (integer.empty() && fraction.empty()) parts.negative = false;  // -0 == 0
  return true;
}

Ordering compare_magnitude(const DecimalParts& a, const DecimalParts& b) noexcept {
  if (a.integer.size() != b.integer.size()) {
    return a.integer.size() < b.integer.size() ? Ordering::Less : Ordering::Greater;
  }
  int c = a.integer.compare(b.integer);
  if (c == 0) c = a.fraction.compare(b.fraction);
  return c < 0 ? Ordering::Less : (c > 0 ? Ordering::Greater : Ordering::Equal);
}

constexpr __int128 kMantissaLimit = static_cast<__int128>(1) << 120;

}  // namespace

bool is_decimal(std::string_view text) noexcept {
  DecimalParts parts;
  return split_decimal(text, parts);
}

Ordering compare_decimal(std::string_view a, std::string_view b) {
  DecimalParts pa, pb;
  if (!split_decimal(a, pa)) throw Error("not a decimal number: '" + std::string(a) + "'");
  if (!split_decimal(b, pb)) throw Error("not a decimal number: '" + std::string(b) + "'");
  if (pa.negative != pb.negative) return pa.negative ? Ordering::Less : Ordering::Greater;
  const Ordering m = compare_magnitude(pa, pb);
  if (!pa.negative || m == Ordering::Equal) return m;
  return m == Ordering::Less ? Ordering::Greater : Ordering::Less;
}

Decimal Decimal::parse(std::string_view text) {
  DecimalParts parts;
  if (!split_decimal(text, parts)) {
    throw Error("not a decimal number: '" + std::string(text) + "'");
  }
  // Keep the literal's own scale so "2.50" sums render with two digits.
  const std::size_t dot = text.find('.');
  const int scale = dot == std::string_view::npos ? 0 : static_cast<int>(text.size() - dot - 1);
  if (scale > kMaxScale) {
    throw Error("decimal '" + std::string(text) + "' has more than 18 fractional digits");
  }
  Decimal d;
  d.scale_ = scale;
  for (char c : text) {
    if (c < '0' || c > '9') continue;
    d.mantissa_ = d.mantissa_ * 10 + (c - '0');
    if (d.mantissa_ >= kMantissaLimit) {
      throw Error("decimal '" + std::string(text) + "' is out of range");
    }
  }
  if (parts.negative) d.mantissa_ = -d.mantissa_;
  return d;
}

void Decimal::rescale(int scale) {
  while (scale_ < scale) {
    mantissa_ *= 10;
    ++scale_;
    if (mantissa_ >= kMantissaLimit || mantissa_ <= -kMantissaLimit) {
      throw Error("decimal overflow");
    }
  }
}

Decimal& Decimal::operator+=(const Decimal& other) {
  Decimal rhs = other;
  const int scale = std::max(scale_, rhs.scale_);
  rescale(scale);
  rhs.rescale(scale);
  mantissa_ += rhs.mantissa_;
  if (mantissa_ >= kMantissaLimit || mantissa_ <= -kMantissaLimit) {
    throw Error("decimal overflow");
  }
  return *this;
}

void Decimal::append_to(std::string& out) const {
  unsigned __int128 magnitude =
      mantissa_ < 0 ? static_cast<unsigned __int128>(-mantissa_)
                    : static_cast<unsigned __int128>(mantissa_);
  char buf[64];
  int n = 0;
  do {
    buf[n++] = static_cast<char>('0' + static_cast<int>(magnitude % 10));
    magnitude /= 10;
  } while (magnitude != 0);
  while (n <= scale_) buf[n++] = '0';
  if (mantissa_ < 0) out += '-';
  for (int i = n - 1; i >= 0; --i) {
    out += buf[i];
    if (i == scale_ && scale_ > 0) out += '.';
  }
}

std::string Decimal::to_string() const {
  std::string s;
  append_to(s);
  return s;
}

}  // namespace leanstack
