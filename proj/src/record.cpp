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

#include "leanstack/record.hpp"

#include <charconv>
#include <cstring>

#include "leanstack/decimal.hpp"
#include "leanstack/error.hpp"

namespace leanstack {
namespace {

// Walks the fields of a raw line.
class FieldCursor {
 public:
  explicit FieldCursor(std::string_view line) : rest_(line), done_(line.empty()) {}

  bool next(std::string_view& field) noexcept {
    if (done_) return false;
    const std::size_t space = rest_.find(' ');
    if (space == std::string_view::npos) {
      field = rest_;
      done_ = true;
    } else {
      field = rest_.substr(0, space);
      rest_.remove_prefix(space + 1);
    }
    return true;
  }

 private:
  std::string_view rest_;
  bool done_;
};

[[noreturn]] void throw_narrow(std::string_view line, std::size_t column) {
  throw Error("record has " + std::to_string(count_fields(line)) +
              " field(s) but column " + std::to_string(column) + " is required");
}

Ordering invert(Ordering o) noexcept {
  switch (o) {
    case Ordering::Less: return Ordering::Greater;
    case Ordering::Greater: return Ordering::Less;
    default: return o;
  }
}

}  // namespace

std::size_t parse_column(std::string_view text) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end || value == 0) {
    throw Error("invalid column index '" + std::string(text) + "'");
  }
  return value;
}

std::string KeyRange::to_string() const {
  std::string s = "key=" + std::to_string(from);
  if (to != from) s += "/" + std::to_string(to);
  if (mode == KeyMode::Numeric) s += "@num";
  if (direction == Direction::Descending) s += "@desc";
  return s;
}

KeyRange parse_key_spec(std::string_view text) {
  const std::string original(text);
  constexpr std::string_view kPrefix = "key=";
  if (!text.starts_with(kPrefix)) {
    throw Error("malformed key expression '" + original + "'");
  }
  text.remove_prefix(kPrefix.size());

  KeyRange key;
  std::string_view range = text.substr(0, text.find('@'));
  std::string_view flags =
      range.size() < text.size() ? text.substr(range.size()) : std::string_view{};

  const std::size_t slash = range.find('/');
  try {
    key.from = parse_column(range.substr(0, slash));
    key.to = slash == std::string_view::npos ? key.from
                                             : parse_column(range.substr(slash + 1));
  } catch (const Error&) {
    throw Error("malformed key expression '" + original + "'");
  }
  if (key.from > key.to) {
    throw Error("key expression '" + original + "' has FROM > TO");
  }

  // Modifiers appear at most once each, @num before @desc.
  bool seen_num = false, seen_desc = false;
  while (!flags.empty()) {
    flags.remove_prefix(1);
    const std::size_t at = flags.find('@');
    const std::string_view flag = flags.substr(0, at);
    if (flag == "num" && !seen_num && !seen_desc) {
      seen_num = true;
      key.mode = KeyMode::Numeric;
    } else if (flag == "desc" && !seen_desc) {
      seen_desc = true;
      key.direction = Direction::Descending;
    } else {
      throw Error("malformed key expression '" + original + "': unexpected flag '" +
                  std::string(flag) + "'");
    }
    flags = at == std::string_view::npos ? std::string_view{} : flags.substr(at);
  }
  return key;
}

KeyRange key_from_columns(std::string_view from, std::string_view to) {
  KeyRange key;
  key.from = parse_column(from);
  key.to = parse_column(to);
  if (key.from > key.to) {
    throw Error("column span " + std::string(from) + ".." + std::string(to) +
                " has FROM > TO");
  }
  return key;
}

Record::Record(std::vector<std::string> fields) : fields_(std::move(fields)) {
  if (fields_.empty()) throw Error("record must have at least one field");
  for (const auto& f : fields_) {
    if (f.empty() || f.find_first_of(" \n") != std::string::npos) {
      throw Error("invalid record field '" + f + "'");
    }
  }
}

Record Record::parse(std::string_view line) {
  if (line.ends_with('\n')) line.remove_suffix(1);
  if (line.empty()) throw Error("empty record line");
  if (line.find('\n') != std::string_view::npos) {
    throw Error("record line contains an embedded newline");
  }
  std::vector<std::string> fields;
  FieldCursor cursor(line);
  std::string_view f;
  while (cursor.next(f)) {
    if (f.empty()) throw Error("record line has an empty field: '" + std::string(line) + "'");
    fields.emplace_back(f);
  }
  Record r;
  r.fields_ = std::move(fields);
  return r;
}

const std::string& Record::field(std::size_t index) const {
  if (index == 0 || index > fields_.size()) {
    throw Error("column " + std::to_string(index) + " out of range for record of width " +
                std::to_string(fields_.size()));
  }
  return fields_[index - 1];
}

std::string Record::serialize() const {
  std::string out;
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    if (i) out += ' ';
    out += fields_[i];
  }
  out += '\n';
  return out;
}

Ordering compare_lines(std::string_view a, std::string_view b, const KeyRange& key) {
  FieldCursor ca(a), cb(b);
  std::string_view fa, fb;
  for (std::size_t col = 1; col < key.from; ++col) {
    if (!ca.next(fa)) throw_narrow(a, key.to);
    if (!cb.next(fb)) throw_narrow(b, key.to);
  }
  Ordering result = Ordering::Equal;
  for (std::size_t col = key.from; col <= key.to; ++col) {
    if (!ca.next(fa)) throw_narrow(a, key.to);
    if (!cb.next(fb)) throw_narrow(b, key.to);
    if (result != Ordering::Equal) continue;  // keep scanning to validate width
    if (key.mode == KeyMode::Numeric) {
      result = compare_decimal(fa, fb);
    } else {
      const int c = fa.compare(fb);
      result = c < 0 ? Ordering::Less : (c > 0 ? Ordering::Greater : Ordering::Equal);
    }
  }
  return key.direction == Direction::Descending ? invert(result) : result;
}

Ordering compare_records(const Record& a, const Record& b, const KeyRange& key) {
  if (a.width() < key.to || b.width() < key.to) {
    throw Error("record narrower than key " + key.to_string());
  }
  Ordering result = Ordering::Equal;
  for (std::size_t col = key.from; col <= key.to && result == Ordering::Equal; ++col) {
    const std::string& fa = a.field(col);
    const std::string& fb = b.field(col);
    if (key.mode == KeyMode::Numeric) {
      result = compare_decimal(fa, fb);
    } else {
      const int c = fa.compare(fb);
      result = c < 0 ? Ordering::Less : (c > 0 ? Ordering::Greater : Ordering::Equal);
    }
  }
  return key.direction == Direction::Descending ? invert(result) : result;
}

Record project(const Record& r, std::span<const std::size_t> columns) {
  if (columns.empty()) throw Error("projection needs at least one column");
  std::vector<std::string> out;
  out.reserve(columns.size());
  for (std::size_t c : columns) out.push_back(r.field(c));
  return Record(std::move(out));
}

std::size_t count_fields(std::string_view line) noexcept {
  if (line.empty()) return 0;
  std::size_t n = 1;
  for (char c : line) n += (c == ' ');
  return n;
}

std::string_view field_of(std::string_view line, std::size_t index) {
  if (index == 0) throw Error("column index must be positive");
  FieldCursor cursor(line);
  std::string_view f;
  for (std::size_t col = 1; col <= index; ++col) {
    if (!cursor.next(f)) throw_narrow(line, index);
  }
  return f;
}

std::string_view key_text(std::string_view line, const KeyRange& key) {
  FieldCursor cursor(line);
  std::string_view f;
  const char* begin = nullptr;
  for (std::size_t col = 1; col <= key.to; ++col) {
    if (!cursor.next(f)) throw_narrow(line, key.to);
    if (col == key.from) begin = f.data();
  }
  return std::string_view(begin, static_cast<std::size_t>(f.data() + f.size() - begin));
}

void project_line(std::string_view line, std::span<const std::size_t> columns,
                  std::string& out) {
  if (columns.empty()) throw Error("projection needs at least one column");
  thread_local std::vector<std::string_view> fields;
  fields.clear();
  FieldCursor cursor(line);
  std::string_view f;
  while (cursor.next(f)) fields.push_back(f);
  bool first = true;
  for (std::size_t c : columns) {
    if (c == 0 || c > fields.size()) {
      throw Error("column " + std::to_string(c) + " out of range for record of width " +
                  std::to_string(fields.size()));
    }
    if (!first) out += ' ';
    out.append(fields[c - 1]);
    first = false;
  }
}

}  // namespace leanstack
