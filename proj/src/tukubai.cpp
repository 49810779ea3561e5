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

#include "leanstack/tukubai.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <memory>
#include <optional>
#include <vector>

#include "leanstack/decimal.hpp"
#include "leanstack/error.hpp"
#include "leanstack/io.hpp"

namespace leanstack {
namespace {

// Record order used by msort, dmerge and the grouping commands.
struct KeyOrder {
  KeyRange key;

  Ordering operator()(std::string_view a, std::string_view b) const {
    return compare_lines(a, b, key);
  }
  void validate(std::string_view line, std::uint64_t record) const {
    if (count_fields(line) < key.to) {
      throw Error("record " + std::to_string(record) + " has " +
                  std::to_string(count_fields(line)) + " field(s); key " + key.to_string() +
                  " needs " + std::to_string(key.to));
    }
  }
};

// Raw byte order of whole lines.
struct ByteOrder {
  Ordering operator()(std::string_view a, std::string_view b) const noexcept {
    const int c = a.compare(b);
    return c < 0 ? Ordering::Less : (c > 0 ? Ordering::Greater : Ordering::Equal);
  }
  void validate(std::string_view, std::uint64_t) const noexcept {}
};

std::string describe_stream(std::span<const std::string> labels, std::size_t stream) {
  if (stream <= labels.size()) return labels[stream - 1];
  return "input " + std::to_string(stream);
}

// Reads records one at a time and verifies that each is not ordered
// before its predecessor.
template <class Order>
class CheckedReader {
 public:
  CheckedReader(std::istream& in, Order order, std::size_t stream, std::string label)
      : in_(&in), order_(std::move(order)), stream_(stream), label_(std::move(label)) {}

  bool next() {
    cur_.swap(prev_);
    if (!read_line(*in_, cur_)) {
      if (in_->bad()) throw Error(label_ + ": read failure");
      exhausted_ = true;
      return false;
    }
    ++record_;
    order_.validate(cur_, record_);
    if (record_ == 1) {
      relation_ = Ordering::Greater;
      return true;
    }
    try {
      relation_ = order_(prev_, cur_);
    } catch (const OrderViolation&) {
      throw;
    } catch (const Error& e) {
      throw Error(label_ + ": record " + std::to_string(record_) + ": " + e.what());
    }
    if (relation_ == Ordering::Greater) {
      throw OrderViolation(stream_, record_,
                           label_ + ": record " + std::to_string(record_) +
                               " is out of order (input must be sorted)");
    }
    return true;
  }

  std::string_view current() const noexcept { return cur_; }
  std::string& current_buffer() noexcept { return cur_; }
  std::uint64_t record() const noexcept { return record_; }
  /// True if the current record starts a new key group.
  bool starts_group() const noexcept { return relation_ != Ordering::Equal; }
  bool exhausted() const noexcept { return exhausted_; }

 private:
  std::istream* in_;
  Order order_;
  std::size_t stream_;
  std::string label_;
  std::string cur_;
  std::string prev_;
  std::uint64_t record_ = 0;
  Ordering relation_ = Ordering::Greater;
  bool exhausted_ = false;
};

template <class Order>
void kway_merge(std::span<std::istream* const> inputs, std::ostream& out, const Order& order,
                std::span<const std::string> labels) {
  std::vector<CheckedReader<Order>> readers;
  readers.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    readers.emplace_back(*inputs[i], order, i + 1, describe_stream(labels, i + 1));
  }

  // Heap of reader indices; the top is the smallest record, lowest index on ties.
  auto later = [&](std::size_t a, std::size_t b) {
    const Ordering o = order(readers[a].current(), readers[b].current());
    return o == Ordering::Greater || (o == Ordering::Equal && a > b);
  };
  std::vector<std::size_t> heap;
  heap.reserve(readers.size());
  for (std::size_t i = 0; i < readers.size(); ++i) {
    if (readers[i].next()) {
      heap.push_back(i);
      std::push_heap(heap.begin(), heap.end(), later);
    }
  }
  while (!heap.empty()) {
    std::pop_heap(heap.begin(), heap.end(), later);
    const std::size_t top = heap.back();
    auto& reader = readers[top];
    out.write(reader.current().data(), static_cast<std::streamsize>(reader.current().size()));
    out.put('\n');
    if (reader.next()) {
      std::push_heap(heap.begin(), heap.end(), later);
    } else {
      heap.pop_back();
    }
  }
}

// Arena of fixed-size blocks holding the lines of one in-memory run.
class LineArena {
 public:
  explicit LineArena(std::size_t block_size) : block_size_(block_size) {}

  std::string_view store(std::string_view line) {
    if (line.size() > block_size_) {
      oversized_.push_back(std::make_unique<char[]>(line.size()));
      oversized_bytes_ += line.size();
      std::memcpy(oversized_.back().get(), line.data(), line.size());
      return {oversized_.back().get(), line.size()};
    }
    if (blocks_in_use_ == 0 || used_ + line.size() > block_size_) {
      if (blocks_in_use_ == blocks_.size()) {
        blocks_.push_back(std::make_unique<char[]>(block_size_));
      }
      ++blocks_in_use_;
      used_ = 0;
    }
    char* dst = blocks_[blocks_in_use_ - 1].get() + used_;
    std::memcpy(dst, line.data(), line.size());
    used_ += line.size();
    return {dst, line.size()};
  }

  /// Bytes held by the current run.
  std::uint64_t bytes_in_use() const noexcept {
    return blocks_in_use_ * block_size_ + oversized_bytes_;
  }
  /// Bytes the next store(line) would add.
  std::uint64_t growth_for(std::size_t len) const noexcept {
    if (len > block_size_) return len;
    return (blocks_in_use_ == 0 || used_ + len > block_size_) ? block_size_ : 0;
  }

  void reset() noexcept {
    blocks_in_use_ = 0;
    used_ = 0;
    oversized_.clear();
    oversized_bytes_ = 0;
  }

 private:
  std::size_t block_size_;
  std::vector<std::unique_ptr<char[]>> blocks_;
  std::size_t blocks_in_use_ = 0;
  std::size_t used_ = 0;
  std::vector<std::unique_ptr<char[]>> oversized_;
  std::uint64_t oversized_bytes_ = 0;
};

void write_lines(std::ostream& out, std::span<const std::string_view> lines) {
  for (std::string_view l : lines) {
    out.write(l.data(), static_cast<std::streamsize>(l.size()));
    out.put('\n');
  }
}

template <class Order>
SortStats external_sort(std::istream& in, std::ostream& out, const Order& order,
                        const KeyRange& run_key, const SortOptions& opts) {
  const std::uint64_t budget = opts.budget.bytes();
  const std::size_t block_size = static_cast<std::size_t>(
      std::clamp<std::uint64_t>(budget / 16, 4096, std::uint64_t{1} << 20));
  const std::size_t fan_in = std::max<std::size_t>(opts.max_fan_in, 2);

  LineArena arena(block_size);
  std::vector<std::string_view> entries;
  std::optional<ScratchDir> scratch;
  std::vector<SortedRun> runs;
  SortStats stats;

  // stable_sort may allocate a buffer of half the entries.
  auto index_bytes = [&](std::size_t n) { return n * sizeof(std::string_view) * 3 / 2; };
  auto less = [&](std::string_view a, std::string_view b) { return order(a, b) == Ordering::Less; };

  auto new_run_path = [&]() {
    if (!scratch) scratch.emplace(opts.tmpdir.empty() ? default_tmpdir() : opts.tmpdir, "msort");
    return scratch->path() / ("run-" + std::to_string(stats.runs_spilled++));
  };

  auto spill = [&]() {
    std::stable_sort(entries.begin(), entries.end(), less);
    SortedRun run{new_run_path(), run_key, entries.size()};
    OutputFile file(run.path);
    write_lines(file.stream(), entries);
    file.close();
    runs.push_back(std::move(run));
    entries.clear();
    arena.reset();
  };

  std::string line;
  while (read_line(in, line)) {
    ++stats.records;
    order.validate(line, stats.records);
    // The index grows explicitly so its capacity is always accounted for;
    // capacity kept across a spill fitted the budget alongside more data.
    const std::size_t capacity = entries.size() < entries.capacity()
                                     ? entries.capacity()
                                     : std::max<std::size_t>(64, entries.capacity() * 2);
    if (!entries.empty() && arena.bytes_in_use() + arena.growth_for(line.size()) +
                                    index_bytes(capacity) > budget) {
      spill();
    }
    if (entries.size() == entries.capacity()) entries.reserve(capacity);
    entries.push_back(arena.store(line));
  }
  if (in.bad()) throw Error("msort: read failure");

  if (runs.empty()) {
    std::stable_sort(entries.begin(), entries.end(), less);
    write_lines(out, entries);
    return stats;
  }
  if (!entries.empty()) spill();
  entries.shrink_to_fit();

  auto merge_runs = [&](std::span<const SortedRun> group, std::ostream& dst) {
    std::vector<std::unique_ptr<std::istream>> files;
    std::vector<std::istream*> streams;
    for (const auto& r : group) {
      files.push_back(open_input(r.path));
      streams.push_back(files.back().get());
    }
    kway_merge(std::span<std::istream* const>(streams), dst, order, {});
    for (const auto& r : group) {
      std::error_code ec;
      std::filesystem::remove(r.path, ec);
    }
  };

  // Runs are kept in input order and merged in consecutive groups, so
  // index tie-breaking keeps the sort stable across passes.
  while (runs.size() > fan_in) {
    ++stats.merge_passes;
    std::vector<SortedRun> next;
    for (std::size_t i = 0; i < runs.size(); i += fan_in) {
      const std::size_t n = std::min(fan_in, runs.size() - i);
      std::span<const SortedRun> group(runs.data() + i, n);
      SortedRun merged{new_run_path(), run_key, 0};
      for (const auto& r : group) merged.count += r.count;
      OutputFile file(merged.path);
      merge_runs(group, file.stream());
      file.close();
      next.push_back(std::move(merged));
    }
    runs = std::move(next);
  }
  ++stats.merge_passes;
  merge_runs(runs, out);
  return stats;
}

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

}  // namespace

MemoryBudget::MemoryBudget(std::uint64_t bytes) : bytes_(bytes) {
  if (bytes == 0) throw Error("memory budget must be positive");
}

std::uint64_t parse_byte_count(std::string_view text) {
  std::uint64_t value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc()) {
    throw Error("invalid byte count '" + std::string(text) + "'");
  }
  std::string_view suffix(ptr, static_cast<std::size_t>(end - ptr));
  unsigned shift = 0;
  if (suffix == "K" || suffix == "KiB") shift = 10;
  else if (suffix == "M" || suffix == "MiB") shift = 20;
  else if (suffix == "G" || suffix == "GiB") shift = 30;
  else if (!suffix.empty()) throw Error("invalid byte count '" + std::string(text) + "'");
  if (shift && value > (~std::uint64_t{0} >> shift)) {
    throw Error("byte count '" + std::string(text) + "' overflows");
  }
  return value << shift;
}

SortStats msort(std::istream& in, std::ostream& out, const KeyRange& key,
                const SortOptions& opts) {
  return external_sort(in, out, KeyOrder{key}, key, opts);
}

SortStats sort_lines(std::istream& in, std::ostream& out, const SortOptions& opts) {
  return external_sort(in, out, ByteOrder{}, KeyRange{}, opts);
}

std::uint64_t lcnt(std::istream& in) {
  std::vector<char> buf(1 << 16);
  std::uint64_t lines = 0;
  char last = '\n';
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto n = static_cast<std::size_t>(in.gcount());
    if (n == 0) break;
    lines += static_cast<std::uint64_t>(std::count(buf.data(), buf.data() + n, '\n'));
    last = buf[n - 1];
  }
  if (in.bad()) throw Error("lcnt: read failure");
  return lines + (last != '\n' ? 1 : 0);
}

void count_by_key(std::istream& in, std::ostream& out, const KeyRange& key) {
  CheckedReader reader(in, KeyOrder{key}, 1, "input");
  std::string group;
  std::uint64_t count = 0;
  auto emit = [&]() {
    out << group << ' ' << count << '\n';
  };
  while (reader.next()) {
    if (reader.starts_group()) {
      if (count) emit();
      group.assign(key_text(reader.current(), key));
      count = 0;
    }
    ++count;
  }
  if (count) emit();
}

void dmerge(std::span<std::istream* const> inputs, std::ostream& out, const KeyRange& key,
            std::span<const std::string> labels) {
  kway_merge(inputs, out, KeyOrder{key}, labels);
}

void sm2(std::istream& in, std::ostream& out, const KeyRange& key, const KeyRange& sum) {
  if (!(sum.to < key.from || sum.from > key.to)) {
    throw Error("sm2: key " + key.to_string() + " and sum columns " +
                std::to_string(sum.from) + ".." + std::to_string(sum.to) + " overlap");
  }
  CheckedReader reader(in, KeyOrder{key}, 1, "input");
  const std::size_t needed = std::max(key.to, sum.to);

  std::string group;
  std::vector<Decimal> totals(sum.width());
  bool open = false;
  std::string line_out;
  auto emit = [&]() {
    line_out = group;
    for (const auto& t : totals) {
      line_out += ' ';
      t.append_to(line_out);
    }
    line_out += '\n';
    out << line_out;
  };

  while (reader.next()) {
    std::string_view line = reader.current();
    if (count_fields(line) < needed) {
      throw Error("sm2: record " + std::to_string(reader.record()) + " has fewer than " +
                  std::to_string(needed) + " fields");
    }
    if (reader.starts_group()) {
      if (open) emit();
      group.assign(key_text(line, key));
      std::fill(totals.begin(), totals.end(), Decimal{});
      open = true;
    }
    for (std::size_t c = sum.from; c <= sum.to; ++c) {
      try {
        totals[c - sum.from] += Decimal::parse(field_of(line, c));
      } catch (const Error& e) {
        throw Error("sm2: record " + std::to_string(reader.record()) + ": " + e.what());
      }
    }
  }
  if (open) emit();
}

bool is_valid_text(std::string_view text) noexcept {
  const auto* p = reinterpret_cast<const unsigned char*>(text.data());
  const auto* end = p + text.size();
  while (p < end) {
    const unsigned char c = *p;
    if (c == 0) return false;
    if (c < 0x80) {
      ++p;
      continue;
    }
    int extra;
    std::uint32_t cp;
    if ((c & 0xE0) == 0xC0) { extra = 1; cp = c & 0x1F; }
    else if ((c & 0xF0) == 0xE0) { extra = 2; cp = c & 0x0F; }
    else if ((c & 0xF8) == 0xF0) { extra = 3; cp = c & 0x07; }
    else return false;
    if (end - p <= extra) return false;
    for (int i = 1; i <= extra; ++i) {
      if ((p[i] & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (p[i] & 0x3F);
    }
    static constexpr std::uint32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    p += extra + 1;
  }
  return true;
}

void tokenize(std::istream& in, std::ostream& out) {
  std::string line;
  std::string words;
  std::uint64_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (!is_valid_text(line)) {
      throw Error("tokenize: line " + std::to_string(line_no) +
                  " contains binary data or invalid UTF-8");
    }
    words.clear();
    std::size_t i = 0;
    const std::size_t n = line.size();
    while (i < n) {
      while (i < n && is_space(line[i])) ++i;
      const std::size_t start = i;
      while (i < n && !is_space(line[i])) ++i;
      if (i > start) {
        words.append(line, start, i - start);
        words += '\n';
      }
    }
    out.write(words.data(), static_cast<std::streamsize>(words.size()));
  }
  if (in.bad()) throw Error("tokenize: read failure");
}

std::uint64_t count_occurrences(std::string_view line, std::string_view needle) noexcept {
  if (needle.empty()) return 0;
  std::uint64_t n = 0;
  for (std::size_t pos = line.find(needle); pos != std::string_view::npos;
       pos = line.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

std::uint64_t grep_count(std::istream& in, std::string_view needle) {
  if (needle.empty()) throw Error("grep: needle must not be empty");
  std::string line;
  std::uint64_t total = 0;
  while (read_line(in, line)) total += count_occurrences(line, needle);
  if (in.bad()) throw Error("grep: read failure");
  return total;
}

void select_rows(std::istream& in, std::ostream& out, std::size_t column,
                 std::string_view threshold) {
  if (column == 0) throw Error("select: column index must be positive");
  if (!is_decimal(threshold)) {
    throw Error("select: threshold '" + std::string(threshold) + "' is not a decimal");
  }
  std::string line;
  std::uint64_t record = 0;
  while (read_line(in, line)) {
    ++record;
    try {
      if (compare_decimal(field_of(line, column), threshold) == Ordering::Greater) {
        out << line << '\n';
      }
    } catch (const Error& e) {
      throw Error("select: record " + std::to_string(record) + ": " + e.what());
    }
  }
  if (in.bad()) throw Error("select: read failure");
}

void merge_join(std::istream& left, std::istream& right, std::ostream& out,
                const KeyRange& left_key, const KeyRange& right_key) {
  if (left_key.width() != right_key.width() || left_key.mode != right_key.mode ||
      left_key.direction != right_key.direction) {
    throw Error("join: keys " + left_key.to_string() + " and " + right_key.to_string() +
                " are not comparable");
  }
  // Compares extracted key texts field by field.
  const KeyRange cross{1, left_key.width(), left_key.mode, left_key.direction};

  CheckedReader lhs(left, KeyOrder{left_key}, 1, "left input");
  CheckedReader rhs(right, KeyOrder{right_key}, 2, "right input");

  // Right records sharing one key, stored as (key text, non-key suffix).
  std::string group_key;
  std::vector<std::string> group_rest;
  bool right_pending = rhs.next();

  auto load_group = [&]() {
    group_rest.clear();
    if (!right_pending) return false;
    group_key.assign(key_text(rhs.current(), right_key));
    do {
      std::string rest;
      std::string_view line = rhs.current();
      const std::size_t width = count_fields(line);
      for (std::size_t c = 1; c <= width; ++c) {
        if (c >= right_key.from && c <= right_key.to) continue;
        rest += ' ';
        rest.append(field_of(line, c));
      }
      group_rest.push_back(std::move(rest));
      right_pending = rhs.next();
    } while (right_pending && !rhs.starts_group());
    return true;
  };

  bool have_group = load_group();
  bool have_left = lhs.next();
  std::string line_out;
  while (have_left && have_group) {
    const std::string_view lkey = key_text(lhs.current(), left_key);
    const Ordering o = compare_lines(lkey, group_key, cross);
    if (o == Ordering::Less) {
      have_left = lhs.next();
    } else if (o == Ordering::Greater) {
      have_group = load_group();
    } else {
      for (const auto& rest : group_rest) {
        line_out.assign(lhs.current());
        line_out += rest;
        line_out += '\n';
        out << line_out;
      }
      have_left = lhs.next();
    }
  }
  // Drain both sides so an order violation anywhere is still reported.
  while (have_left) have_left = lhs.next();
  while (right_pending) right_pending = rhs.next();
}

void self(std::istream& in, std::ostream& out, std::span<const std::size_t> columns) {
  if (columns.empty()) throw Error("self: at least one column is required");
  std::string line;
  std::string projected;
  std::uint64_t record = 0;
  while (read_line(in, line)) {
    ++record;
    projected.clear();
    try {
      project_line(line, columns, projected);
    } catch (const Error& e) {
      throw Error("self: record " + std::to_string(record) + ": " + e.what());
    }
    projected += '\n';
    out << projected;
  }
  if (in.bad()) throw Error("self: read failure");
}

}  // namespace leanstack
