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

#include "leanstack/datagen.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>

#include "leanstack/error.hpp"
#include "leanstack/io.hpp"
#include "leanstack/record.hpp"

namespace leanstack {
namespace {

constexpr std::array<std::string_view, 24> kSyllables = {
    "ka", "ri", "to", "an", "me", "su", "lo", "ne", "vi", "da", "po", "el",
    "mu", "sa", "te", "ro", "gi", "ba", "fe", "ni", "or", "cu", "ha", "ze"};

constexpr std::uint64_t kTextStream = 1;
constexpr std::uint64_t kItemStream = 2;
constexpr std::uint64_t kOrderStream = 3;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) noexcept {
  // Multiply-shift; bias is negligible for the small bounds used here.
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * bound) >> 64);
}

// Runs job(i) for i in [0, n) across up to hardware_concurrency threads.
template <class Fn>
void parallel_for(std::size_t n, Fn job) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < n; i = next++) job(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void append_padded(std::string& out, char prefix, std::uint64_t value, int width) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%c%0*llu", prefix, width,
                              static_cast<unsigned long long>(value));
  out.append(buf, static_cast<std::size_t>(n));
}

void append_cents(std::string& out, std::uint64_t cents, int width) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%0*llu.%02llu", width - 3,
                              static_cast<unsigned long long>(cents / 100),
                              static_cast<unsigned long long>(cents % 100));
  out.append(buf, static_cast<std::size_t>(n));
}

std::string file_name(std::string_view prefix, std::size_t index, int width,
                      std::string_view ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*s-%0*zu.%.*s", static_cast<int>(prefix.size()),
                prefix.data(), width, index, static_cast<int>(ext.size()), ext.data());
  return buf;
}

// Price in cents for an item id, shared by the item and order generators.
std::uint64_t item_price_cents(std::uint64_t seed, std::uint64_t item) noexcept {
  return 10'000 + splitmix64(seed ^ splitmix64(item + 0x51ed)) % 90'000;
}

}  // namespace

FileKind ManifestEntry::kind() const {
  const std::string name = path.filename().string();
  if (name.starts_with("text-")) return FileKind::kText;
  if (name.starts_with("item-")) return FileKind::kItem;
  if (name.starts_with("order-")) return FileKind::kOrder;
  return FileKind::kOther;
}

std::uint64_t Manifest::total_bytes() const {
  std::uint64_t total = 0;
  for (const auto& e : entries) total += e.bytes;
  return total;
}

std::uint64_t Manifest::bytes_of(FileKind kind) const {
  std::uint64_t total = 0;
  for (const auto& e : entries) {
    if (e.kind() == kind) total += e.bytes;
  }
  return total;
}

std::vector<std::filesystem::path> Manifest::paths_of(FileKind kind) const {
  std::vector<std::filesystem::path> out;
  for (const auto& e : entries) {
    if (e.kind() == kind) out.push_back(e.path);
  }
  return out;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& dir) {
  OutputFile file(dir / kManifestName);
  for (const auto& e : manifest.entries) {
    file.stream() << e.path.filename().string() << ' ' << e.bytes << ' ' << e.records << '\n';
  }
  file.close();
}

Manifest read_manifest(const std::filesystem::path& path) {
  const auto file = std::filesystem::is_directory(path) ? path / kManifestName : path;
  const auto base = file.parent_path();
  auto in = open_input(file);
  Manifest manifest;
  std::string line;
  std::uint64_t record = 0;
  while (read_line(*in, line)) {
    ++record;
    try {
      const Record r = Record::parse(line);
      if (r.width() != 3) throw Error("expected 3 fields");
      ManifestEntry e;
      e.path = base / r.field(1);
      e.bytes = std::stoull(r.field(2));
      e.records = std::stoull(r.field(3));
      manifest.entries.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw Error("manifest '" + file.string() + "' record " + std::to_string(record) + ": " +
                  ex.what());
    }
  }
  return manifest;
}

std::string vocabulary_word(std::size_t rank) {
  // Bijective base-24 numeral of rank + 24: every word has two or more
  // syllables and distinct ranks give distinct words.
  std::size_t n = rank + kSyllables.size();
  std::vector<std::string_view> parts;
  while (n > 0) {
    const std::size_t digit = (n - 1) % kSyllables.size();
    parts.push_back(kSyllables[digit]);
    n = (n - 1) / kSyllables.size();
  }
  std::string word;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) word.append(*it);
  return word;
}

ZipfSampler::ZipfSampler(std::size_t n, double exponent) : cdf_(n) {
  if (n == 0) throw Error("zipf: vocabulary must be non-empty");
  if (!(exponent > 0)) throw Error("zipf: exponent must be positive");
  double sum = 0;
  for (std::size_t r = 1; r <= n; ++r) {
    sum += std::pow(static_cast<double>(r), -exponent);
    cdf_[r - 1] = sum;
  }
  for (auto& c : cdf_) c /= sum;
  cdf_.back() = 1.0;
}

std::size_t ZipfSampler::rank_for(double uniform) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), uniform);
  return static_cast<std::size_t>(std::min(it, cdf_.end() - 1) - cdf_.begin()) + 1;
}

double ZipfSampler::probability(std::size_t rank) const {
  return rank == 1 ? cdf_[0] : cdf_[rank - 1] - cdf_[rank - 2];
}

std::uint64_t file_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x100000001b3ULL + index));
}

double unit_uniform(std::mt19937_64& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

namespace {

// Adds generated files to the directory manifest, replacing entries with
// the same file name so text and tables can share one directory.
void record_in_manifest(const Manifest& generated, const std::filesystem::path& dir) {
  Manifest merged;
  if (std::filesystem::exists(dir / kManifestName)) {
    for (auto& e : read_manifest(dir).entries) {
      const bool replaced =
          std::any_of(generated.entries.begin(), generated.entries.end(), [&](const auto& g) {
            return g.path.filename() == e.path.filename();
          });
      if (!replaced) merged.entries.push_back(std::move(e));
    }
  }
  merged.entries.insert(merged.entries.end(), generated.entries.begin(), generated.entries.end());
  std::sort(merged.entries.begin(), merged.entries.end(),
            [](const auto& a, const auto& b) { return a.path.filename() < b.path.filename(); });
  write_manifest(merged, dir);
}

}  // namespace

Manifest gen_text(const TextCorpusSpec& spec, const std::filesystem::path& out_dir) {
  if (spec.target_file_bytes == 0) throw Error("gen text: target file size must be positive");
  if (spec.total_bytes < spec.target_file_bytes) {
    throw Error("gen text: total bytes must be at least the target file size");
  }
  if (spec.vocabulary < 2) throw Error("gen text: vocabulary must have at least 2 words");
  std::filesystem::create_directories(out_dir);

  const std::uint64_t files =
      (spec.total_bytes + spec.target_file_bytes - 1) / spec.target_file_bytes;
  const ZipfSampler zipf(spec.vocabulary, spec.zipf_exponent);
  std::vector<std::string> words(spec.vocabulary);
  for (std::size_t r = 1; r <= spec.vocabulary; ++r) words[r - 1] = vocabulary_word(r);

  Manifest manifest;
  manifest.entries.resize(files);
  parallel_for(files, [&](std::size_t i) {
    const std::uint64_t target = spec.total_bytes / files + (i < spec.total_bytes % files ? 1 : 0);
    std::mt19937_64 rng(file_seed(spec.seed, kTextStream, i));
    const auto path = out_dir / file_name("text", i, 5, "txt");
    OutputFile file(path);
    std::string line;
    std::uint64_t written = 0;
    std::uint64_t lines = 0;
    bool full = false;
    while (!full) {
      line.clear();
      const std::uint64_t words_in_line = 8 + uniform_below(rng, 9);
      for (std::uint64_t w = 0; w < words_in_line; ++w) {
        const std::string& word = words[zipf.rank_for(unit_uniform(rng)) - 1];
        // +1 for the separating space or the terminating LF.
        if (written + line.size() + word.size() + 1 > target) {
          full = true;
          break;
        }
        if (!line.empty()) line += ' ';
        line += word;
      }
      if (line.empty()) break;
      line += '\n';
      file.stream() << line;
      written += line.size();
      ++lines;
    }
    file.close();
    manifest.entries[i] = {path, written, lines};
  });
  record_in_manifest(manifest, out_dir);
  return manifest;
}

Manifest gen_tables(const TableSpec& spec, const std::filesystem::path& out_dir) {
  if (!(spec.item_fraction > 0.0 && spec.item_fraction < 1.0)) {
    throw Error("gen tables: item fraction must lie in (0, 1)");
  }
  if (spec.files_per_table == 0) throw Error("gen tables: files per table must be positive");
  if (spec.categories == 0 || spec.categories > 10'000) {
    throw Error("gen tables: categories must lie in [1, 10000]");
  }
  const auto item_bytes = static_cast<std::uint64_t>(
      std::llround(static_cast<double>(spec.total_bytes) * spec.item_fraction));
  const std::uint64_t items = item_bytes / kItemRowBytes;
  const std::uint64_t orders = (spec.total_bytes - item_bytes) / kOrderRowBytes;
  if (items == 0 || orders == 0) throw Error("gen tables: total bytes too small for one row per table");
  std::filesystem::create_directories(out_dir);

  const std::size_t per_table = spec.files_per_table;
  Manifest manifest;
  manifest.entries.resize(2 * per_table);

  parallel_for(2 * per_table, [&](std::size_t job) {
    const bool is_item = job < per_table;
    const std::size_t k = is_item ? job : job - per_table;
    const std::uint64_t rows = is_item ? items : orders;
    const std::uint64_t begin = rows * k / per_table;
    const std::uint64_t end = rows * (k + 1) / per_table;
    std::mt19937_64 rng(file_seed(spec.seed, is_item ? kItemStream : kOrderStream, k));
    const auto path = out_dir / file_name(is_item ? "item" : "order", k, 3, "tbl");
    OutputFile file(path);
    std::string row;
    for (std::uint64_t id = begin; id < end; ++id) {
      row.clear();
      if (is_item) {
        append_padded(row, 'I', id, 10);
        row += ' ';
        append_padded(row, 'C', uniform_below(rng, spec.categories), 4);
        row += ' ';
        append_cents(row, item_price_cents(spec.seed, id), 6);
        row += ' ';
        row += std::to_string(1000 + uniform_below(rng, 9000));
      } else {
        const std::uint64_t item = uniform_below(rng, items);
        const std::uint64_t quantity = 1 + uniform_below(rng, 9);
        append_padded(row, 'O', id, 10);
        row += ' ';
        append_padded(row, 'I', item, 10);
        row += ' ';
        append_padded(row, 'U', uniform_below(rng, 100'000'000), 8);
        row += ' ';
        row += static_cast<char>('0' + quantity);
        row += ' ';
        append_cents(row, quantity * item_price_cents(spec.seed, item), 7);
      }
      row += '\n';
      file.stream() << row;
    }
    file.close();
    manifest.entries[job] = {path, (end - begin) * (is_item ? kItemRowBytes : kOrderRowBytes),
                             end - begin};
  });
  record_in_manifest(manifest, out_dir);
  return manifest;
}

}  // namespace leanstack
