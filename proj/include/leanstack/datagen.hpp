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

// Seeded generators for the two dataset shapes: a many-file text corpus
// whose file count grows with volume, and item/order tables split into a
// fixed number of files whose size grows with volume.

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace leanstack {

struct TextCorpusSpec {
  std::uint64_t total_bytes = 0;
  std::uint64_t target_file_bytes = 5'000'000;
  std::size_t vocabulary = 50'000;
  double zipf_exponent = 1.1;
  std::uint64_t seed = 1;
};

struct TableSpec {
  std::uint64_t total_bytes = 0;
  std::size_t files_per_table = 4;
  double item_fraction = 0.62;
  std::size_t categories = 1000;
  std::uint64_t seed = 1;
};

// Fixed-width layouts, so row counts follow from byte volumes.
//   item:  item_id category price stock
//   order: order_id item_id customer_id quantity total
inline constexpr std::size_t kItemRowBytes = 30;
inline constexpr std::size_t kOrderRowBytes = 44;

enum class FileKind { kText, kItem, kOrder, kOther };

struct ManifestEntry {
  std::filesystem::path path;  // absolute once read back
  std::uint64_t bytes = 0;
  std::uint64_t records = 0;

  FileKind kind() const;
};

/// Record file of `path bytes records` rows; paths relative to its directory.
struct Manifest {
  std::vector<ManifestEntry> entries;

  std::uint64_t total_bytes() const;
  std::uint64_t bytes_of(FileKind kind) const;
  std::vector<std::filesystem::path> paths_of(FileKind kind) const;
};

inline constexpr const char* kManifestName = "manifest.txt";

void write_manifest(const Manifest& manifest, const std::filesystem::path& dir);
/// Reads `path` (a manifest file, or a directory holding manifest.txt).
Manifest read_manifest(const std::filesystem::path& path);

/// Deterministic vocabulary word for a 1-based frequency rank.
std::string vocabulary_word(std::size_t rank);

/// Samples 1-based ranks with P(r) proportional to r^-exponent.
class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double exponent);
  /// `uniform` must lie in [0, 1).
  std::size_t rank_for(double uniform) const;
  double probability(std::size_t rank) const;
  std::size_t size() const noexcept { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
};

/// Generator seed for one file, derived from (seed, stream, file index).
std::uint64_t file_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept;
/// Uniform double in [0, 1) from the top 53 bits.
double unit_uniform(std::mt19937_64& rng) noexcept;

Manifest gen_text(const TextCorpusSpec& spec, const std::filesystem::path& out_dir);
Manifest gen_tables(const TableSpec& spec, const std::filesystem::path& out_dir);

}  // namespace leanstack
