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

// Benchmark harness: the six micro-benchmark workloads, their single-node
// oracle and distributed plans, digest verification and report files.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "leanstack/cluster.hpp"
#include "leanstack/datagen.hpp"
#include "leanstack/stats.hpp"
#include "leanstack/tukubai.hpp"

namespace leanstack {

enum class OrderSensitivity { kDeterministic, kOrderInsensitive };
enum class Engine { kOracle, kDistributed };

std::string engine_name(Engine engine);
Engine parse_engine(std::string_view text);

struct Workload {
  std::string name;  // grep | sort | wordcount | select | join | aggregation
  std::string needle = "an";
  std::size_t select_column = 3;  // item price
  std::string threshold = "900";
  KeyRange item_key{1, 1};   // item_id in the item table
  KeyRange order_key{2, 2};  // item_id in the order table
  std::size_t group_column = 2;  // category
  std::size_t sum_column = 3;    // price

  OrderSensitivity order_sensitivity() const;
};

const std::vector<std::string>& workload_names();
/// Workload with default parameters; throws Error for unknown names.
Workload make_workload(std::string_view name);

struct WorkloadReport {
  std::string workload;
  Engine engine = Engine::kOracle;
  std::uint64_t input_bytes = 0;
  double wall_time = 0.0;  // mean of repetitions
  double rate = 0.0;       // input_bytes / wall_time
  std::string digest;      // "md5:<hex>"
  std::vector<double> repetitions;
};

struct RunOptions {
  SortOptions sort;
  std::size_t repetitions = 1;
  /// When set, the workload output is kept here.
  std::filesystem::path output;
  /// Scratch parent for leader-side temporaries.
  std::filesystem::path tmpdir;
};

/// Input volume a workload reads from the dataset.
std::uint64_t workload_input_bytes(const Workload& w, const Manifest& data);

/// Scatters every manifest file to data/<file name> on the cluster.
void load_dataset(Cluster& cluster, const Manifest& data);

/// Runs the workload plan. The distributed engine needs `cluster` with
/// the dataset already loaded.
WorkloadReport run_workload(const Workload& w, const Manifest& data, Engine engine,
                            Cluster* cluster, const RunOptions& opts = {});

/// Digest of an output file: raw bytes, or the canonically sorted lines
/// for order-insensitive workloads. Prefixed by the algorithm name.
std::string output_digest(const std::filesystem::path& output, OrderSensitivity sensitivity,
                          const SortOptions& sort = {});

struct Agreement {
  bool agree = false;
  std::vector<std::pair<std::string, std::string>> digests;  // (engine, digest)
  std::string details;
};

/// Compares the digests of two or more (engine, output file) pairs.
Agreement verify_agreement(const std::vector<std::pair<std::string, std::filesystem::path>>& outputs,
                           OrderSensitivity sensitivity, const SortOptions& sort = {});

// Report files: a header line, then one record per repetition:
//   workload engine bytes seconds rate digest
inline constexpr std::string_view kReportHeader = "workload engine bytes seconds rate digest";

struct ReportRow {
  std::string workload;
  std::string engine;
  std::uint64_t bytes = 0;
  double seconds = 0.0;
  double rate = 0.0;
  std::string digest;
};

void write_report(std::ostream& out, const std::vector<WorkloadReport>& reports);
void write_report(const std::filesystem::path& path, const std::vector<WorkloadReport>& reports);
std::vector<ReportRow> read_report(const std::filesystem::path& path);

/// Agreement across every row of the given reports (same workload required).
/// Compares digests per workload across every row of the given reports.
Agreement verify_reports(const std::vector<std::filesystem::path>& reports);

struct ReportValidation {
  std::string workload;
  std::string engine;
  ValidationSummary seconds;
  ValidationSummary rate;
};

/// Groups rows by (workload, engine) and validates times and rates.
std::vector<ReportValidation> validate_report(const std::vector<ReportRow>& rows,
                                              double confidence = 0.95);

}  // namespace leanstack
