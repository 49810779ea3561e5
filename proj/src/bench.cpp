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

#include "leanstack/bench.hpp"

#include <chrono>
#include <cstdio>
#include <map>
#include <sstream>

#include "leanstack/digest.hpp"
#include "leanstack/error.hpp"
#include "leanstack/io.hpp"
#include "leanstack/pipeline.hpp"

namespace leanstack {
namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string col(std::size_t c) { return std::to_string(c); }

std::vector<std::string> remote_paths(const Manifest& data, FileKind kind,
                                      std::string_view dir) {
  std::vector<std::string> out;
  for (const auto& e : data.entries) {
    if (e.kind() == kind) out.push_back(std::string(dir) + "/" + e.path.filename().string());
  }
  return out;
}

struct Plans {
  std::vector<Stage> text_sort;
  std::vector<Stage> wordcount_node;
  std::vector<Stage> aggregation_node;
  Stage final_sum;
};

Plans plans_for(const Workload& w) {
  Plans p;
  p.text_sort = {{"tokenize", {}}, {"msort", {"key=1"}}};
  // Worker half of the wordcount script: tokenize | msort | count | sm2.
  p.wordcount_node = {{"tokenize", {}}, {"msort", {"key=1"}}, {"count", {"1", "1"}},
                      {"sm2", {"1", "1", "2", "2"}}};
  p.aggregation_node = {{"msort", {"key=" + col(w.group_column)}},
                        {"sm2", {col(w.group_column), col(w.group_column), col(w.sum_column),
                                 col(w.sum_column)}}};
  p.final_sum = {"sm2", {"1", "1", "2", "2"}};
  return p;
}

// Single-node reference execution.
void run_oracle(const Workload& w, const Manifest& data, const std::filesystem::path& output,
                const RunOptions& opts, const std::filesystem::path& scratch) {
  const Plans p = plans_for(w);
  StageContext ctx{opts.sort, scratch};
  const auto text = data.paths_of(FileKind::kText);
  const auto items = data.paths_of(FileKind::kItem);
  const auto orders = data.paths_of(FileKind::kOrder);

  if (w.name == "grep") {
    run_stages(std::vector<Stage>{{"grep", {w.needle}}}, text, output, ctx, scratch);
  } else if (w.name == "sort") {
    run_stages(p.text_sort, text, output, ctx, scratch);
  } else if (w.name == "wordcount") {
    run_stages(p.wordcount_node, text, output, ctx, scratch);
  } else if (w.name == "select") {
    run_stages(std::vector<Stage>{{"select", {col(w.select_column), w.threshold}}}, items, output,
               ctx, scratch);
  } else if (w.name == "join") {
    run_stages(std::vector<Stage>{{"msort", {w.order_key.to_string()}}}, orders,
               scratch / "orders.sorted", ctx, scratch);
    run_stages(std::vector<Stage>{{"msort", {w.item_key.to_string()}},
                                  {"join", {"orders.sorted", w.item_key.to_string(),
                                            w.order_key.to_string()}}},
               items, output, ctx, scratch);
  } else if (w.name == "aggregation") {
    run_stages(p.aggregation_node, items, output, ctx, scratch);
  } else {
    throw Error("unknown workload '" + w.name + "'");
  }
}

void merge_then_sum(Cluster& cluster, const std::string& remote, const Stage& final_sum,
                    const std::filesystem::path& output, const RunOptions& opts,
                    const std::filesystem::path& scratch) {
  const auto merged = scratch / "merged";
  {
    OutputFile file(merged);
    distr_dmerge(cluster, KeyRange{}, remote, file.stream());
    file.close();
  }
  run_stages(std::span<const Stage>(&final_sum, 1), {merged}, output,
             StageContext{opts.sort, scratch}, scratch);
}

void run_distributed(const Workload& w, const Manifest& data, Cluster& cluster,
                     const std::filesystem::path& output, const RunOptions& opts,
                     const std::filesystem::path& scratch) {
  const Plans p = plans_for(w);
  const auto text = remote_paths(data, FileKind::kText, "data");
  const auto items = remote_paths(data, FileKind::kItem, "data");
  const auto orders = remote_paths(data, FileKind::kOrder, "data");

  if (w.name == "grep") {
    remote_exec(cluster, {{{"grep", {w.needle}}}, text, "work/grep.out"});
    std::ostringstream partials;
    gather(cluster, "work/grep.out", partials);
    std::istringstream in(partials.str());
    std::uint64_t total = 0;
    std::string line;
    while (std::getline(in, line)) total += std::stoull(line);
    OutputFile file(output);
    file.stream() << total << '\n';
    file.close();
  } else if (w.name == "sort") {
    remote_exec(cluster, {p.text_sort, text, "work/sort.out"});
    OutputFile file(output);
    distr_dmerge(cluster, KeyRange{}, "work/sort.out", file.stream());
    file.close();
  } else if (w.name == "wordcount") {
    remote_exec(cluster, {p.wordcount_node, text, "work/wordcount.out"});
    merge_then_sum(cluster, "work/wordcount.out", p.final_sum, output, opts, scratch);
  } else if (w.name == "select") {
    remote_exec(cluster, {{{"select", {col(w.select_column), w.threshold}}}, items, "work/select.out"});
    gather(cluster, "work/select.out", output);
  } else if (w.name == "join") {
    // Colocate matching keys first: both tables are hash-partitioned on
    // the join key, so every key group lives on exactly one node.
    std::vector<std::string> shuffled_items, shuffled_orders;
    for (const auto& path : items) {
      const std::string dest = "shuffle/" + path.substr(path.find('/') + 1);
      shuffle_by_key(cluster, path, w.item_key, dest);
      shuffled_items.push_back(dest);
    }
    for (const auto& path : orders) {
      const std::string dest = "shuffle/" + path.substr(path.find('/') + 1);
      shuffle_by_key(cluster, path, w.order_key, dest);
      shuffled_orders.push_back(dest);
    }
    remote_exec(cluster, {{{"msort", {w.order_key.to_string()}}}, shuffled_orders,
                          "work/orders.sorted"});
    remote_exec(cluster, {{{"msort", {w.item_key.to_string()}},
                           {"join", {"work/orders.sorted", w.item_key.to_string(),
                                     w.order_key.to_string()}}},
                          shuffled_items, "work/join.out"});
    gather(cluster, "work/join.out", output);
  } else if (w.name == "aggregation") {
    remote_exec(cluster, {p.aggregation_node, items, "work/aggregation.out"});
    merge_then_sum(cluster, "work/aggregation.out", p.final_sum, output, opts, scratch);
  } else {
    throw Error("unknown workload '" + w.name + "'");
  }
}

}  // namespace

std::string engine_name(Engine engine) {
  return engine == Engine::kOracle ? "oracle" : "distributed";
}

Engine parse_engine(std::string_view text) {
  if (text == "oracle") return Engine::kOracle;
  if (text == "distributed") return Engine::kDistributed;
  throw Error("unknown engine '" + std::string(text) + "' (expected oracle or distributed)");
}

OrderSensitivity Workload::order_sensitivity() const {
  return name == "select" || name == "join" ? OrderSensitivity::kOrderInsensitive
                                            : OrderSensitivity::kDeterministic;
}

const std::vector<std::string>& workload_names() {
  static const std::vector<std::string> names = {"grep",   "sort", "wordcount",
                                                 "select", "join", "aggregation"};
  return names;
}

Workload make_workload(std::string_view name) {
  const auto& names = workload_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw Error("unknown workload '" + std::string(name) + "'");
  }
  Workload w;
  w.name = std::string(name);
  return w;
}

std::uint64_t workload_input_bytes(const Workload& w, const Manifest& data) {
  if (w.name == "grep" || w.name == "sort" || w.name == "wordcount") {
    return data.bytes_of(FileKind::kText);
  }
  if (w.name == "join") return data.bytes_of(FileKind::kItem) + data.bytes_of(FileKind::kOrder);
  return data.bytes_of(FileKind::kItem);
}

void load_dataset(Cluster& cluster, const Manifest& data) {
  for (const auto& e : data.entries) {
    distr_distr(cluster, e.path, "data/" + e.path.filename().string());
  }
}

std::string output_digest(const std::filesystem::path& output, OrderSensitivity sensitivity,
                          const SortOptions& sort) {
  const std::string hex = sensitivity == OrderSensitivity::kDeterministic
                              ? digest_file(output)
                              : canonical_digest(output, sort);
  return std::string(kDigestAlgorithm) + ":" + hex;
}

WorkloadReport run_workload(const Workload& w, const Manifest& data, Engine engine,
                            Cluster* cluster, const RunOptions& opts) {
  make_workload(w.name);
  if (opts.repetitions == 0) throw Error("at least one repetition is required");
  if (engine == Engine::kDistributed && cluster == nullptr) {
    throw Error("the distributed engine needs a cluster");
  }
  const auto input_bytes = workload_input_bytes(w, data);
  if (input_bytes == 0) throw Error("workload '" + w.name + "': dataset has no input files for it");

  ScratchDir scratch(opts.tmpdir.empty() ? default_tmpdir() : opts.tmpdir, "bench");
  const auto output = opts.output.empty() ? scratch.path() / "output" : opts.output;

  WorkloadReport report;
  report.workload = w.name;
  report.engine = engine;
  report.input_bytes = input_bytes;
  for (std::size_t rep = 0; rep < opts.repetitions; ++rep) {
    ScratchDir rep_scratch(scratch.path(), "rep");
    const auto started = std::chrono::steady_clock::now();
    try {
      if (engine == Engine::kOracle) {
        run_oracle(w, data, output, opts, rep_scratch.path());
      } else {
        run_distributed(w, data, *cluster, output, opts, rep_scratch.path());
      }
    } catch (const Error& e) {
      throw Error("workload '" + w.name + "' (" + engine_name(engine) + "): " + e.what());
    }
    report.repetitions.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
    const std::string digest = output_digest(output, w.order_sensitivity(), opts.sort);
    if (!report.digest.empty() && digest != report.digest) {
      throw Error("workload '" + w.name + "': output changed between repetitions");
    }
    report.digest = digest;
  }
  double sum = 0;
  for (double t : report.repetitions) sum += t;
  report.wall_time = sum / static_cast<double>(report.repetitions.size());
  report.rate = compute_rate(static_cast<double>(input_bytes), report.wall_time);

  if (engine == Engine::kDistributed) {
    for (std::size_t i = 0; i < cluster->size(); ++i) {
      for (const char* dir : {"work", "shuffle"}) {
        try {
          cluster->node(i).remove(dir);
        } catch (const Error&) {
        }
      }
    }
  }
  return report;
}

Agreement verify_agreement(const std::vector<std::pair<std::string, std::filesystem::path>>& outputs,
                           OrderSensitivity sensitivity, const SortOptions& sort) {
  if (outputs.size() < 2) throw Error("verification needs at least two outputs");
  Agreement result;
  for (const auto& [engine, path] : outputs) {
    result.digests.emplace_back(engine, output_digest(path, sensitivity, sort));
  }
  result.agree = true;
  for (const auto& [engine, digest] : result.digests) {
    if (digest != result.digests.front().second) {
      result.agree = false;
      result.details += engine + " digest " + digest + " differs from " +
                        result.digests.front().first + " digest " +
                        result.digests.front().second + "; ";
    }
  }
  return result;
}

void write_report(std::ostream& out, const std::vector<WorkloadReport>& reports) {
  out << kReportHeader << '\n';
  for (const auto& r : reports) {
    for (double seconds : r.repetitions) {
      const double rate = compute_rate(static_cast<double>(r.input_bytes), seconds);
      out << r.workload << ' ' << engine_name(r.engine) << ' ' << r.input_bytes << ' '
          << format_double(seconds) << ' ' << format_double(rate) << ' ' << r.digest << '\n';
    }
  }
}

void write_report(const std::filesystem::path& path, const std::vector<WorkloadReport>& reports) {
  OutputFile file(path);
  write_report(file.stream(), reports);
  file.close();
}

std::vector<ReportRow> read_report(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!read_line(*in, line) || line != kReportHeader) {
    throw Error("report '" + path.string() + "' lacks the header line");
  }
  std::vector<ReportRow> rows;
  std::uint64_t record = 1;
  while (read_line(*in, line)) {
    ++record;
    try {
      const Record r = Record::parse(line);
      if (r.width() != 6) throw Error("expected 6 fields");
      ReportRow row;
      row.workload = r.field(1);
      row.engine = r.field(2);
      row.bytes = std::stoull(r.field(3));
      row.seconds = std::stod(r.field(4));
      row.rate = std::stod(r.field(5));
      row.digest = r.field(6);
      rows.push_back(std::move(row));
    } catch (const std::exception& e) {
      throw Error("report '" + path.string() + "' line " + std::to_string(record) + ": " + e.what());
    }
  }
  return rows;
}

Agreement verify_reports(const std::vector<std::filesystem::path>& reports) {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> by_workload;
  for (const auto& path : reports) {
    for (const auto& row : read_report(path)) {
      by_workload[row.workload].emplace_back(row.engine, row.digest);
    }
  }
  if (by_workload.empty()) throw Error("reports contain no rows");
  Agreement result;
  result.agree = true;
  for (const auto& [workload, rows] : by_workload) {
    if (rows.size() < 2) throw Error("workload '" + workload + "' has a single report row");
    for (const auto& [engine, digest] : rows) {
      result.digests.emplace_back(workload + " " + engine, digest);
      if (digest != rows.front().second) {
        result.agree = false;
        result.details += workload + " " + engine + " digest " + digest + " differs from " +
                          rows.front().second + "; ";
      }
    }
  }
  return result;
}

std::vector<ReportValidation> validate_report(const std::vector<ReportRow>& rows,
                                              double confidence) {
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>>
      groups;
  for (const auto& row : rows) {
    auto& g = groups[{row.workload, row.engine}];
    g.first.push_back(row.seconds);
    g.second.push_back(row.rate);
  }
  std::vector<ReportValidation> out;
  for (const auto& [key, samples] : groups) {
    out.push_back({key.first, key.second, validate(samples.first, confidence),
                   validate(samples.second, confidence)});
  }
  return out;
}

}  // namespace leanstack
