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

// Acceptance run: one PASS/FAIL line per criterion. Exit status 0 only
// when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "leanstack/bench.hpp"
#include "leanstack/cluster.hpp"
#include "leanstack/datagen.hpp"
#include "leanstack/digest.hpp"
#include "leanstack/stats.hpp"
#include "leanstack/tukubai.hpp"
#include "support.hpp"

namespace leanstack::acceptance {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

bool files_identical(const fs::path& a, const fs::path& b) {
  if (fs::file_size(a) != fs::file_size(b)) return false;
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::vector<char> ba(1 << 20), bb(1 << 20);
  while (fa && fb) {
    fa.read(ba.data(), static_cast<std::streamsize>(ba.size()));
    fb.read(bb.data(), static_cast<std::streamsize>(bb.size()));
    if (fa.gcount() != fb.gcount()) return false;
    if (!std::equal(ba.begin(), ba.begin() + fa.gcount(), bb.begin())) return false;
  }
  return true;
}

std::string put_string(Node& node, const std::string& relative, const std::string& content) {
  auto writer = node.open_put(relative);
  writer->stream() << content;
  writer->finish();
  return relative;
}

std::string stream_string(Node& node, const std::string& relative) {
  auto in = node.open_stream(relative);
  std::ostringstream out;
  out << in->rdbuf();
  return out.str();
}

// ---- oracle equivalence ----

Verdict oracle_equivalence(const fs::path& work, std::size_t seeds, std::uint64_t dataset_bytes) {
  const auto started = Clock::now();
  testing::LocalWorkers workers(3);
  const ClusterTopology topo = workers.topology(false);
  std::size_t agreed = 0, total = 0;
  std::string failures;
  for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
    const fs::path dir = work / ("equivalence-" + std::to_string(seed));
    TextCorpusSpec text;
    text.total_bytes = dataset_bytes / 2;
    text.seed = seed;
    gen_text(text, dir / "data");
    TableSpec tables;
    tables.total_bytes = dataset_bytes - text.total_bytes;
    tables.seed = seed;
    gen_tables(tables, dir / "data");
    const Manifest manifest = read_manifest(dir / "data" / kManifestName);

    Cluster cluster(topo, "seed-" + std::to_string(seed));
    load_dataset(cluster, manifest);
    for (const auto& name : workload_names()) {
      const Workload w = make_workload(name);
      RunOptions opts;
      opts.tmpdir = dir;
      opts.output = dir / (name + ".oracle");
      run_workload(w, manifest, Engine::kOracle, nullptr, opts);
      opts.output = dir / (name + ".distributed");
      run_workload(w, manifest, Engine::kDistributed, &cluster, opts);
      const Agreement a = verify_agreement(
          {{"oracle", dir / (name + ".oracle")}, {"distributed", dir / (name + ".distributed")}},
          w.order_sensitivity());
      ++total;
      if (a.agree) {
        ++agreed;
      } else {
        failures += " seed " + std::to_string(seed) + " " + name + ":" + a.details;
      }
    }
    for (std::size_t i = 0; i < cluster.size(); ++i) cluster.node(i).remove("");
    fs::remove_all(dir);
  }
  const double elapsed = seconds_since(started);
  Verdict v;
  v.pass = agreed == total && total == seeds * workload_names().size() && elapsed < 600.0;
  v.detail = std::to_string(agreed) + "/" + std::to_string(total) + " agreements, " +
             std::to_string(seeds) + " seeds, 3 workers, " +
             fmt("%.0f", static_cast<double>(dataset_bytes) / 1e6) + " MB per seed, " +
             fmt("%.1f", elapsed) + " s (limit 600 s)" + failures;
  return v;
}

// ---- shared text tiers ----

fs::path text_tier(const fs::path& work, std::uint64_t mib) {
  const fs::path dir = work / ("text-" + std::to_string(mib) + "mib");
  if (!fs::exists(dir / kManifestName)) {
    TextCorpusSpec spec;
    spec.total_bytes = mib << 20;
    spec.target_file_bytes = 16u << 20;
    spec.seed = 100 + mib;
    gen_text(spec, dir);
  }
  return dir;
}

// ---- sort beyond memory ----

// Counting oracle: every distinct line with its multiplicity, emitted in
// byte order. Needs memory only for the distinct lines.
void counting_sort_oracle(const fs::path& input, const fs::path& output) {
  std::map<std::string, std::uint64_t> counts;
  std::ifstream in(input, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) ++counts[line];
  std::ofstream out(output, std::ios::binary);
  for (const auto& [value, n] : counts) {
    for (std::uint64_t i = 0; i < n; ++i) out << value << '\n';
  }
}

Verdict sort_beyond_memory(const fs::path& work) {
  const auto started = Clock::now();
  // Tokenizing drops a few separator bytes, so the text gets a margin.
  const fs::path text = work / "sort-text";
  TextCorpusSpec spec;
  spec.total_bytes = (256u << 20) + (1u << 20);
  spec.target_file_bytes = 16u << 20;
  spec.seed = 9;
  gen_text(spec, text);
  const fs::path tokens = work / "tokens.txt";
  {
    ConcatInput in(read_manifest(text / kManifestName).paths_of(FileKind::kText));
    OutputFile out(tokens);
    tokenize(in, out.stream());
    out.close();
  }
  const std::uint64_t bytes = fs::file_size(tokens);
  const fs::path oracle = work / "tokens.oracle";
  counting_sort_oracle(tokens, oracle);

  SortOptions opts;
  opts.budget = MemoryBudget(16u << 20);
  opts.tmpdir = work / "sort-tmp";
  fs::create_directories(opts.tmpdir);
  const fs::path sorted = work / "tokens.sorted";
  SortStats stats;
  {
    auto in = open_input(tokens);
    OutputFile out(sorted);
    stats = msort(*in, out.stream(), parse_key_spec("key=1"), opts);
    out.close();
  }
  const bool same = files_identical(sorted, oracle);
  const bool left_clean = fs::is_empty(opts.tmpdir);
  Verdict v;
  v.pass = same && bytes >= (256u << 20) && stats.runs_spilled > 1 && left_clean;
  v.detail = std::to_string(bytes) + " bytes sorted under a 16 MiB budget, " +
             std::to_string(stats.runs_spilled) + " runs, " +
             std::to_string(stats.merge_passes) + " merge passes, output " +
             (same ? "byte-identical to" : "DIFFERS from") + " the counting oracle" +
             (left_clean ? "" : ", spill files left behind") + ", " +
             fmt("%.1f", seconds_since(started)) + " s";
  fs::remove_all(text);
  fs::remove(tokens);
  fs::remove(oracle);
  fs::remove(sorted);
  return v;
}

// ---- join colocation ----

PipelineSpec pipeline(const std::string& input, const std::string& output,
                      const std::vector<std::string>& stages) {
  PipelineSpec spec;
  spec.inputs = {input};
  spec.output = output;
  for (const auto& s : stages) spec.stages.push_back(parse_stage(s));
  return spec;
}

Verdict join_colocation() {
  testing::LocalWorkers workers(3);
  std::mt19937_64 rng(2024);
  std::string detail;
  bool pass = true;
  for (const std::size_t rows : {10, 1'000, 10'000, 100'000}) {
    Cluster cluster(workers.topology(false), "join-" + std::to_string(rows));
    const std::size_t n = cluster.size();
    const std::size_t items = rows / 4;
    const std::size_t orders = rows - items;
    const std::size_t keys = std::max<std::size_t>(1, items * 3 / 4);
    std::vector<std::string> item_rows, order_rows;
    std::vector<std::string> item_part(n), order_part(n);
    std::uniform_int_distribution<std::size_t> key_dist(0, keys - 1), price(1, 99'999);
    for (std::size_t i = 0; i < items; ++i) {
      const std::size_t k = key_dist(rng);
      item_rows.push_back("I" + std::to_string(k) + " c" + std::to_string(k % 7) + " " +
                          std::to_string(price(rng)));
      item_part[k % n] += item_rows.back() + "\n";
    }
    // Orders for key k live on a different worker than its items.
    for (std::size_t j = 0; j < orders; ++j) {
      const std::size_t k = key_dist(rng) + (j % 5 == 0 ? keys : 0);  // some never match
      order_rows.push_back("O" + std::to_string(j) + " I" + std::to_string(k) + " " +
                           std::to_string(1 + j % 9));
      order_part[(k + 1) % n] += order_rows.back() + "\n";
    }
    for (std::size_t i = 0; i < n; ++i) {
      put_string(cluster.node(i), "data/items", item_part[i]);
      put_string(cluster.node(i), "data/orders", order_part[i]);
    }

    remote_exec(cluster, pipeline("data/orders", "work/orders.sorted", {"msort key=2"}));
    remote_exec(cluster, pipeline("data/items", "work/unshuffled.join",
                                  {"msort key=1", "join work/orders.sorted key=1 key=2"}));
    std::ostringstream unshuffled;
    gather(cluster, "work/unshuffled.join", unshuffled);

    shuffle_by_key(cluster, "data/items", parse_key_spec("key=1"), "shuffle/items");
    shuffle_by_key(cluster, "data/orders", parse_key_spec("key=2"), "shuffle/orders");
    remote_exec(cluster, pipeline("shuffle/orders", "work/orders.sorted", {"msort key=2"}));
    remote_exec(cluster, pipeline("shuffle/items", "work/join.out",
                                  {"msort key=1", "join work/orders.sorted key=1 key=2"}));
    std::ostringstream joined;
    gather(cluster, "work/join.out", joined);
    for (std::size_t i = 0; i < n; ++i) cluster.node(i).remove("");

    const auto expected = testing::sorted_copy(testing::oracle_join(item_rows, order_rows, 1, 2));
    const auto actual = testing::sorted_copy(testing::split_lines(joined.str()));
    const bool ok = actual == expected && !expected.empty() && unshuffled.str().empty();
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + std::to_string(rows) + " rows: " +
              std::to_string(actual.size()) + "/" + std::to_string(expected.size()) +
              " joined rows" + (unshuffled.str().empty() ? "" : " (scatter was not adversarial)") +
              (ok ? "" : " MISMATCH");
  }
  return {pass, detail};
}

// ---- merge law ----

std::string random_decimal(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> sign(0, 3), whole(0, 120), frac(0, 3), digit(0, 9);
  std::string s = sign(rng) == 0 ? "-" : "";
  s += std::to_string(whole(rng));
  const int f = frac(rng);
  if (f > 0) {
    s += '.';
    for (int i = 0; i < f; ++i) s += static_cast<char>('0' + digit(rng));
  }
  return s;
}

std::string random_word(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(1, 3), letter(0, 2);
  std::string s;
  for (int i = len(rng); i > 0; --i) s += static_cast<char>('a' + letter(rng));
  return s;
}

Verdict merge_law(std::size_t cases) {
  const std::vector<std::pair<std::string, testing::OracleKey>> keys = {
      {"key=1", {1, 1, false, false}},      {"key=1/3", {1, 3, false, false}},
      {"key=2@num", {2, 2, true, false}},   {"key=2@num@desc", {2, 2, true, true}},
      {"key=3@desc", {3, 3, false, true}},  {"key=1/2", {1, 2, false, false}},
  };
  std::vector<std::unique_ptr<testing::LocalWorkers>> pools;
  for (std::size_t k = 1; k <= 5; ++k) pools.push_back(std::make_unique<testing::LocalWorkers>(k));

  std::mt19937_64 rng(77);
  std::size_t local_ok = 0, distributed_ok = 0;
  for (std::size_t c = 0; c < cases; ++c) {
    const auto& [spec, oracle_key] = keys[c % keys.size()];
    const KeyRange key = parse_key_spec(spec);
    const bool leader = c % 2 == 1;
    testing::LocalWorkers& pool = *pools[c % pools.size()];
    Cluster cluster(pool.topology(leader), "merge-" + std::to_string(c));
    const std::size_t k = cluster.size();

    std::uniform_int_distribution<std::size_t> run_len(0, 40);
    std::vector<std::string> runs(k);
    std::string concatenation;
    for (std::size_t r = 0; r < k; ++r) {
      std::vector<std::string> lines(run_len(rng));
      for (auto& l : lines) l = random_word(rng) + " " + random_decimal(rng) + " " + random_word(rng);
      runs[r] = testing::join_lines(testing::oracle_sort(lines, oracle_key));
      concatenation += runs[r];
    }

    std::vector<std::istringstream> run_streams;
    for (const auto& r : runs) run_streams.emplace_back(r);
    std::vector<std::istream*> inputs;
    for (auto& s : run_streams) inputs.push_back(&s);
    std::ostringstream merged;
    dmerge(inputs, merged, key);
    std::istringstream whole(concatenation);
    std::ostringstream sorted;
    msort(whole, sorted, key);
    if (merged.str() == sorted.str()) ++local_ok;

    for (std::size_t r = 0; r < k; ++r) put_string(cluster.node(r), "run", runs[r]);
    std::ostringstream distributed;
    distr_dmerge(cluster, key, "run", distributed);
    std::vector<std::istringstream> fetched;
    for (std::size_t r = 0; r < k; ++r) fetched.emplace_back(stream_string(cluster.node(r), "run"));
    std::vector<std::istream*> fetched_inputs;
    for (auto& s : fetched) fetched_inputs.push_back(&s);
    std::ostringstream gathered_merge;
    dmerge(fetched_inputs, gathered_merge, key);
    if (distributed.str() == gathered_merge.str()) ++distributed_ok;
    for (std::size_t r = 0; r < k; ++r) cluster.node(r).remove("");
  }
  return {local_ok == cases && distributed_ok == cases,
          "dmerge = msort of concatenation in " + std::to_string(local_ok) + "/" +
              std::to_string(cases) + " cases; distr_dmerge = dmerge of gathered runs in " +
              std::to_string(distributed_ok) + "/" + std::to_string(cases) + " cases"};
}

// ---- scatter/gather identity ----

Verdict scatter_gather(const fs::path& work) {
  std::mt19937_64 rng(5);
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("one-line", "x\n");
  std::string prime;
  while (prime.size() < 1'000'003) {
    prime += random_word(rng) + " " + random_decimal(rng) + "\n";
  }
  prime.resize(1'000'002);
  prime += '\n';
  files.emplace_back("1000003-bytes", prime);
  std::string ragged;
  std::uniform_int_distribution<std::size_t> len(0, 3000);
  for (int i = 0; i < 400; ++i) ragged += std::string(len(rng), 'a' + i % 26) + "\n";
  files.emplace_back("ragged", ragged);
  files.emplace_back("no-final-newline", "a b\nc d\ne");

  std::size_t ok = 0, total = 0;
  std::string failures;
  for (std::size_t n = 1; n <= 8; ++n) {
    testing::LocalWorkers workers(n);
    for (const bool leader : {false, true}) {
      Cluster cluster(workers.topology(leader), "scatter");
      for (const auto& [name, content] : files) {
        const fs::path src = work / ("scatter-" + name);
        testing::write_file(src, content);
        const fs::path back = work / ("gathered-" + name);
        distr_distr(cluster, src, "data/" + name);
        gather(cluster, "data/" + name, back);
        ++total;
        if (digest_file(back) == digest_file(src)) {
          ++ok;
        } else {
          failures += " " + name + "@" + std::to_string(cluster.size());
        }
        fs::remove(back);
      }
      for (std::size_t i = 0; i < cluster.size(); ++i) cluster.node(i).remove("");
    }
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) +
                           " files reproduced digest-exactly over 1-8 workers, with and without "
                           "the leader holding a chunk" + failures};
}

// ---- generator shape ----

Verdict generator_shape(const fs::path& work) {
  bool pass = true;
  std::string detail = "item share";
  for (const std::uint64_t volume : {100'000ull, 3'000'000ull, 40'000'000ull}) {
    const fs::path dir = work / ("tables-" + std::to_string(volume));
    TableSpec spec;
    spec.total_bytes = volume;
    spec.seed = volume;
    gen_tables(spec, dir);
    std::uint64_t item = 0, order = 0;
    std::size_t item_files = 0, order_files = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name.starts_with("item-")) {
        ++item_files;
        item += entry.file_size();
      } else if (name.starts_with("order-")) {
        ++order_files;
        order += entry.file_size();
      }
    }
    const double share = static_cast<double>(item) / static_cast<double>(item + order);
    const bool ok = std::abs(share - 0.62) <= 0.03 && item_files == 4 && order_files == 4;
    pass = pass && ok;
    detail += " " + fmt("%.4f", share) + " (" + std::to_string(item_files) + "+" +
              std::to_string(order_files) + " files)";
    fs::remove_all(dir);
  }
  detail += "; text files";
  const std::uint64_t target = 250'000;
  std::size_t base = 0;
  for (const std::uint64_t multiple : {1, 2, 4, 8}) {
    const fs::path dir = work / ("text-x" + std::to_string(multiple));
    TextCorpusSpec spec;
    spec.total_bytes = 4 * target * multiple;
    spec.target_file_bytes = target;
    spec.seed = multiple;
    gen_text(spec, dir);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().filename().string().starts_with("text-")) ++files;
    }
    if (multiple == 1) base = files;
    pass = pass && files == base * multiple && base == 4;
    detail += " " + std::to_string(files);
    fs::remove_all(dir);
  }
  return {pass, detail + " for 1x/2x/4x/8x volume"};
}

// ---- statistics ----

Verdict statistics() {
  const std::vector<double> samples = {10, 12, 14};
  const ValidationSummary s = validate(samples, 0.95);
  // t(0.025, 2) = 4.303 from published tables; s = 2, n = 3.
  const double expected_half = 4.303 * 2.0 / std::sqrt(3.0);
  const std::vector<double> flat = {5, 5, 5, 5};
  const ValidationSummary z = validate(flat, 0.95);
  const bool ok = s.mean == 12.0 && std::abs(s.half_width() - 4.97) <= 0.01 &&
                  std::abs(s.half_width() - expected_half) <= 0.001 && z.mean == 5.0 &&
                  z.ci_low == 5.0 && z.ci_high == 5.0;
  return {ok, "mean " + fmt("%.6g", s.mean) + ", half-width " + fmt("%.4f", s.half_width()) +
                  " (table value " + fmt("%.4f", expected_half) + "), zero-variance interval [" +
                  fmt("%g", z.ci_low) + ", " + fmt("%g", z.ci_high) + "]"};
}

// ---- rate trend ----

Verdict rate_trend(const fs::path& work) {
  const Workload grep = make_workload("grep");
  std::vector<WorkloadReport> reports;
  for (const std::uint64_t mib : {16, 64, 256}) {
    const Manifest m = read_manifest(text_tier(work, mib) / kManifestName);
    RunOptions opts;
    opts.repetitions = 3;
    opts.tmpdir = work;
    reports.push_back(run_workload(grep, m, Engine::kOracle, nullptr, opts));
  }
  const fs::path report = work / "rates.txt";
  write_report(report, reports);
  const auto rows = read_report(report);
  bool pass = rows.size() == 9;
  std::set<std::uint64_t> tiers;
  std::string rates;
  for (const auto& row : rows) {
    tiers.insert(row.bytes);
    const double bytes = static_cast<double>(row.bytes);
    // The stored rate is the correctly rounded quotient, so the product
    // recovers the byte count up to the one rounding of the multiply.
    const bool exact_quotient = row.rate == bytes / row.seconds;
    const bool product = std::abs(row.rate * row.seconds - bytes) <= bytes * 0x1p-52;
    pass = pass && exact_quotient && product && row.seconds > 0;
  }
  for (const auto& r : reports) rates += " " + fmt("%.3g", r.rate) + " B/s";
  pass = pass && tiers.size() == 3;
  return {pass, std::to_string(rows.size()) + " report rows over " + std::to_string(tiers.size()) +
                    " tiers read back from the report file, rate x time = bytes on every row;"
                    " mean rates" + rates};
}

}  // namespace
}  // namespace leanstack::acceptance

int main(int argc, char** argv) {
  using namespace leanstack::acceptance;
  CLI::App app{"leanstack acceptance run"};
  std::vector<std::string> only;
  std::string workdir;
  std::size_t seeds = 10;
  std::size_t merge_cases = 1000;
  std::uint64_t dataset_bytes = 100'000'000;
  app.add_option("--only", only, "Run only these criteria");
  app.add_option("--workdir", workdir, "Scratch directory (default: a fresh temporary one)");
  app.add_option("--seeds", seeds, "Seeded runs for oracle equivalence");
  app.add_option("--dataset-bytes", dataset_bytes, "Dataset size for oracle equivalence");
  app.add_option("--merge-cases", merge_cases, "Random cases for the merge law");
  CLI11_PARSE(app, argc, argv);

  std::unique_ptr<leanstack::testing::TempDir> temp;
  fs::path work = workdir;
  if (work.empty()) {
    temp = std::make_unique<leanstack::testing::TempDir>();
    work = temp->path();
  }
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"oracle-equivalence", [&] { return oracle_equivalence(work, seeds, dataset_bytes); }},
      {"sort-beyond-memory", [&] { return sort_beyond_memory(work); }},
      {"join-colocation", [&] { return join_colocation(); }},
      {"merge-law", [&] { return merge_law(merge_cases); }},
      {"scatter-gather-identity", [&] { return scatter_gather(work); }},
      {"generator-shape", [&] { return generator_shape(work); }},
      {"statistics", [&] { return statistics(); }},
      {"rate-trend", [&] { return rate_trend(work); }},
  };
  bool all = true;
  for (const auto& [name, check] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    all = all && v.pass;
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
  }
  return all ? 0 : 1;
}
