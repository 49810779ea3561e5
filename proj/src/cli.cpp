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

#include "leanstack/cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <cctype>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "leanstack/bench.hpp"
#include "leanstack/cluster.hpp"
#include "leanstack/daemon.hpp"
#include "leanstack/datagen.hpp"
#include "leanstack/error.hpp"
#include "leanstack/io.hpp"
#include "leanstack/pipeline.hpp"
#include "leanstack/tukubai.hpp"

namespace leanstack {
namespace {

namespace fs = std::filesystem;

// Misuse detected after parsing; reported with the usage status.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Globals {
  std::string mem_budget;
  std::string tmpdir;
  std::string cluster;
  std::string out;
  std::string job = "default";
  std::uint64_t seed = 1;
};

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

SortOptions sort_options(const Globals& g) {
  SortOptions opts;
  if (!g.mem_budget.empty()) {
    try {
      opts.budget = MemoryBudget(parse_byte_count(g.mem_budget));
    } catch (const Error& e) {
      throw UsageError(std::string("--mem-budget: ") + e.what());
    }
  }
  opts.tmpdir = g.tmpdir;
  return opts;
}

KeyRange key_arg(std::string_view text, const char* what) {
  try {
    return parse_key_spec(text.starts_with("key=") ? std::string(text) : "key=" + std::string(text));
  } catch (const Error& e) {
    throw UsageError(std::string(what) + ": " + e.what());
  }
}

std::size_t column_arg(std::string_view text, const char* what) {
  try {
    return parse_column(text);
  } catch (const Error& e) {
    throw UsageError(std::string(what) + ": " + e.what());
  }
}

bool is_column(std::string_view text) {
  return !text.empty() && std::all_of(text.begin(), text.end(),
                                      [](unsigned char c) { return std::isdigit(c); });
}

std::vector<fs::path> to_paths(std::vector<std::string>::const_iterator first,
                               std::vector<std::string>::const_iterator last) {
  return {first, last};
}

void with_input(const std::vector<fs::path>& files, std::istream& fallback,
                const std::function<void(std::istream&)>& fn) {
  if (files.empty()) {
    fn(fallback);
    return;
  }
  ConcatInput in(files);
  fn(in);
}

void with_output(const Globals& g, std::ostream& fallback,
                 const std::function<void(std::ostream&)>& fn) {
  if (g.out.empty()) {
    fn(fallback);
    fallback.flush();
    if (!fallback) throw Error("write to standard output failed");
    return;
  }
  OutputFile file(g.out);
  fn(file.stream());
  file.close();
}

ClusterTopology topology(const Globals& g) {
  if (g.cluster.empty()) throw UsageError("--cluster FILE is required");
  return load_cluster_config(g.cluster);
}

void require_operands(const std::vector<std::string>& ops, std::size_t min, const char* usage) {
  if (ops.size() < min) throw UsageError(std::string("usage: leanstack ") + usage);
}

// Blocks SIGINT/SIGTERM and stops the daemon when one arrives.
int run_worker(const std::string& listen, const std::string& root, const SortOptions& sort,
               std::ostream& out) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  WorkerDaemon daemon(parse_endpoint(listen), root, sort);
  daemon.start();
  out << "listening " << daemon.endpoint().to_string() << '\n';
  out.flush();
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    daemon.stop();
  });
  daemon.wait();
  waiter.join();
  return kExitOk;
}

std::vector<std::string> expand_workloads(const std::vector<std::string>& requested) {
  std::vector<std::string> out;
  for (const auto& w : requested) {
    if (w == "all") {
      const auto& all = workload_names();
      out.insert(out.end(), all.begin(), all.end());
    } else {
      out.push_back(w);
    }
  }
  return out;
}

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"leanstack: streaming record toolkit and distributed runner", "leanstack"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  Globals g;
  app.add_option("--mem-budget", g.mem_budget, "Sort memory budget (bytes, K/M/G suffixes)")
      ->envname("LEANSTACK_MEM_BUDGET");
  app.add_option("--tmpdir", g.tmpdir, "Scratch directory")->envname("LEANSTACK_TMPDIR");
  app.add_option("--cluster", g.cluster, "Cluster config file")->envname("LEANSTACK_CLUSTER");
  app.add_option("--out", g.out, "Output file or directory")->envname("LEANSTACK_OUT");
  app.add_option("--seed", g.seed, "Generator seed")->envname("LEANSTACK_SEED");
  app.add_option("--job", g.job, "Job id for distributed commands")->envname("LEANSTACK_JOB");

  std::vector<std::string> ops;
  std::string key_text, sum_text;
  std::function<int(Streams)> action;

  auto tukubai = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("operands", ops, "Arguments, then input files (default: standard input)");
    return sub;
  };

  auto* msort_cmd = tukubai("msort", "Stable sort by key; spills to disk beyond the budget");
  msort_cmd->add_option("--key", key_text, "key=FROM[/TO][@num][@desc]");
  msort_cmd->callback([&] {
    auto first = ops.cbegin();
    if (key_text.empty()) {
      if (ops.empty() || !ops.front().starts_with("key=")) {
        throw UsageError("usage: leanstack msort --key key=N [FILE...]");
      }
      key_text = *first++;
    }
    const KeyRange key = key_arg(key_text, "--key");
    const SortOptions sort = sort_options(g);
    const auto files = to_paths(first, ops.cend());
    action = [=, &g](Streams s) {
      with_input(files, s.in, [&](std::istream& is) {
        with_output(g, s.out, [&](std::ostream& os) { msort(is, os, key, sort); });
      });
      return kExitOk;
    };
  });

  tukubai("lcnt", "Count records")->callback([&] {
    const auto files = to_paths(ops.cbegin(), ops.cend());
    action = [=, &g](Streams s) {
      with_input(files, s.in, [&](std::istream& is) {
        const auto n = lcnt(is);
        with_output(g, s.out, [&](std::ostream& os) { os << n << '\n'; });
      });
      return kExitOk;
    };
  });

  auto* count_cmd = tukubai("count", "Count runs of equal keys in key-sorted input: count K1 K2");
  count_cmd->add_option("--key", key_text, "key=FROM[/TO]");
  count_cmd->callback([&] {
    auto first = ops.cbegin();
    KeyRange key;
    if (!key_text.empty()) {
      key = key_arg(key_text, "--key");
    } else {
      require_operands(ops, 2, "count K1 K2 [FILE...]");
      try {
        key = key_from_columns(ops[0], ops[1]);
      } catch (const Error& e) {
        throw UsageError(std::string("count: ") + e.what());
      }
      first += 2;
    }
    const auto files = to_paths(first, ops.cend());
    action = [=, &g](Streams s) {
      with_input(files, s.in, [&](std::istream& is) {
        with_output(g, s.out, [&](std::ostream& os) { count_by_key(is, os, key); });
      });
      return kExitOk;
    };
  });

  auto* sm2_cmd = tukubai("sm2", "Sum columns over runs of equal keys: sm2 K1 K2 D1 D2");
  sm2_cmd->add_option("--key", key_text, "key=FROM[/TO]");
  sm2_cmd->add_option("--sum", sum_text, "Columns to sum, key=FROM[/TO]");
  sm2_cmd->callback([&] {
    auto first = ops.cbegin();
    KeyRange key, sum;
    if (!key_text.empty() || !sum_text.empty()) {
      if (key_text.empty() || sum_text.empty()) throw UsageError("sm2: --key and --sum go together");
      key = key_arg(key_text, "--key");
      sum = key_arg(sum_text, "--sum");
    } else {
      require_operands(ops, 4, "sm2 K1 K2 D1 D2 [FILE...]");
      try {
        key = key_from_columns(ops[0], ops[1]);
        sum = key_from_columns(ops[2], ops[3]);
      } catch (const Error& e) {
        throw UsageError(std::string("sm2: ") + e.what());
      }
      first += 4;
    }
    const auto files = to_paths(first, ops.cend());
    action = [=, &g](Streams s) {
      with_input(files, s.in, [&](std::istream& is) {
        with_output(g, s.out, [&](std::ostream& os) { sm2(is, os, key, sum); });
      });
      return kExitOk;
    };
  });

  auto* dmerge_cmd = app.add_subcommand("dmerge", "Merge pre-sorted files");
  dmerge_cmd->add_option("files", ops, "Sorted input files")->required();
  dmerge_cmd->add_option("--key", key_text, "key=FROM[/TO][@num][@desc]")->required();
  dmerge_cmd->callback([&] {
    const KeyRange key = key_arg(key_text, "--key");
    const auto files = ops;
    action = [=, &g](Streams s) {
      std::vector<std::unique_ptr<std::istream>> owned;
      std::vector<std::istream*> streams;
      for (const auto& f : files) {
        owned.push_back(open_input(f));
        streams.push_back(owned.back().get());
      }
      with_output(g, s.out, [&](std::ostream& os) { dmerge(streams, os, key, files); });
      return kExitOk;
    };
  });

  tukubai("tokenize", "One whitespace-separated token per line")->callback([&] {
    const auto files = to_paths(ops.cbegin(), ops.cend());
    action = [=, &g](Streams s) {
      with_input(files, s.in, [&](std::istream& is) {
        with_output(g, s.out, [&](std::ostream& os) { tokenize(is, os); });
      });
      return kExitOk;
    };
  });

  tukubai("grep", "Count non-overlapping occurrences of a substring: grep NEEDLE")->callback([&] {
    require_operands(ops, 1, "grep NEEDLE [FILE...]");
    if (ops[0].empty()) throw UsageError("grep: needle must not be empty");
    const std::string needle = ops[0];
    const auto files = to_paths(ops.cbegin() + 1, ops.cend());
    action = [=, &g](Streams s) {
      with_input(files, s.in, [&](std::istream& is) {
        const auto n = grep_count(is, needle);
        with_output(g, s.out, [&](std::ostream& os) { os << n << '\n'; });
      });
      return kExitOk;
    };
  });

  tukubai("select", "Rows whose numeric column exceeds a threshold: select COLUMN VALUE")
      ->callback([&] {
        require_operands(ops, 2, "select COLUMN VALUE [FILE...]");
        const std::size_t column = column_arg(ops[0], "select");
        const std::string threshold = ops[1];
        const auto files = to_paths(ops.cbegin() + 2, ops.cend());
        action = [=, &g](Streams s) {
          with_input(files, s.in, [&](std::istream& is) {
            with_output(g, s.out, [&](std::ostream& os) { select_rows(is, os, column, threshold); });
          });
          return kExitOk;
        };
      });

  tukubai("self", "Project columns: self C1 C2 ...")->callback([&] {
    auto first = ops.cbegin();
    std::vector<std::size_t> columns;
    while (first != ops.cend() && is_column(*first)) columns.push_back(column_arg(*first++, "self"));
    if (columns.empty()) throw UsageError("usage: leanstack self C1 [C2...] [FILE...]");
    const auto files = to_paths(first, ops.cend());
    action = [=, &g](Streams s) {
      with_input(files, s.in, [&](std::istream& is) {
        with_output(g, s.out, [&](std::ostream& os) { self(is, os, columns); });
      });
      return kExitOk;
    };
  });

  tukubai("join", "Inner merge join with a sorted right file: join RIGHT LKEY RKEY")
      ->callback([&] {
        require_operands(ops, 3, "join RIGHT LKEY RKEY [LEFT...]");
        const fs::path right = ops[0];
        const KeyRange lkey = key_arg(ops[1], "join LKEY");
        const KeyRange rkey = key_arg(ops[2], "join RKEY");
        const auto files = to_paths(ops.cbegin() + 3, ops.cend());
        action = [=, &g](Streams s) {
          auto right_in = open_input(right);
          with_input(files, s.in, [&](std::istream& is) {
            with_output(g, s.out, [&](std::ostream& os) { merge_join(is, *right_in, os, lkey, rkey); });
          });
          return kExitOk;
        };
      });

  std::string listen, root;
  auto* worker_cmd = app.add_subcommand("worker", "Run a worker daemon");
  worker_cmd->add_option("--listen", listen, "HOST:PORT (port 0 picks one)")->required();
  worker_cmd->add_option("--root", root, "Data root directory")->required();
  worker_cmd->callback([&] {
    try {
      parse_endpoint(listen);
    } catch (const Error& e) {
      throw UsageError(std::string("--listen: ") + e.what());
    }
    const SortOptions sort = sort_options(g);
    action = [&, sort](Streams s) { return run_worker(listen, root, sort, s.out); };
  });

  auto* distr_cmd = app.add_subcommand("distr-distr", "Scatter a file across the cluster");
  distr_cmd->add_option("operands", ops, "FILE DEST");
  distr_cmd->callback([&] {
    require_operands(ops, 2, "distr-distr --cluster FILE LOCAL DEST");
    const auto topo = topology(g);
    const SortOptions sort = sort_options(g);
    action = [=, &g](Streams s) {
      Cluster cluster(topo, g.job, sort);
      const auto chunks = distr_distr(cluster, ops[0], ops[1]);
      for (std::size_t i = 0; i < chunks.size(); ++i) {
        s.out << i + 1 << ' ' << chunks[i].offset << ' ' << chunks[i].bytes << '\n';
      }
      return kExitOk;
    };
  });

  std::vector<std::string> inputs;
  std::string remote_output, spec_file;
  auto* exec_cmd = app.add_subcommand("distr-shell", "Run a pipeline on every participant");
  exec_cmd->alias("distr-exec");
  exec_cmd->add_option("stages", ops, "Stages, one quoted argument each: \"msort key=1\"");
  exec_cmd->add_option("--input", inputs, "Job-relative input file (repeatable)");
  exec_cmd->add_option("--output", remote_output, "Job-relative output file");
  exec_cmd->add_option("--spec", spec_file, "Pipeline spec as JSON");
  exec_cmd->callback([&] {
    PipelineSpec spec;
    if (!spec_file.empty()) {
      auto f = open_input(spec_file);
      std::string json((std::istreambuf_iterator<char>(*f)), std::istreambuf_iterator<char>());
      spec = pipeline_from_json(json);
    } else {
      if (ops.empty() || inputs.empty() || remote_output.empty()) {
        throw UsageError(
            "usage: leanstack distr-shell --cluster FILE --input IN --output OUT STAGE...");
      }
      for (const auto& text : ops) spec.stages.push_back(parse_stage(text));
      spec.inputs = inputs;
      spec.output = remote_output;
    }
    for (const auto& stage : spec.stages) {
      try {
        validate_stage(stage);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
    }
    const auto topo = topology(g);
    const SortOptions sort = sort_options(g);
    action = [=, &g](Streams s) {
      Cluster cluster(topo, g.job, sort);
      const auto reports = remote_exec(cluster, spec);
      for (std::size_t i = 0; i < reports.size(); ++i) {
        s.out << i + 1 << ' ' << reports[i].records << ' ' << reports[i].seconds << '\n';
      }
      return kExitOk;
    };
  });

  auto* ddmerge_cmd = app.add_subcommand("distr-dmerge", "Merge a sorted file from every participant");
  ddmerge_cmd->add_option("operands", ops, "REMOTE");
  ddmerge_cmd->add_option("--key", key_text, "key=FROM[/TO][@num][@desc]")->required();
  ddmerge_cmd->callback([&] {
    require_operands(ops, 1, "distr-dmerge --cluster FILE --key K REMOTE");
    const KeyRange key = key_arg(key_text, "--key");
    const auto topo = topology(g);
    const SortOptions sort = sort_options(g);
    action = [=, &g](Streams s) {
      Cluster cluster(topo, g.job, sort);
      with_output(g, s.out, [&](std::ostream& os) { distr_dmerge(cluster, key, ops[0], os); });
      return kExitOk;
    };
  });

  auto* shuffle_cmd = app.add_subcommand("shuffle", "Repartition a file by key hash");
  shuffle_cmd->add_option("operands", ops, "REMOTE DEST");
  shuffle_cmd->add_option("--key", key_text, "key=FROM[/TO]")->required();
  shuffle_cmd->callback([&] {
    require_operands(ops, 2, "shuffle --cluster FILE --key K REMOTE DEST");
    const KeyRange key = key_arg(key_text, "--key");
    const auto topo = topology(g);
    const SortOptions sort = sort_options(g);
    action = [=, &g](Streams s) {
      Cluster cluster(topo, g.job, sort);
      const auto counts = shuffle_by_key(cluster, ops[0], key, ops[1]);
      for (std::size_t i = 0; i < counts.size(); ++i) s.out << i + 1 << ' ' << counts[i] << '\n';
      return kExitOk;
    };
  });

  auto* gather_cmd = app.add_subcommand("gather", "Concatenate a file from every participant");
  gather_cmd->add_option("operands", ops, "REMOTE");
  gather_cmd->callback([&] {
    require_operands(ops, 1, "gather --cluster FILE REMOTE");
    const auto topo = topology(g);
    const SortOptions sort = sort_options(g);
    action = [=, &g](Streams s) {
      Cluster cluster(topo, g.job, sort);
      if (g.out.empty()) {
        gather(cluster, ops[0], s.out);
        s.out.flush();
        if (!s.out) throw Error("write to standard output failed");
      } else {
        gather(cluster, ops[0], fs::path(g.out));
      }
      return kExitOk;
    };
  });

  auto* clean_cmd = app.add_subcommand("distr-clean", "Delete the job's files on every participant");
  clean_cmd->callback([&] {
    const auto topo = topology(g);
    action = [=, &g](Streams) {
      Cluster cluster(topo, g.job);
      for (std::size_t i = 0; i < cluster.size(); ++i) cluster.node(i).remove("");
      return kExitOk;
    };
  });

  std::string gen_bytes, file_bytes;
  std::size_t files_per_table = 4, vocabulary = 50'000, categories = 1000;
  double zipf = 1.1, item_fraction = 0.62;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a dataset: gen text|tables");
  gen_cmd->add_option("kind", ops, "text or tables")->required();
  gen_cmd->add_option("--bytes", gen_bytes, "Total bytes")->required();
  gen_cmd->add_option("--file-bytes", file_bytes, "Target bytes per text file");
  gen_cmd->add_option("--files-per-table", files_per_table, "Files per table");
  gen_cmd->add_option("--vocabulary", vocabulary, "Distinct words");
  gen_cmd->add_option("--zipf", zipf, "Zipf exponent");
  gen_cmd->add_option("--categories", categories, "Item categories");
  gen_cmd->add_option("--item-fraction", item_fraction, "Item share of table bytes");
  gen_cmd->callback([&] {
    if (ops.size() != 1 || (ops[0] != "text" && ops[0] != "tables")) {
      throw UsageError("usage: leanstack gen text|tables --bytes N --out DIR");
    }
    if (g.out.empty()) throw UsageError("gen: --out DIR is required");
    std::uint64_t total = 0, per_file = 0;
    try {
      total = parse_byte_count(gen_bytes);
      if (!file_bytes.empty()) per_file = parse_byte_count(file_bytes);
    } catch (const Error& e) {
      throw UsageError(std::string("gen: ") + e.what());
    }
    const bool text = ops[0] == "text";
    action = [=, &g](Streams s) {
      Manifest m;
      if (text) {
        TextCorpusSpec spec;
        spec.total_bytes = total;
        if (per_file) spec.target_file_bytes = per_file;
        spec.vocabulary = vocabulary;
        spec.zipf_exponent = zipf;
        spec.seed = g.seed;
        m = gen_text(spec, g.out);
      } else {
        TableSpec spec;
        spec.total_bytes = total;
        spec.files_per_table = files_per_table;
        spec.categories = categories;
        spec.item_fraction = item_fraction;
        spec.seed = g.seed;
        m = gen_tables(spec, g.out);
      }
      s.out << "files " << m.entries.size() << " bytes " << m.total_bytes() << '\n';
      return kExitOk;
    };
  });

  std::vector<std::string> workloads, reports;
  std::string data, engine_text = "oracle", report_file;
  std::size_t reps = 3;
  double confidence = 0.95;
  bool no_load = false;
  auto* bench_cmd = app.add_subcommand("bench", "Benchmarks: bench run|load|verify|validate");
  bench_cmd->add_option("action", ops, "run, load, verify or validate")->required();
  bench_cmd->add_option("--workload", workloads, "Workload name or all (repeatable)");
  bench_cmd->add_option("--data", data, "Dataset manifest or directory");
  bench_cmd->add_option("--engine", engine_text, "oracle or distributed");
  bench_cmd->add_option("--reps", reps, "Repetitions");
  bench_cmd->add_flag("--no-load", no_load, "Dataset already scattered to the cluster");
  bench_cmd->add_option("--reports", reports, "Report files to compare");
  bench_cmd->add_option("--report", report_file, "Report file to validate");
  bench_cmd->add_option("--confidence", confidence, "Confidence level");
  bench_cmd->callback([&] {
    if (ops.size() != 1) throw UsageError("usage: leanstack bench run|load|verify|validate");
    const std::string what = ops[0];
    const SortOptions sort = sort_options(g);
    if (what == "run" || what == "load") {
      if (data.empty()) throw UsageError("bench " + what + ": --data MANIFEST is required");
      Engine engine = Engine::kDistributed;
      if (what == "run") {
        try {
          engine = parse_engine(engine_text);
        } catch (const Error& e) {
          throw UsageError(e.what());
        }
        if (workloads.empty()) throw UsageError("bench run: --workload is required");
        for (const auto& w : expand_workloads(workloads)) {
          try {
            make_workload(w);
          } catch (const Error& e) {
            throw UsageError(e.what());
          }
        }
        if (reps == 0) throw UsageError("bench run: --reps must be positive");
      }
      std::optional<ClusterTopology> topo;
      if (engine == Engine::kDistributed) topo = topology(g);
      const bool load = what == "load" || (engine == Engine::kDistributed && !no_load);
      const bool run = what == "run";
      action = [=, &g](Streams s) {
        const Manifest manifest = read_manifest(data);
        std::unique_ptr<Cluster> cluster;
        if (topo) cluster = std::make_unique<Cluster>(*topo, g.job, sort);
        if (load) load_dataset(*cluster, manifest);
        if (!run) return kExitOk;
        RunOptions opts;
        opts.sort = sort;
        opts.repetitions = reps;
        opts.tmpdir = g.tmpdir;
        std::vector<WorkloadReport> results;
        for (const auto& w : expand_workloads(workloads)) {
          results.push_back(run_workload(make_workload(w), manifest, engine, cluster.get(), opts));
        }
        if (g.out.empty()) {
          write_report(s.out, results);
        } else {
          write_report(fs::path(g.out), results);
        }
        return kExitOk;
      };
    } else if (what == "verify") {
      if (reports.size() < 1) throw UsageError("bench verify: --reports R1 [R2...] is required");
      action = [=](Streams s) {
        const Agreement a = verify_reports({reports.begin(), reports.end()});
        for (const auto& [engine, digest] : a.digests) s.out << engine << ' ' << digest << '\n';
        if (!a.agree) {
          s.err << "leanstack: bench verify: digests disagree: " << a.details << '\n';
          return kExitFailure;
        }
        s.out << "agree\n";
        return kExitOk;
      };
    } else if (what == "validate") {
      if (report_file.empty()) throw UsageError("bench validate: --report FILE is required");
      action = [=](Streams s) {
        const auto rows = validate_report(read_report(report_file), confidence);
        s.out << "workload engine n seconds_mean seconds_low seconds_high rate_mean rate_low "
                 "rate_high\n";
        for (const auto& r : rows) {
          s.out << r.workload << ' ' << r.engine << ' ' << r.seconds.n << ' ' << r.seconds.mean
                << ' ' << r.seconds.ci_low << ' ' << r.seconds.ci_high << ' ' << r.rate.mean << ' '
                << r.rate.ci_low << ' ' << r.rate.ci_high << '\n';
        }
        return kExitOk;
      };
    } else {
      throw UsageError("bench: unknown action '" + what + "'");
    }
  });

  std::string subcommand = "leanstack";
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    subcommand = app.get_subcommands().front()->get_name();
    sort_options(g);  // global flags are validated even when the subcommand ignores them
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    if (!args.empty() && !args.front().starts_with("-") &&
        app.get_subcommand_no_throw(args.front()) == nullptr) {
      err << "leanstack: unknown subcommand '" << args.front() << "'\n";
      return kExitUsage;
    }
    err << "leanstack: " << one_line(e.what()) << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "leanstack: " << one_line(e.what()) << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "leanstack: " << one_line(e.what()) << '\n';
    return kExitFailure;
  }

  try {
    return action(Streams{in, out, err});
  } catch (const std::exception& e) {
    err << "leanstack: " << subcommand << ": " << one_line(e.what()) << '\n';
    return kExitFailure;
  }
}

}  // namespace leanstack
