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

#include <gtest/gtest.h>

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <random>
#include <sstream>

#include "leanstack/bench.hpp"
#include "leanstack/cli.hpp"
#include "leanstack/datagen.hpp"
#include "leanstack/digest.hpp"
#include "support.hpp"

namespace leanstack {
namespace {

namespace fs = std::filesystem;
using testing::read_file;
using testing::write_file;

struct Outcome {
  int status = -1;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args, const std::string& input = {}) {
  std::istringstream in(input);
  std::ostringstream out, err;
  Outcome o;
  o.status = dispatch(args, in, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

// Runs a shell command and returns its standard output.
std::string sh(const std::string& command, int* status = nullptr) {
  std::FILE* pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) throw std::runtime_error("popen failed");
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int rc = ::pclose(pipe);
  if (status) *status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return out;
}

const std::string kBinary = LEANSTACK_BINARY;

std::string random_text(std::uint64_t seed, std::size_t words) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len(1, 4), letter(0, 3), gap(0, 9);
  std::string text;
  for (std::size_t i = 0; i < words; ++i) {
    const int n = len(rng);
    for (int j = 0; j < n; ++j) text += static_cast<char>('a' + letter(rng));
    text += gap(rng) == 0 ? '\n' : ' ';
  }
  return text + "\n";
}

TEST(Dispatch, MsortFromStandardInput) {
  const auto o = run({"msort", "--key", "key=1"}, "b\na\n");
  EXPECT_EQ(o.status, kExitOk);
  EXPECT_EQ(o.out, "a\nb\n");
  EXPECT_EQ(o.err, "");
  EXPECT_EQ(run({"msort", "key=1"}, "b\na\n").out, "a\nb\n");
  EXPECT_EQ(run({"msort", "--key", "key=1@num@desc"}, "9\n10\n-1\n").out, "10\n9\n-1\n");
}

TEST(Dispatch, UnknownSubcommandIsUsageError) {
  const auto o = run({"nosuchcmd"});
  EXPECT_EQ(o.status, kExitUsage);
  EXPECT_EQ(o.err, "leanstack: unknown subcommand 'nosuchcmd'\n");
  EXPECT_EQ(run({}).status, kExitUsage);
}

TEST(Dispatch, UsageErrorsExitTwoWithOneLine) {
  const std::vector<std::vector<std::string>> bad = {
      {"msort"},
      {"msort", "--key", "key=0"},
      {"msort", "--key", "key=1@desc@num"},
      {"count", "1"},
      {"count", "2", "1"},
      {"sm2", "1", "1", "2"},
      {"sm2", "--key", "key=1"},
      {"grep"},
      {"select", "x", "1"},
      {"join", "right.txt", "1"},
      {"gen", "text", "--bytes", "1000"},
      {"gen", "cubes", "--bytes", "1000", "--out", "/tmp/x"},
      {"bench", "run", "--data", "/tmp/x"},
      {"bench", "run", "--data", "/tmp/x", "--workload", "pagerank"},
      {"bench", "fly"},
      {"gather", "data/x"},
      {"worker", "--listen", "nohost", "--root", "/tmp/x"},
      {"--mem-budget", "lots", "lcnt"},
  };
  for (const auto& args : bad) {
    const auto o = run(args);
    EXPECT_EQ(o.status, kExitUsage) << args.front() << " " << o.err;
    EXPECT_EQ(line_count(o.err), 1u) << o.err;
    EXPECT_TRUE(o.err.starts_with("leanstack: ")) << o.err;
    EXPECT_EQ(o.out, "");
  }
}

TEST(Dispatch, OperationFailureExitsOneWithOneLine) {
  testing::TempDir dir;
  const auto missing = run({"msort", "--key", "key=1", (dir / "missing.txt").string()});
  EXPECT_EQ(missing.status, kExitFailure);
  EXPECT_EQ(line_count(missing.err), 1u);
  EXPECT_TRUE(missing.err.starts_with("leanstack: msort: ")) << missing.err;

  write_file(dir / "a", "2\n1\n");
  write_file(dir / "b", "1\n");
  const auto unsorted = run({"dmerge", "--key", "key=1", (dir / "a").string(), (dir / "b").string()});
  EXPECT_EQ(unsorted.status, kExitFailure);
  EXPECT_EQ(line_count(unsorted.err), 1u);
  EXPECT_TRUE(unsorted.err.starts_with("leanstack: dmerge: ")) << unsorted.err;

  const auto sum = run({"sm2", "1", "1", "2", "2"}, "a x\n");
  EXPECT_EQ(sum.status, kExitFailure);
  EXPECT_EQ(line_count(sum.err), 1u);
}

TEST(Dispatch, PositionalAndFlagFormsAgree) {
  const std::string sorted = "a 1\na 2\nb 5\nc 1\nc 1.5\n";
  EXPECT_EQ(run({"count", "1", "1"}, sorted).out, run({"count", "--key", "key=1"}, sorted).out);
  EXPECT_EQ(run({"count", "1", "1"}, sorted).out, "a 2\nb 1\nc 2\n");
  EXPECT_EQ(run({"sm2", "1", "1", "2", "2"}, sorted).out,
            run({"sm2", "--key", "key=1", "--sum", "key=2"}, sorted).out);
  EXPECT_EQ(run({"sm2", "1", "1", "2", "2"}, sorted).out, "a 3\nb 5\nc 2.5\n");
}

TEST(Dispatch, TukubaiSubcommands) {
  EXPECT_EQ(run({"tokenize"}, "to be  or\nnot\n").out, "to\nbe\nor\nnot\n");
  EXPECT_EQ(run({"lcnt"}, "x\ny\n").out, "2\n");
  EXPECT_EQ(run({"grep", "aa"}, "aaaa\nxaax\n").out, "3\n");
  EXPECT_EQ(run({"select", "2", "4"}, "1 5\n2 4\n3 10\n").out, "1 5\n3 10\n");
  EXPECT_EQ(run({"self", "2", "1"}, "a b c\n").out, "b a\n");

  testing::TempDir dir;
  write_file(dir / "right", "1 one\n2 two\n");
  write_file(dir / "left", "x 1\ny 2\nz 3\n");
  const auto joined = run({"join", (dir / "right").string(), "key=2", "key=1",
                           (dir / "left").string()});
  EXPECT_EQ(joined.status, kExitOk) << joined.err;
  EXPECT_EQ(joined.out, "x 1 one\ny 2 two\n");
  EXPECT_EQ(run({"self", "1", (dir / "left").string()}).out, "x\ny\nz\n");
}

TEST(Dispatch, OutFlagAndEnvironmentOverrides) {
  testing::TempDir dir;
  const auto target = dir / "sorted.txt";
  const auto o = run({"--out", target.string(), "msort", "--key", "key=1"}, "b\na\n");
  EXPECT_EQ(o.status, kExitOk) << o.err;
  EXPECT_EQ(o.out, "");
  EXPECT_EQ(read_file(target), "a\nb\n");

  const auto env_target = dir / "env.txt";
  ::setenv("LEANSTACK_OUT", env_target.c_str(), 1);
  const auto via_env = run({"msort", "--key", "key=1"}, "d\nc\n");
  ::unsetenv("LEANSTACK_OUT");
  EXPECT_EQ(via_env.status, kExitOk) << via_env.err;
  EXPECT_EQ(read_file(env_target), "c\nd\n");

  ::setenv("LEANSTACK_MEM_BUDGET", "not-a-size", 1);
  const auto bad = run({"lcnt"}, "x\n");
  ::unsetenv("LEANSTACK_MEM_BUDGET");
  EXPECT_EQ(bad.status, kExitUsage);
}

TEST(Dispatch, BudgetedSortIsByteIdentical) {
  const std::string text = random_text(7, 40'000);
  const auto tokens = run({"tokenize"}, text).out;
  const auto unbounded = run({"msort", "--key", "key=1"}, tokens);
  testing::TempDir dir;
  const auto bounded = run({"--mem-budget", "16K", "--tmpdir", dir.path().string(), "msort",
                            "--key", "key=1"},
                           tokens);
  ASSERT_EQ(bounded.status, kExitOk) << bounded.err;
  EXPECT_EQ(bounded.out, unbounded.out);
  EXPECT_EQ(bounded.out, testing::join_lines(testing::oracle_sort(
                             testing::oracle_tokens(text), testing::OracleKey{1, 1})));
}

TEST(Binary, WordcountPipelineMatchesBruteForceCounter) {
  testing::TempDir dir;
  for (std::uint64_t seed : {1, 2, 3}) {
    const std::string text = random_text(seed, 5'000);
    write_file(dir / "dataset.txt", text);
    const std::string b = shell_quote(kBinary);
    int status = -1;
    const std::string out =
        sh(b + " tokenize < " + shell_quote((dir / "dataset.txt").string()) + " | " + b +
               " msort --key key=1 | " + b + " count 1 1 | " + b + " sm2 1 1 2 2",
           &status);
    EXPECT_EQ(status, 0);
    EXPECT_EQ(out, testing::oracle_word_count(text)) << "seed " << seed;
  }
}

TEST(Binary, ExitStatusAndDiagnostics) {
  int status = -1;
  const std::string b = shell_quote(kBinary);
  EXPECT_EQ(sh(b + " nosuchcmd 2>/dev/null", &status), "");
  EXPECT_EQ(status, 2);
  const std::string err = sh(b + " msort --key key=1 /nonexistent/file 2>&1 >/dev/null", &status);
  EXPECT_EQ(status, 1);
  EXPECT_EQ(line_count(err), 1u) << err;
  EXPECT_EQ(sh("printf 'b\\na\\n' | " + b + " msort --key key=1", &status), "a\nb\n");
  EXPECT_EQ(status, 0);
}

TEST(Binary, IdenticalInvocationsYieldIdenticalBytes) {
  testing::TempDir dir;
  write_file(dir / "in.txt", random_text(11, 20'000));
  const std::string b = shell_quote(kBinary);
  const std::string cmd = b + " --mem-budget 8K --tmpdir " + shell_quote(dir.path().string()) +
                          " tokenize " + shell_quote((dir / "in.txt").string()) + " | " + b +
                          " msort --key key=1 | " + b + " count 1 1";
  const std::string first = sh(cmd);
  EXPECT_FALSE(first.empty());
  EXPECT_EQ(sh(cmd), first);

  for (const char* sub : {"a", "b"}) {
    const auto o = run({"--seed", "5", "--out", (dir / sub).string(), "gen", "tables", "--bytes",
                        "20000", "--categories", "10"});
    ASSERT_EQ(o.status, kExitOk) << o.err;
  }
  for (const auto& name : {"item-1.txt", "order-4.txt", "manifest.txt"}) {
    EXPECT_EQ(read_file(dir / "a" / name), read_file(dir / "b" / name)) << name;
  }
}

class ClusterCli : public ::testing::Test {
 protected:
  void SetUp() override {
    write_file(config_, format_cluster_config(workers_.topology(false)));
  }
  Outcome cluster_run(std::vector<std::string> args, const std::string& input = {}) {
    args.insert(args.begin(), {"--cluster", config_.string(), "--job", "clitest"});
    return run(args, input);
  }

  testing::LocalWorkers workers_{3};
  testing::TempDir local_;
  fs::path config_ = local_ / "cluster.conf";
};

TEST_F(ClusterCli, DistributedCommandsCompose) {
  const std::string text = random_text(21, 30'000);
  write_file(local_ / "text.txt", text);

  const auto scatter = cluster_run({"distr-distr", (local_ / "text.txt").string(), "data/text"});
  ASSERT_EQ(scatter.status, kExitOk) << scatter.err;
  EXPECT_EQ(line_count(scatter.out), 3u);

  const auto gathered = cluster_run({"gather", "data/text"});
  ASSERT_EQ(gathered.status, kExitOk) << gathered.err;
  EXPECT_EQ(gathered.out, text);

  const auto exec = cluster_run({"distr-shell", "--input", "data/text", "--output", "work/sorted",
                                 "tokenize", "msort key=1"});
  ASSERT_EQ(exec.status, kExitOk) << exec.err;
  EXPECT_EQ(line_count(exec.out), 3u);

  const auto merged = cluster_run({"distr-dmerge", "--key", "key=1", "work/sorted"});
  ASSERT_EQ(merged.status, kExitOk) << merged.err;
  EXPECT_EQ(merged.out, testing::join_lines(testing::oracle_sort(testing::oracle_tokens(text),
                                                                 testing::OracleKey{1, 1})));

  const auto shuffled = cluster_run({"shuffle", "--key", "key=1", "work/sorted", "work/parts"});
  ASSERT_EQ(shuffled.status, kExitOk) << shuffled.err;
  std::uint64_t total = 0;
  std::istringstream rows(shuffled.out);
  std::size_t node;
  std::uint64_t count;
  while (rows >> node >> count) total += count;
  EXPECT_EQ(total, testing::oracle_tokens(text).size());

  EXPECT_EQ(cluster_run({"distr-clean"}).status, kExitOk);
  const auto after = cluster_run({"gather", "data/text"});
  EXPECT_EQ(after.status, kExitFailure);
  EXPECT_EQ(line_count(after.err), 1u);
}

TEST_F(ClusterCli, PipelineSpecFile) {
  write_file(local_ / "nums.txt", "3\n1\n2\n10\n");
  ASSERT_EQ(cluster_run({"distr-distr", (local_ / "nums.txt").string(), "in"}).status, kExitOk);
  write_file(local_ / "spec.json",
             R"({"inputs":["in"],"output":"out","stages":[{"name":"msort","args":["key=1@num"]}]})");
  const auto exec = cluster_run({"distr-exec", "--spec", (local_ / "spec.json").string()});
  ASSERT_EQ(exec.status, kExitOk) << exec.err;
  EXPECT_EQ(cluster_run({"distr-dmerge", "--key", "key=1@num", "out"}).out, "1\n2\n3\n10\n");
  EXPECT_EQ(cluster_run({"distr-shell", "--input", "in", "--output", "o", "msort"}).status,
            kExitUsage);
}

TEST_F(ClusterCli, GenBenchVerifyValidate) {
  const auto data = local_ / "data";
  ASSERT_EQ(run({"--out", data.string(), "gen", "text", "--bytes", "150000", "--file-bytes",
                 "50000"})
                .status,
            kExitOk);
  const auto tables =
      run({"--out", data.string(), "gen", "tables", "--bytes", "150000", "--categories", "20"});
  ASSERT_EQ(tables.status, kExitOk) << tables.err;
  const Manifest m = read_manifest(data / kManifestName);
  EXPECT_EQ(m.paths_of(FileKind::kText).size(), 3u);
  EXPECT_EQ(m.paths_of(FileKind::kItem).size(), 4u);
  EXPECT_EQ(m.paths_of(FileKind::kOrder).size(), 4u);

  const auto oracle_report = local_ / "oracle.txt";
  const auto distr_report = local_ / "distributed.txt";
  const auto o1 = run({"--out", oracle_report.string(), "bench", "run", "--engine", "oracle",
                       "--workload", "all", "--reps", "2", "--data", data.string()});
  ASSERT_EQ(o1.status, kExitOk) << o1.err;
  const auto o2 = cluster_run({"--out", distr_report.string(), "bench", "run", "--engine",
                               "distributed", "--workload", "all", "--reps", "2", "--data",
                               data.string()});
  ASSERT_EQ(o2.status, kExitOk) << o2.err;

  const auto verify = run({"bench", "verify", "--reports", oracle_report.string(),
                           distr_report.string()});
  EXPECT_EQ(verify.status, kExitOk) << verify.err;
  EXPECT_TRUE(verify.out.ends_with("agree\n")) << verify.out;

  const auto validate = run({"bench", "validate", "--report", oracle_report.string()});
  ASSERT_EQ(validate.status, kExitOk) << validate.err;
  EXPECT_EQ(line_count(validate.out), 1u + workload_names().size());

  // A tampered digest must be caught.
  auto rows = testing::split_lines(read_file(distr_report));
  for (auto& row : rows) {
    if (row.starts_with("grep ")) row = row.substr(0, row.rfind(' ')) + " md5:" + std::string(32, '0');
  }
  write_file(distr_report, testing::join_lines(rows));
  const auto tampered = run({"bench", "verify", "--reports", oracle_report.string(),
                             distr_report.string()});
  EXPECT_EQ(tampered.status, kExitFailure);
  EXPECT_EQ(line_count(tampered.err), 1u);
}

TEST(Binary, WorkerStartsServesAndStopsOnSigterm) {
  testing::TempDir dir;
  int out_pipe[2];
  ASSERT_EQ(::pipe(out_pipe), 0);
  const pid_t pid = ::fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    const std::string root = (dir / "root").string();
    ::execl(kBinary.c_str(), kBinary.c_str(), "worker", "--listen", "127.0.0.1:0", "--root",
            root.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(out_pipe[1]);
  std::string line;
  char c;
  while (::read(out_pipe[0], &c, 1) == 1 && c != '\n') line += c;
  ASSERT_TRUE(line.starts_with("listening 127.0.0.1:")) << line;
  const Endpoint endpoint = parse_endpoint(line.substr(std::string("listening ").size()));

  ClusterTopology topo;
  topo.workers = {endpoint};
  write_file(dir / "cluster.conf", format_cluster_config(topo));
  write_file(dir / "f.txt", "hello\nworld\n");
  EXPECT_EQ(run({"--cluster", (dir / "cluster.conf").string(), "distr-distr",
                 (dir / "f.txt").string(), "f"})
                .status,
            kExitOk);
  EXPECT_EQ(read_file(dir / "root" / "default" / "f"), "hello\nworld\n");

  ::kill(pid, SIGTERM);
  int wstatus = 0;
  ASSERT_EQ(::waitpid(pid, &wstatus, 0), pid);
  ::close(out_pipe[0]);
  ASSERT_TRUE(WIFEXITED(wstatus));
  EXPECT_EQ(WEXITSTATUS(wstatus), 0);
}

}  // namespace
}  // namespace leanstack
