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

// Shared fixtures and brute-force reference implementations. The oracles
// here deliberately avoid the library's comparison and parsing code.

#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "leanstack/cluster.hpp"
#include "leanstack/daemon.hpp"
#include "leanstack/io.hpp"

namespace leanstack::testing {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

inline std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

/// Runs a stream transformer over a string.
inline std::string through(const std::function<void(std::istream&, std::ostream&)>& fn,
                           const std::string& input) {
  std::istringstream in(input);
  std::ostringstream out;
  fn(in, out);
  return out.str();
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("leanstack-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

/// In-process worker daemons on ephemeral loopback ports.
class LocalWorkers {
 public:
  explicit LocalWorkers(std::size_t n, SortOptions sort = {}) {
    for (std::size_t i = 0; i < n; ++i) {
      daemons_.push_back(std::make_unique<WorkerDaemon>(
          Endpoint{"127.0.0.1", 0}, dir_ / ("worker-" + std::to_string(i + 1)), sort));
      daemons_.back()->start();
    }
  }
  ~LocalWorkers() {
    for (auto& d : daemons_) d->stop();
  }

  ClusterTopology topology(bool leader_participates = false) const {
    ClusterTopology topo;
    for (const auto& d : daemons_) topo.workers.push_back(d->endpoint());
    topo.leader_participates = leader_participates;
    topo.leader_root = dir_ / "leader";
    return topo;
  }
  WorkerDaemon& daemon(std::size_t i) { return *daemons_.at(i); }
  std::size_t size() const { return daemons_.size(); }
  const fs::path& dir() const { return dir_.path(); }

 private:
  TempDir dir_;
  std::vector<std::unique_ptr<WorkerDaemon>> daemons_;
};

// ---- oracles ----

inline std::vector<std::string> oracle_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ' ') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

/// Decimal comparison by normalising to (sign, integer digits, fraction digits).
inline int oracle_decimal_cmp(const std::string& a, const std::string& b) {
  auto norm = [](std::string s) {
    bool neg = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
      neg = s[0] == '-';
      s.erase(0, 1);
    }
    std::string ip = s, fp;
    if (auto dot = s.find('.'); dot != std::string::npos) {
      ip = s.substr(0, dot);
      fp = s.substr(dot + 1);
    }
    ip.erase(0, std::min(ip.find_first_not_of('0'), ip.size()));
    while (!fp.empty() && fp.back() == '0') fp.pop_back();
    if (ip.empty() && fp.empty()) neg = false;
    return std::make_tuple(neg, ip, fp);
  };
  auto [na, ia, fa] = norm(a);
  auto [nb, ib, fb] = norm(b);
  auto magnitude = [](const std::string& i1, const std::string& f1, const std::string& i2,
                      const std::string& f2) {
    if (i1.size() != i2.size()) return i1.size() < i2.size() ? -1 : 1;
    if (i1 != i2) return i1 < i2 ? -1 : 1;
    const std::size_t n = std::max(f1.size(), f2.size());
    const std::string g1 = f1 + std::string(n - f1.size(), '0');
    const std::string g2 = f2 + std::string(n - f2.size(), '0');
    return g1 == g2 ? 0 : (g1 < g2 ? -1 : 1);
  };
  if (na != nb) return na ? -1 : 1;
  const int m = magnitude(ia, fa, ib, fb);
  return na ? -m : m;
}

struct OracleKey {
  std::size_t from = 1, to = 1;
  bool numeric = false;
  bool descending = false;
};

inline int oracle_compare(const std::string& a, const std::string& b, const OracleKey& k) {
  const auto fa = oracle_fields(a), fb = oracle_fields(b);
  for (std::size_t c = k.from; c <= k.to; ++c) {
    const std::string& x = fa.at(c - 1);
    const std::string& y = fb.at(c - 1);
    int r = 0;
    if (k.numeric) {
      r = oracle_decimal_cmp(x, y);
    } else {
      r = x.compare(y) < 0 ? -1 : (x.compare(y) > 0 ? 1 : 0);
    }
    if (r != 0) return k.descending ? -r : r;
  }
  return 0;
}

inline std::vector<std::string> oracle_sort(std::vector<std::string> lines, const OracleKey& k) {
  std::stable_sort(lines.begin(), lines.end(), [&](const std::string& a, const std::string& b) {
    return oracle_compare(a, b, k) < 0;
  });
  return lines;
}

inline std::vector<std::string> oracle_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::uint64_t oracle_grep(const std::string& text, const std::string& needle) {
  std::uint64_t n = 0;
  for (const auto& line : split_lines(text)) {
    for (std::size_t pos = line.find(needle); pos != std::string::npos;
         pos = line.find(needle, pos + needle.size())) {
      ++n;
    }
  }
  return n;
}

/// "word count" lines in byte order of the word.
inline std::string oracle_word_count(const std::string& text) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& w : oracle_tokens(text)) ++counts[w];
  std::string out;
  for (const auto& [w, n] : counts) out += w + " " + std::to_string(n) + "\n";
  return out;
}

/// Group key (column `key`) -> sum of integer column `sum`, key byte order.
inline std::string oracle_group_sum(const std::vector<std::string>& lines, std::size_t key,
                                    std::size_t sum) {
  std::map<std::string, long long> sums;
  for (const auto& l : lines) {
    const auto f = oracle_fields(l);
    sums[f.at(key - 1)] += std::stoll(f.at(sum - 1));
  }
  std::string out;
  for (const auto& [k, v] : sums) out += k + " " + std::to_string(v) + "\n";
  return out;
}

/// Sum of two-decimal values held as integer hundredths.
inline std::string oracle_cents_group_sum(const std::vector<std::string>& lines, std::size_t key,
                                          std::size_t sum) {
  std::map<std::string, long long> sums;
  for (const auto& l : lines) {
    const auto f = oracle_fields(l);
    std::string v = f.at(sum - 1);
    const auto dot = v.find('.');
    sums[f.at(key - 1)] += std::stoll(v.substr(0, dot)) * 100 + std::stoll(v.substr(dot + 1));
  }
  std::string out;
  for (const auto& [k, v] : sums) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%lld.%02lld", v / 100, v % 100);
    out += k + " " + buf + "\n";
  }
  return out;
}

inline std::string oracle_group_count(const std::vector<std::string>& lines, std::size_t key) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& l : lines) ++counts[oracle_fields(l).at(key - 1)];
  std::string out;
  for (const auto& [k, v] : counts) out += k + " " + std::to_string(v) + "\n";
  return out;
}

/// Nested-loop inner join on single columns: left fields then the right
/// record's non-key fields, iterated left-major.
inline std::vector<std::string> oracle_join(const std::vector<std::string>& left,
                                            const std::vector<std::string>& right,
                                            std::size_t lcol, std::size_t rcol) {
  std::vector<std::vector<std::string>> rfields;
  for (const auto& r : right) rfields.push_back(oracle_fields(r));
  std::vector<std::string> out;
  for (const auto& l : left) {
    const std::string lkey = oracle_fields(l).at(lcol - 1);
    for (const auto& rf : rfields) {
      if (lkey != rf.at(rcol - 1)) continue;
      std::string row = l;
      for (std::size_t i = 0; i < rf.size(); ++i) {
        if (i + 1 != rcol) row += " " + rf[i];
      }
      out.push_back(row);
    }
  }
  return out;
}

inline std::vector<std::string> sorted_copy(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

/// Random single-space records of `width` fields drawn from `alphabet`.
inline std::vector<std::string> random_records(std::mt19937_64& rng, std::size_t n,
                                               std::size_t width, const std::string& alphabet,
                                               std::size_t max_len = 3) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string line;
    for (std::size_t f = 0; f < width; ++f) {
      if (f) line += ' ';
      const std::size_t l = len(rng);
      for (std::size_t c = 0; c < l; ++c) line += alphabet[pick(rng)];
    }
    out.push_back(line);
  }
  return out;
}

}  // namespace leanstack::testing
