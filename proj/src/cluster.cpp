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

#include "leanstack/cluster.hpp"

#include <exception>
#include <future>
#include <thread>

#include <json.hpp>

#include "leanstack/error.hpp"
#include "leanstack/io.hpp"
#include "leanstack/tukubai.hpp"

namespace leanstack {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// One request/response conversation with a worker.
class RemoteConnection {
 public:
  RemoteConnection(const Endpoint& endpoint, const std::string& job, const std::string& name)
      : name_(name) {
    try {
      socket_ = Socket::connect(endpoint);
      write_frame(socket_, FrameType::kHello, job);
    } catch (const Error& e) {
      throw Error(name_ + ": " + e.what());
    }
    expect_ok();
  }

  Socket& socket() noexcept { return socket_; }

  void send(FrameType type, std::string_view payload) {
    try {
      write_frame(socket_, type, payload);
    } catch (const Error& e) {
      throw Error(name_ + ": " + e.what());
    }
  }

  std::string expect_ok() {
    std::optional<Frame> reply;
    try {
      reply = read_frame(socket_);
    } catch (const Error& e) {
      throw Error(name_ + ": " + e.what());
    }
    if (!reply) throw Error(name_ + ": connection closed by worker");
    if (reply->kind() == FrameType::kErr) throw Error(name_ + ": " + reply->payload);
    if (reply->kind() != FrameType::kOk) {
      throw Error(name_ + ": unexpected " + frame_type_name(reply->type) + " reply");
    }
    return std::move(reply->payload);
  }

 private:
  std::string name_;
  Socket socket_;
};

class RemoteWriter : public NodeWriter {
 public:
  RemoteWriter(const Endpoint& ep, const std::string& job, const std::string& name,
               const std::string& relative)
      : conn_(ep, job, name), buf_(conn_.socket()), stream_(&buf_), name_(name) {
    conn_.send(FrameType::kPutChunk, relative);
    stream_.exceptions(std::ios::badbit);
  }

  std::ostream& stream() override { return stream_; }

  std::uint64_t finish() override {
    try {
      stream_.flush();
      buf_.finish();
    } catch (const Error& e) {
      throw Error(name_ + ": " + e.what());
    }
    return std::stoull(conn_.expect_ok());
  }

 private:
  RemoteConnection conn_;
  FrameOutBuf buf_;
  std::ostream stream_;
  std::string name_;
};

class RemoteStream : public std::istream {
 public:
  RemoteStream(const Endpoint& ep, const std::string& job, const std::string& name,
               const std::string& relative)
      : std::istream(nullptr), conn_(ep, job, name), buf_(conn_.socket(), name) {
    conn_.send(FrameType::kStreamFile, relative);
    rdbuf(&buf_);
    exceptions(std::ios::badbit);
  }

 private:
  RemoteConnection conn_;
  FrameInBuf buf_;
};

class RemoteNode : public Node {
 public:
  RemoteNode(Endpoint ep, std::string job, std::string name)
      : ep_(std::move(ep)), job_(std::move(job)), name_(std::move(name)) {}

  const std::string& name() const override { return name_; }

  std::unique_ptr<NodeWriter> open_put(const std::string& relative) override {
    return std::make_unique<RemoteWriter>(ep_, job_, name_, relative);
  }

  std::unique_ptr<std::istream> open_stream(const std::string& relative) override {
    return std::make_unique<RemoteStream>(ep_, job_, name_, relative);
  }

  PipelineResult exec(const PipelineSpec& spec) override {
    RemoteConnection conn(ep_, job_, name_);
    conn.send(FrameType::kExecPipeline, pipeline_to_json(spec));
    const auto reply = nlohmann::json::parse(conn.expect_ok());
    return {reply.at("records").get<std::uint64_t>(), reply.at("seconds").get<double>()};
  }

  void remove(const std::string& relative) override {
    RemoteConnection conn(ep_, job_, name_);
    conn.send(FrameType::kDeleteJob, relative);
    conn.expect_ok();
  }

 private:
  Endpoint ep_;
  std::string job_;
  std::string name_;
};

class LocalWriter : public NodeWriter {
 public:
  LocalWriter(std::filesystem::path target, std::string name)
      : target_(std::move(target)), partial_(target_.string() + ".part"), name_(std::move(name)) {
    std::filesystem::create_directories(target_.parent_path());
    file_ = std::make_unique<OutputFile>(partial_);
  }

  std::ostream& stream() override { return file_->stream(); }

  std::uint64_t finish() override {
    try {
      file_->close();
    } catch (const Error& e) {
      throw Error(name_ + ": " + e.what());
    }
    std::filesystem::rename(partial_, target_);
    return std::filesystem::file_size(target_);
  }

 private:
  std::filesystem::path target_;
  std::filesystem::path partial_;
  std::string name_;
  std::unique_ptr<OutputFile> file_;
};

class LocalNode : public Node {
 public:
  LocalNode(std::filesystem::path root, std::string job, std::string name, SortOptions sort)
      : store_(std::move(root), std::move(sort)), job_(std::move(job)), name_(std::move(name)) {
    store_.register_job(job_);
  }

  const std::string& name() const override { return name_; }

  std::unique_ptr<NodeWriter> open_put(const std::string& relative) override {
    return std::make_unique<LocalWriter>(store_.resolve(job_, relative), name_);
  }

  std::unique_ptr<std::istream> open_stream(const std::string& relative) override {
    const auto path = store_.resolve(job_, relative);
    if (!std::filesystem::is_regular_file(path)) {
      throw Error(name_ + ": no such file '" + relative + "'");
    }
    return open_input(path);
  }

  PipelineResult exec(const PipelineSpec& spec) override {
    try {
      return store_.exec(job_, spec);
    } catch (const Error& e) {
      throw Error(name_ + ": " + e.what());
    }
  }

  void remove(const std::string& relative) override { store_.remove(job_, relative); }

 private:
  NodeStore store_;
  std::string job_;
  std::string name_;
};

// Runs fn(i) for every node on its own thread; rethrows the first failure
// in node order after all threads finish.
template <class Fn>
void for_each_node_concurrently(std::size_t n, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    threads.emplace_back([&, i] {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void remove_everywhere(Cluster& cluster, const std::string& relative) noexcept {
  for (std::size_t i = 0; i < cluster.size(); ++i) {
    try {
      cluster.node(i).remove(relative);
    } catch (...) {
    }
  }
}

}  // namespace

ClusterTopology parse_cluster_config(std::istream& in) {
  ClusterTopology topo;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw Error("cluster config line " + std::to_string(line_no) + ": expected KEY = VALUE");
    }
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (key == "worker") {
      topo.workers.push_back(parse_endpoint(value));
    } else if (key == "leader_participates") {
      if (value != "true" && value != "false") {
        throw Error("cluster config line " + std::to_string(line_no) +
                    ": leader_participates must be true or false");
      }
      topo.leader_participates = value == "true";
    } else if (key == "leader_root") {
      topo.leader_root = value;
    } else {
      throw Error("cluster config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  return topo;
}

ClusterTopology load_cluster_config(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_cluster_config(*in);
}

std::string format_cluster_config(const ClusterTopology& topo) {
  std::string out;
  for (const auto& w : topo.workers) out += "worker = " + w.to_string() + "\n";
  out += std::string("leader_participates = ") + (topo.leader_participates ? "true" : "false") + "\n";
  if (!topo.leader_root.empty()) out += "leader_root = " + topo.leader_root.string() + "\n";
  return out;
}

std::unique_ptr<Node> make_remote_node(Endpoint endpoint, std::string job, std::string name) {
  validate_job_id(job);
  return std::make_unique<RemoteNode>(std::move(endpoint), std::move(job), std::move(name));
}

std::unique_ptr<Node> make_local_node(std::filesystem::path root, std::string job,
                                      std::string name, SortOptions sort) {
  return std::make_unique<LocalNode>(std::move(root), std::move(job), std::move(name),
                                     std::move(sort));
}

Cluster::Cluster(const ClusterTopology& topo, std::string job, SortOptions sort)
    : job_(std::move(job)) {
  validate_job_id(job_);
  if (topo.workers.empty()) throw Error("empty cluster: at least one worker is required");
  if (topo.leader_participates) {
    const auto root = topo.leader_root.empty() ? default_tmpdir() / "leanstack-leader"
                                               : topo.leader_root;
    nodes_.push_back(make_local_node(root, job_, "leader", sort));
  }
  for (std::size_t i = 0; i < topo.workers.size(); ++i) {
    nodes_.push_back(make_remote_node(topo.workers[i], job_,
                                      "worker " + std::to_string(i + 1) + " (" +
                                          topo.workers[i].to_string() + ")"));
  }
}

std::vector<std::uint64_t> chunk_boundaries(const std::filesystem::path& path, std::size_t parts) {
  if (parts == 0) throw Error("cannot split into zero chunks");
  const std::uint64_t size = std::filesystem::file_size(path);
  auto in = open_input(path);
  std::vector<std::uint64_t> offsets(parts + 1, 0);
  offsets[parts] = size;
  for (std::size_t i = 1; i < parts; ++i) {
    auto target = static_cast<std::uint64_t>(
        static_cast<unsigned __int128>(size) * i / parts);
    target = std::max(target, offsets[i - 1]);
    if (target > 0 && target < size) {
      in->clear();
      in->seekg(static_cast<std::streamoff>(target - 1));
      char c = 0;
      in->get(c);
      if (c != '\n') {
        std::string rest;
        if (std::getline(*in, rest) && !in->eof()) {
          target = static_cast<std::uint64_t>(in->tellg());
        } else {
          target = size;
        }
      }
    }
    offsets[i] = target;
  }
  return offsets;
}

std::vector<ChunkInfo> distr_distr(Cluster& cluster, const std::filesystem::path& file,
                                   const std::string& dest) {
  if (cluster.size() == 0) throw Error("empty cluster");
  if (!std::filesystem::is_regular_file(file)) {
    throw Error("distr-distr: no such file '" + file.string() + "'");
  }
  const auto offsets = chunk_boundaries(file, cluster.size());
  std::vector<ChunkInfo> chunks(cluster.size());
  try {
    for_each_node_concurrently(cluster.size(), [&](std::size_t i) {
      Node& node = cluster.node(i);
      auto writer = node.open_put(dest);
      auto in = open_input(file);
      in->seekg(static_cast<std::streamoff>(offsets[i]));
      std::uint64_t left = offsets[i + 1] - offsets[i];
      std::vector<char> buf(1 << 16);
      while (left > 0) {
        const auto want = static_cast<std::streamsize>(std::min<std::uint64_t>(left, buf.size()));
        in->read(buf.data(), want);
        if (in->gcount() != want) throw Error("distr-distr: short read on '" + file.string() + "'");
        writer->stream().write(buf.data(), want);
        left -= static_cast<std::uint64_t>(want);
      }
      chunks[i] = {node.name(), offsets[i], writer->finish()};
    });
  } catch (...) {
    remove_everywhere(cluster, dest);
    throw;
  }
  return chunks;
}

std::vector<ExecReport> remote_exec(Cluster& cluster, const PipelineSpec& spec) {
  if (spec.stages.empty()) throw Error("pipeline has no stages");
  for (const auto& s : spec.stages) validate_stage(s);
  std::vector<ExecReport> reports(cluster.size());
  for_each_node_concurrently(cluster.size(), [&](std::size_t i) {
    const PipelineResult r = cluster.node(i).exec(spec);
    reports[i] = {cluster.node(i).name(), r.records, r.seconds};
  });
  return reports;
}

void distr_dmerge(Cluster& cluster, const KeyRange& key, const std::string& remote,
                  std::ostream& out) {
  std::vector<std::unique_ptr<std::istream>> streams;
  std::vector<std::istream*> inputs;
  std::vector<std::string> labels;
  // Opening every stream first lets all workers send concurrently.
  for (std::size_t i = 0; i < cluster.size(); ++i) {
    streams.push_back(cluster.node(i).open_stream(remote));
    inputs.push_back(streams.back().get());
    labels.push_back(cluster.node(i).name() + " file '" + remote + "'");
  }
  dmerge(inputs, out, key, labels);
}

std::uint64_t stable_hash(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::uint64_t> shuffle_by_key(Cluster& cluster, const std::string& remote,
                                          const KeyRange& key, const std::string& dest) {
  if (remote == dest) throw Error("shuffle: destination must differ from source");
  const std::size_t n = cluster.size();
  std::vector<std::uint64_t> counts(n, 0);
  try {
    std::vector<std::unique_ptr<NodeWriter>> writers;
    for (std::size_t i = 0; i < n; ++i) writers.push_back(cluster.node(i).open_put(dest));
    std::string line;
    for (std::size_t s = 0; s < n; ++s) {
      auto in = cluster.node(s).open_stream(remote);
      std::uint64_t record = 0;
      while (read_line(*in, line)) {
        ++record;
        std::string_view k;
        try {
          k = key_text(line, key);
        } catch (const Error& e) {
          throw Error("shuffle: " + cluster.node(s).name() + " record " + std::to_string(record) +
                      ": " + e.what());
        }
        const std::size_t target = n == 1 ? 0 : stable_hash(k) % n;
        std::ostream& os = writers[target]->stream();
        os.write(line.data(), static_cast<std::streamsize>(line.size()));
        os.put('\n');
        ++counts[target];
      }
    }
    for (auto& w : writers) w->finish();
  } catch (...) {
    remove_everywhere(cluster, dest);
    throw;
  }
  return counts;
}

std::uint64_t gather(Cluster& cluster, const std::string& remote, std::ostream& out) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < cluster.size(); ++i) {
    auto in = cluster.node(i).open_stream(remote);
    total += copy_stream(*in, out);
  }
  return total;
}

std::uint64_t gather(Cluster& cluster, const std::string& remote,
                     const std::filesystem::path& local) {
  OutputFile file(local);
  const std::uint64_t total = gather(cluster, remote, file.stream());
  try {
    file.close();
  } catch (const Error& e) {
    throw Error(std::string("gather: ") + e.what());
  }
  return total;
}

}  // namespace leanstack
