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

// Leader side of the distributed layer: topology, participating nodes and
// the scatter / remote-exec / gather-merge / shuffle operations.

#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "leanstack/daemon.hpp"
#include "leanstack/pipeline.hpp"
#include "leanstack/protocol.hpp"
#include "leanstack/record.hpp"

namespace leanstack {

struct ClusterTopology {
  std::vector<Endpoint> workers;
  /// false models distr-* (leader only coordinates); true models clust-*.
  bool leader_participates = false;
  /// Data root of the leader when it participates.
  std::filesystem::path leader_root;
};

/// Parses the line-oriented config: `worker = HOST:PORT` (repeatable),
/// `leader_participates = true|false`, `leader_root = DIR`; `#` starts a comment.
ClusterTopology parse_cluster_config(std::istream& in);
ClusterTopology load_cluster_config(const std::filesystem::path& path);
std::string format_cluster_config(const ClusterTopology& topo);

/// Write side of an upload to a node; finish() commits it.
class NodeWriter {
 public:
  virtual ~NodeWriter() = default;
  virtual std::ostream& stream() = 0;
  /// Flushes and waits for the node to acknowledge; returns bytes stored.
  virtual std::uint64_t finish() = 0;
};

/// One participant of a cluster computation.
class Node {
 public:
  virtual ~Node() = default;
  virtual const std::string& name() const = 0;
  virtual std::unique_ptr<NodeWriter> open_put(const std::string& relative) = 0;
  /// Stream over a node file. Errors surface as exceptions from reads.
  virtual std::unique_ptr<std::istream> open_stream(const std::string& relative) = 0;
  virtual PipelineResult exec(const PipelineSpec& spec) = 0;
  /// Removes a path, or the whole job when `relative` is empty.
  virtual void remove(const std::string& relative) = 0;
};

/// Node reached over the wire protocol; one connection per operation.
std::unique_ptr<Node> make_remote_node(Endpoint endpoint, std::string job, std::string name);
/// The leader acting on its own data root.
std::unique_ptr<Node> make_local_node(std::filesystem::path root, std::string job,
                                      std::string name, SortOptions sort = {});

/// A job-scoped view of the participants, leader first when it participates.
class Cluster {
 public:
  explicit Cluster(const ClusterTopology& topo, std::string job = "default",
                   SortOptions sort = {});

  std::size_t size() const noexcept { return nodes_.size(); }
  Node& node(std::size_t i) { return *nodes_.at(i); }
  const std::string& job() const noexcept { return job_; }

 private:
  std::string job_;
  std::vector<std::unique_ptr<Node>> nodes_;
};

struct ChunkInfo {
  std::string node;
  std::uint64_t offset = 0;
  std::uint64_t bytes = 0;
};

/// Byte offsets splitting `path` into `parts` chunks, each boundary snapped
/// forward to the next record start. Returns parts+1 offsets.
std::vector<std::uint64_t> chunk_boundaries(const std::filesystem::path& path, std::size_t parts);

/// Scatter: chunk i of `file` is stored on participant i at `dest`.
std::vector<ChunkInfo> distr_distr(Cluster& cluster, const std::filesystem::path& file,
                                   const std::string& dest);

struct ExecReport {
  std::string node;
  std::uint64_t records = 0;
  double seconds = 0.0;
};

/// Runs `spec` on every participant concurrently.
std::vector<ExecReport> remote_exec(Cluster& cluster, const PipelineSpec& spec);

/// Streams every participant's sorted `remote` file and merges them into
/// `out`; ties go to the earlier participant.
void distr_dmerge(Cluster& cluster, const KeyRange& key, const std::string& remote,
                  std::ostream& out);

/// 64-bit FNV-1a.
std::uint64_t stable_hash(std::string_view bytes) noexcept;

/// Routes every record of `remote` (on all participants) to participant
/// stable_hash(key text) mod size, written at `dest`. Returns per-node counts.
std::vector<std::uint64_t> shuffle_by_key(Cluster& cluster, const std::string& remote,
                                          const KeyRange& key, const std::string& dest);

/// Concatenates every participant's `remote` into `out`, in participant order.
std::uint64_t gather(Cluster& cluster, const std::string& remote, std::ostream& out);
/// gather() into a leader file; write failures (e.g. a full disk) are reported.
std::uint64_t gather(Cluster& cluster, const std::string& remote,
                     const std::filesystem::path& local);

}  // namespace leanstack
