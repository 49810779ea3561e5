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

#pragma once

#include <atomic>
#include <filesystem>
#include <istream>
#include <list>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>

#include "leanstack/pipeline.hpp"
#include "leanstack/protocol.hpp"

namespace leanstack {

/// Throws Error unless `job` is a non-empty [A-Za-z0-9_.-] token other than "." or "..".
void validate_job_id(std::string_view job);

/// Node-local storage and execution. Every artifact of a job lives under
/// root/<job>/. Shared by the worker daemon and by a participating leader.
class NodeStore {
 public:
  explicit NodeStore(std::filesystem::path root, SortOptions sort = {});

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path job_dir(std::string_view job) const;
  /// Job-scoped absolute path for a relative path.
  std::filesystem::path resolve(std::string_view job, std::string_view relative) const;

  PipelineResult exec(std::string_view job, const PipelineSpec& spec);
  /// Removes one path, or the whole job directory when `relative` is empty.
  void remove(std::string_view job, std::string_view relative);

  /// Job registry: jobs seen since start and not yet deleted.
  std::set<std::string> jobs() const;
  void register_job(std::string_view job);

 private:
  std::filesystem::path root_;
  SortOptions sort_;
  mutable std::mutex mutex_;
  std::set<std::string> jobs_;
};

/// TCP worker serving the framed protocol. Each connection is handled on
/// its own thread; requests on one connection run sequentially.
class WorkerDaemon {
 public:
  WorkerDaemon(Endpoint listen, std::filesystem::path root, SortOptions sort = {});
  WorkerDaemon(const WorkerDaemon&) = delete;
  WorkerDaemon& operator=(const WorkerDaemon&) = delete;
  ~WorkerDaemon();

  /// Binds and starts accepting. Port 0 picks an ephemeral port.
  void start();
  /// Closes the listener and all open connections, then joins threads.
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();

  std::uint16_t port() const noexcept { return port_; }
  Endpoint endpoint() const { return {listen_.host, port_}; }
  NodeStore& store() noexcept { return store_; }

 private:
  struct Connection {
    Socket socket;
    std::thread thread;
    std::atomic<bool> done{false};
  };

  void accept_loop();
  void serve(Connection& conn);
  void reap_finished();

  Endpoint listen_;
  NodeStore store_;
  std::unique_ptr<Listener> listener_;
  std::uint16_t port_ = 0;
  std::thread acceptor_;
  std::atomic<bool> stopping_{false};
  std::mutex mutex_;
  std::list<std::unique_ptr<Connection>> connections_;
};

}  // namespace leanstack
