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

#include "leanstack/daemon.hpp"

#include <algorithm>
#include <chrono>

#include <json.hpp>

#include "leanstack/error.hpp"
#include "leanstack/io.hpp"

namespace leanstack {

void validate_job_id(std::string_view job) {
  const bool ok = !job.empty() && job != "." && job != ".." &&
                  std::all_of(job.begin(), job.end(), [](char c) {
                    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                           (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
                  });
  if (!ok) throw Error("invalid job id '" + std::string(job) + "'");
}

NodeStore::NodeStore(std::filesystem::path root, SortOptions sort)
    : root_(std::move(root)), sort_(std::move(sort)) {
  std::filesystem::create_directories(root_);
}

std::filesystem::path NodeStore::job_dir(std::string_view job) const {
  validate_job_id(job);
  return root_ / std::string(job);
}

std::filesystem::path NodeStore::resolve(std::string_view job, std::string_view relative) const {
  return resolve_relative(job_dir(job), relative);
}

PipelineResult NodeStore::exec(std::string_view job, const PipelineSpec& spec) {
  const auto dir = job_dir(job);
  std::filesystem::create_directories(dir);
  return run_pipeline(spec, dir, sort_);
}

void NodeStore::remove(std::string_view job, std::string_view relative) {
  std::error_code ec;
  if (relative.empty()) {
    std::filesystem::remove_all(job_dir(job), ec);
    std::lock_guard lock(mutex_);
    jobs_.erase(std::string(job));
  } else {
    std::filesystem::remove_all(resolve(job, relative), ec);
  }
  if (ec) throw Error("cannot remove: " + ec.message());
}

std::set<std::string> NodeStore::jobs() const {
  std::lock_guard lock(mutex_);
  return jobs_;
}

void NodeStore::register_job(std::string_view job) {
  validate_job_id(job);
  std::lock_guard lock(mutex_);
  jobs_.emplace(job);
}

WorkerDaemon::WorkerDaemon(Endpoint listen, std::filesystem::path root, SortOptions sort)
    : listen_(std::move(listen)), store_(std::move(root), std::move(sort)) {}

WorkerDaemon::~WorkerDaemon() { stop(); }

void WorkerDaemon::start() {
  listener_ = std::make_unique<Listener>(listen_);
  port_ = listener_->port();
  acceptor_ = std::thread([this] { accept_loop(); });
}

void WorkerDaemon::stop() {
  if (stopping_.exchange(true)) {
    if (acceptor_.joinable()) acceptor_.join();
    return;
  }
  if (listener_) listener_->close();
  if (acceptor_.joinable()) acceptor_.join();
  std::list<std::unique_ptr<Connection>> conns;
  {
    std::lock_guard lock(mutex_);
    conns.swap(connections_);
  }
  for (auto& c : conns) c->socket.shutdown();
  for (auto& c : conns) {
    if (c->thread.joinable()) c->thread.join();
  }
}

void WorkerDaemon::wait() {
  while (!stopping_.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

void WorkerDaemon::reap_finished() {
  std::lock_guard lock(mutex_);
  for (auto it = connections_.begin(); it != connections_.end();) {
    if ((*it)->done.load()) {
      (*it)->thread.join();
      it = connections_.erase(it);
    } else {
      ++it;
    }
  }
}

void WorkerDaemon::accept_loop() {
  while (!stopping_.load()) {
    Socket socket = listener_->accept();
    if (!socket.valid()) break;
    reap_finished();
    auto conn = std::make_unique<Connection>();
    conn->socket = std::move(socket);
    Connection* raw = conn.get();
    std::lock_guard lock(mutex_);
    if (stopping_.load()) break;
    connections_.push_back(std::move(conn));
    raw->thread = std::thread([this, raw] {
      serve(*raw);
      raw->done.store(true);
    });
  }
}

namespace {

// Reads DATA frames into `out` until END. Returns bytes written.
std::uint64_t receive_file(Socket& socket, std::ostream* out) {
  std::uint64_t bytes = 0;
  while (true) {
    auto frame = read_frame(socket);
    if (!frame) throw Error("connection closed during upload");
    if (frame->kind() == FrameType::kEnd) return bytes;
    if (frame->kind() != FrameType::kData) {
      throw ProtocolError("unexpected " + frame_type_name(frame->type) + " frame during upload");
    }
    if (out) out->write(frame->payload.data(), static_cast<std::streamsize>(frame->payload.size()));
    bytes += frame->payload.size();
  }
}

}  // namespace

void WorkerDaemon::serve(Connection& conn) {
  Socket& socket = conn.socket;
  std::string job;
  try {
    auto hello = read_frame(socket);
    if (!hello) return;
    if (hello->kind() != FrameType::kHello) {
      throw ProtocolError("expected HELLO, got " + frame_type_name(hello->type));
    }
    try {
      store_.register_job(hello->payload);
    } catch (const Error& e) {
      write_frame(socket, FrameType::kErr, e.what());
      return;
    }
    job = hello->payload;
    write_frame(socket, FrameType::kOk, kProtocolVersion);

    while (auto frame = read_frame(socket)) {
      switch (frame->kind()) {
        case FrameType::kPutChunk: {
          std::string error;
          std::uint64_t bytes = 0;
          std::filesystem::path target, partial;
          std::unique_ptr<OutputFile> file;
          try {
            target = store_.resolve(job, frame->payload);
            std::filesystem::create_directories(target.parent_path());
            partial = target;
            partial += ".part";
            file = std::make_unique<OutputFile>(partial);
          } catch (const Error& e) {
            error = e.what();
          }
          bytes = receive_file(socket, file ? &file->stream() : nullptr);
          if (file) {
            try {
              file->close();
              std::filesystem::rename(partial, target);
            } catch (const std::exception& e) {
              error = e.what();
              std::error_code ec;
              std::filesystem::remove(partial, ec);
            }
          }
          if (error.empty()) {
            write_frame(socket, FrameType::kOk, std::to_string(bytes));
          } else {
            write_frame(socket, FrameType::kErr, error);
          }
          break;
        }
        case FrameType::kExecPipeline: {
          try {
            const PipelineSpec spec = pipeline_from_json(frame->payload);
            const PipelineResult r = store_.exec(job, spec);
            nlohmann::json reply{{"records", r.records}, {"seconds", r.seconds}};
            write_frame(socket, FrameType::kOk, reply.dump());
          } catch (const std::exception& e) {
            write_frame(socket, FrameType::kErr, e.what());
          }
          break;
        }
        case FrameType::kStreamFile: {
          std::unique_ptr<std::istream> in;
          try {
            const auto path = store_.resolve(job, frame->payload);
            if (!std::filesystem::is_regular_file(path)) {
              throw Error("no such file '" + frame->payload + "'");
            }
            in = open_input(path);
          } catch (const Error& e) {
            write_frame(socket, FrameType::kErr, e.what());
            break;
          }
          FrameOutBuf buf(socket);
          std::ostream out(&buf);
          copy_stream(*in, out);
          out.flush();
          buf.finish();
          break;
        }
        case FrameType::kDeleteJob: {
          try {
            store_.remove(job, frame->payload);
            write_frame(socket, FrameType::kOk);
          } catch (const Error& e) {
            write_frame(socket, FrameType::kErr, e.what());
          }
          break;
        }
        default:
          throw ProtocolError("unexpected " + frame_type_name(frame->type) + " frame");
      }
    }
  } catch (const ProtocolError& e) {
    try {
      write_frame(socket, FrameType::kErr, e.what());
    } catch (const Error&) {
    }
  } catch (const std::exception&) {
    // Peer went away; nothing to report to.
  }
  socket.shutdown();
}

}  // namespace leanstack
