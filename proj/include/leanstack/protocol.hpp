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

// Framed wire protocol between the leader and worker daemons.
//
// Every frame is a 4-byte big-endian payload length, a 1-byte type and
// the payload. Byte values of the frame types are part of the protocol
// and must never change; see docs/protocol.md.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <istream>
#include <ostream>

#include "leanstack/error.hpp"

namespace leanstack {

enum class FrameType : std::uint8_t {
  kHello = 0x01,
  kPutChunk = 0x02,
  kExecPipeline = 0x03,
  kStreamFile = 0x04,
  kData = 0x05,
  kEnd = 0x06,
  kOk = 0x07,
  kErr = 0x08,
  kDeleteJob = 0x09,
};

inline constexpr std::string_view kProtocolVersion = "leanstack/1";
/// Largest payload a peer accepts in one frame.
inline constexpr std::uint32_t kMaxFramePayload = 16u << 20;
/// Payload size of DATA frames produced by FrameOutBuf.
inline constexpr std::size_t kDataChunk = 64u << 10;

bool is_known_frame_type(std::uint8_t type) noexcept;
std::string frame_type_name(std::uint8_t type);

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  std::string to_string() const { return host + ":" + std::to_string(port); }
  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

/// Parses "HOST:PORT".
Endpoint parse_endpoint(std::string_view text);

/// Connected stream socket.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) noexcept : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  static Socket connect(const Endpoint& endpoint);

  int fd() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }

  void send_all(const void* data, std::size_t size);
  /// Reads exactly `size` bytes. Returns false on EOF before the first
  /// byte; throws on EOF mid-read or on socket errors.
  bool recv_all(void* data, std::size_t size);
  void shutdown() noexcept;
  void close() noexcept;

 private:
  int fd_ = -1;
};

/// Listening socket. Port 0 binds an ephemeral port.
class Listener {
 public:
  explicit Listener(const Endpoint& endpoint);
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;
  ~Listener();

  std::uint16_t port() const noexcept { return port_; }
  /// Blocks for the next connection; returns an invalid socket once closed.
  Socket accept();
  void close() noexcept;

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

struct Frame {
  std::uint8_t type = 0;
  std::string payload;

  FrameType kind() const noexcept { return static_cast<FrameType>(type); }
};

/// Raised when a peer sends a frame that violates the protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

void write_frame(Socket& socket, FrameType type, std::string_view payload = {});
/// nullopt on a clean EOF between frames. Throws ProtocolError on an
/// oversized length.
std::optional<Frame> read_frame(Socket& socket);

/// Streams bytes as DATA frames of at most kDataChunk bytes.
class FrameOutBuf : public std::streambuf {
 public:
  explicit FrameOutBuf(Socket& socket);
  /// Flushes pending data and sends END.
  void finish();

 protected:
  int_type overflow(int_type ch) override;
  int sync() override;

 private:
  void send_pending();

  Socket* socket_;
  std::vector<char> buffer_;
};

/// Consumes DATA frames until END. An ERR frame raises Error prefixed by
/// `label`. Holds at most one frame payload at a time.
class FrameInBuf : public std::streambuf {
 public:
  FrameInBuf(Socket& socket, std::string label);

  /// Largest payload buffer any FrameInBuf in this process has held.
  static std::size_t high_water_bytes() noexcept;

 protected:
  int_type underflow() override;

 private:
  Socket* socket_;
  std::string label_;
  std::string payload_;
  bool ended_ = false;
};

}  // namespace leanstack
