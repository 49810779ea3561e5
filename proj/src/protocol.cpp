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

#include "leanstack/protocol.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <charconv>
#include <cstring>

#include "leanstack/error.hpp"

namespace leanstack {

namespace {

std::atomic<std::size_t> g_high_water{0};

void note_high_water(std::size_t bytes) noexcept {
  std::size_t seen = g_high_water.load(std::memory_order_relaxed);
  while (bytes > seen && !g_high_water.compare_exchange_weak(seen, bytes)) {
  }
}

}  // namespace

bool is_known_frame_type(std::uint8_t type) noexcept { return type >= 0x01 && type <= 0x09; }

std::string frame_type_name(std::uint8_t type) {
  switch (static_cast<FrameType>(type)) {
    case FrameType::kHello: return "HELLO";
    case FrameType::kPutChunk: return "PUT_CHUNK";
    case FrameType::kExecPipeline: return "EXEC_PIPELINE";
    case FrameType::kStreamFile: return "STREAM_FILE";
    case FrameType::kData: return "DATA";
    case FrameType::kEnd: return "END";
    case FrameType::kOk: return "OK";
    case FrameType::kErr: return "ERR";
    case FrameType::kDeleteJob: return "DELETE_JOB";
  }
  return "UNKNOWN(" + std::to_string(type) + ")";
}

Endpoint parse_endpoint(std::string_view text) {
  const std::size_t colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error("invalid endpoint '" + std::string(text) + "' (expected HOST:PORT)");
  }
  Endpoint ep;
  ep.host = std::string(text.substr(0, colon));
  const std::string_view port = text.substr(colon + 1);
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (port.empty() || ec != std::errc() || ptr != port.data() + port.size() || value > 65535) {
    throw Error("invalid port in endpoint '" + std::string(text) + "'");
  }
  ep.port = static_cast<std::uint16_t>(value);
  return ep;
}

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

Socket::~Socket() { close(); }

Socket Socket::connect(const Endpoint& endpoint) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  const std::string port = std::to_string(endpoint.port);
  if (int rc = ::getaddrinfo(endpoint.host.c_str(), port.c_str(), &hints, &result); rc != 0) {
    throw Error("cannot resolve " + endpoint.to_string() + ": " + ::gai_strerror(rc));
  }
  int last_errno = 0;
  for (addrinfo* ai = result; ai; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) {
      last_errno = errno;
      continue;
    }
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      ::freeaddrinfo(result);
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return Socket(fd);
    }
    last_errno = errno;
    ::close(fd);
  }
  ::freeaddrinfo(result);
  throw Error("cannot connect to " + endpoint.to_string() + ": " + std::strerror(last_errno));
}

void Socket::send_all(const void* data, std::size_t size) {
  const auto* p = static_cast<const char*>(data);
  while (size > 0) {
    const ssize_t n = ::send(fd_, p, size, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(std::string("connection lost: ") + std::strerror(errno));
    }
    p += n;
    size -= static_cast<std::size_t>(n);
  }
}

bool Socket::recv_all(void* data, std::size_t size) {
  auto* p = static_cast<char*>(data);
  std::size_t got = 0;
  while (got < size) {
    const ssize_t n = ::recv(fd_, p + got, size - got, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(std::string("connection lost: ") + std::strerror(errno));
    }
    if (n == 0) {
      if (got == 0) return false;
      throw Error("connection lost: peer closed mid-frame");
    }
    got += static_cast<std::size_t>(n);
  }
  return true;
}

void Socket::shutdown() noexcept {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::close() noexcept {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

Listener::Listener(const Endpoint& endpoint) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* result = nullptr;
  const std::string port = std::to_string(endpoint.port);
  const char* host = endpoint.host.empty() || endpoint.host == "*" ? nullptr : endpoint.host.c_str();
  if (int rc = ::getaddrinfo(host, port.c_str(), &hints, &result); rc != 0) {
    throw Error("cannot resolve " + endpoint.to_string() + ": " + ::gai_strerror(rc));
  }
  int last_errno = 0;
  for (addrinfo* ai = result; ai; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) {
      last_errno = errno;
      continue;
    }
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
      fd_ = fd;
      break;
    }
    last_errno = errno;
    ::close(fd);
  }
  ::freeaddrinfo(result);
  if (fd_ < 0) {
    throw Error("cannot listen on " + endpoint.to_string() + ": " + std::strerror(last_errno));
  }
  sockaddr_storage addr{};
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = addr.ss_family == AF_INET6
              ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
              : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

Listener::~Listener() { close(); }

Socket Listener::accept() {
  while (true) {
    const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd >= 0) {
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return Socket(fd);
    }
    if (errno == EINTR || errno == ECONNABORTED) continue;
    return Socket();
  }
}

void Listener::close() noexcept {
  if (fd_ >= 0) {
    // shutdown() wakes a thread blocked in accept().
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

void write_frame(Socket& socket, FrameType type, std::string_view payload) {
  if (payload.size() > kMaxFramePayload) throw Error("frame payload too large");
  unsigned char header[5];
  const auto len = static_cast<std::uint32_t>(payload.size());
  header[0] = static_cast<unsigned char>(len >> 24);
  header[1] = static_cast<unsigned char>(len >> 16);
  header[2] = static_cast<unsigned char>(len >> 8);
  header[3] = static_cast<unsigned char>(len);
  header[4] = static_cast<unsigned char>(type);
  if (payload.size() <= 4096) {
    // One send for small frames.
    char buf[4096 + 5];
    std::memcpy(buf, header, 5);
    std::memcpy(buf + 5, payload.data(), payload.size());
    socket.send_all(buf, payload.size() + 5);
    return;
  }
  socket.send_all(header, 5);
  socket.send_all(payload.data(), payload.size());
}

std::optional<Frame> read_frame(Socket& socket) {
  unsigned char header[5];
  if (!socket.recv_all(header, 5)) return std::nullopt;
  const std::uint32_t len = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                            (std::uint32_t{header[2]} << 8) | std::uint32_t{header[3]};
  if (len > kMaxFramePayload) {
    throw ProtocolError("malformed frame: payload length " + std::to_string(len) +
                        " exceeds limit");
  }
  Frame frame;
  frame.type = header[4];
  frame.payload.resize(len);
  if (len > 0 && !socket.recv_all(frame.payload.data(), len)) {
    throw Error("connection lost: peer closed mid-frame");
  }
  return frame;
}

FrameOutBuf::FrameOutBuf(Socket& socket) : socket_(&socket), buffer_(kDataChunk) {
  setp(buffer_.data(), buffer_.data() + buffer_.size());
}

void FrameOutBuf::send_pending() {
  const auto n = static_cast<std::size_t>(pptr() - pbase());
  if (n > 0) write_frame(*socket_, FrameType::kData, std::string_view(pbase(), n));
  setp(buffer_.data(), buffer_.data() + buffer_.size());
}

FrameOutBuf::int_type FrameOutBuf::overflow(int_type ch) {
  send_pending();
  if (!traits_type::eq_int_type(ch, traits_type::eof())) {
    *pptr() = traits_type::to_char_type(ch);
    pbump(1);
  }
  return traits_type::not_eof(ch);
}

int FrameOutBuf::sync() {
  send_pending();
  return 0;
}

void FrameOutBuf::finish() {
  send_pending();
  write_frame(*socket_, FrameType::kEnd);
}

FrameInBuf::FrameInBuf(Socket& socket, std::string label)
    : socket_(&socket), label_(std::move(label)) {
  setg(nullptr, nullptr, nullptr);
}

std::size_t FrameInBuf::high_water_bytes() noexcept {
  return g_high_water.load(std::memory_order_relaxed);
}

FrameInBuf::int_type FrameInBuf::underflow() {
  while (!ended_) {
    std::optional<Frame> frame;
    try {
      frame = read_frame(*socket_);
    } catch (const Error& e) {
      throw Error(label_ + ": " + e.what());
    }
    if (!frame) throw Error(label_ + ": connection lost before end of stream");
    switch (frame->kind()) {
      case FrameType::kData:
        if (frame->payload.empty()) continue;
        payload_ = std::move(frame->payload);
        note_high_water(payload_.capacity());
        setg(payload_.data(), payload_.data(), payload_.data() + payload_.size());
        return traits_type::to_int_type(payload_[0]);
      case FrameType::kEnd:
        ended_ = true;
        break;
      case FrameType::kErr:
        throw Error(label_ + ": " + frame->payload);
      default:
        throw Error(label_ + ": unexpected " + frame_type_name(frame->type) + " frame in stream");
    }
  }
  return traits_type::eof();
}

}  // namespace leanstack
