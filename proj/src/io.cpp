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

#include "leanstack/io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <random>

#include "leanstack/error.hpp"

namespace leanstack {

FdOutBuf::FdOutBuf(int fd, std::size_t buffer_size) : fd_(fd), buffer_(buffer_size) {
  setp(buffer_.data(), buffer_.data() + buffer_.size());
}

FdOutBuf::~FdOutBuf() { flush_buffer(); }

bool FdOutBuf::flush_buffer() {
  const char* p = pbase();
  std::size_t left = static_cast<std::size_t>(pptr() - pbase());
  while (left > 0 && error_ == 0) {
    const ssize_t n = ::write(fd_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      error_ = errno;
      break;
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  setp(buffer_.data(), buffer_.data() + buffer_.size());
  return error_ == 0;
}

FdOutBuf::int_type FdOutBuf::overflow(int_type ch) {
  if (!flush_buffer()) return traits_type::eof();
  if (!traits_type::eq_int_type(ch, traits_type::eof())) {
    *pptr() = traits_type::to_char_type(ch);
    pbump(1);
  }
  return traits_type::not_eof(ch);
}

int FdOutBuf::sync() { return flush_buffer() ? 0 : -1; }

std::streamsize FdOutBuf::xsputn(const char* s, std::streamsize n) {
  std::streamsize done = 0;
  while (done < n) {
    const std::streamsize room = epptr() - pptr();
    if (room == 0) {
      if (!flush_buffer()) return done;
      continue;
    }
    const std::streamsize chunk = std::min(room, n - done);
    std::memcpy(pptr(), s + done, static_cast<std::size_t>(chunk));
    pbump(static_cast<int>(chunk));
    done += chunk;
  }
  return done;
}

OutputFile::OutputFile(const std::filesystem::path& path, bool append)
    : path_(path), stream_(nullptr) {
  const int flags = O_WRONLY | O_CREAT | O_CLOEXEC | (append ? O_APPEND : O_TRUNC);
  fd_ = ::open(path.c_str(), flags, 0644);
  if (fd_ < 0) {
    throw Error("cannot open '" + path.string() + "' for writing: " + std::strerror(errno));
  }
  buf_ = std::make_unique<FdOutBuf>(fd_);
  stream_.rdbuf(buf_.get());
}

OutputFile::~OutputFile() {
  if (fd_ >= 0) {
    buf_.reset();
    ::close(fd_);
  }
}

void OutputFile::close() {
  if (fd_ < 0) return;
  stream_.flush();
  const int err = buf_->error();
  buf_.reset();
  stream_.rdbuf(nullptr);
  const int rc = ::close(fd_);
  const int close_err = rc == 0 ? 0 : errno;
  fd_ = -1;
  if (err != 0 || close_err != 0) {
    const int code = err != 0 ? err : close_err;
    throw Error("writing '" + path_.string() + "' failed: " + std::strerror(code) +
                (code == ENOSPC ? " (disk full)" : ""));
  }
}

namespace {

struct InputBufferHolder {
  std::vector<char> buffer = std::vector<char>(1 << 18);
};

// The buffer base is constructed before and destroyed after the filebuf.
class BufferedInput : private InputBufferHolder, public std::ifstream {
 public:
  BufferedInput() {
    rdbuf()->pubsetbuf(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  }
};

}  // namespace

std::unique_ptr<std::istream> open_input(const std::filesystem::path& path) {
  auto in = std::make_unique<BufferedInput>();
  in->open(path, std::ios::binary);
  if (!*in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

std::uint64_t copy_stream(std::istream& in, std::ostream& out) {
  std::vector<char> buf(1 << 16);
  std::uint64_t total = 0;
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const std::streamsize n = in.gcount();
    if (n <= 0) break;
    out.write(buf.data(), n);
    total += static_cast<std::uint64_t>(n);
  }
  if (in.bad()) throw Error("read failure while copying stream");
  return total;
}

ScratchDir::ScratchDir(const std::filesystem::path& parent, std::string_view prefix) {
  static std::atomic<std::uint64_t> counter{0};
  std::random_device rd;
  std::error_code ec;
  std::filesystem::create_directories(parent, ec);
  for (int attempt = 0; attempt < 16; ++attempt) {
    auto candidate = parent / (std::string(prefix) + "-" + std::to_string(::getpid()) + "-" +
                               std::to_string(counter++) + "-" + std::to_string(rd() % 100000));
    if (std::filesystem::create_directory(candidate, ec)) {
      path_ = std::move(candidate);
      return;
    }
  }
  throw Error("cannot create scratch directory under '" + parent.string() + "'");
}

ScratchDir::~ScratchDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::filesystem::path default_tmpdir() {
  if (const char* env = std::getenv("LEANSTACK_TMPDIR"); env && *env) return env;
  return std::filesystem::temp_directory_path();
}

class ConcatInput::Buf : public std::streambuf {
 public:
  explicit Buf(std::vector<std::filesystem::path> paths)
      : paths_(std::move(paths)), buffer_(1 << 16) {
    // Fail early on missing files rather than mid-stream.
    for (const auto& p : paths_) {
      if (!std::filesystem::is_regular_file(p)) {
        throw Error("cannot open '" + p.string() + "' for reading");
      }
    }
  }

 protected:
  int_type underflow() override {
    while (true) {
      if (!current_) {
        if (next_ == paths_.size()) return traits_type::eof();
        current_ = open_input(paths_[next_++]);
      }
      current_->read(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
      const std::streamsize n = current_->gcount();
      if (n > 0) {
        setg(buffer_.data(), buffer_.data(), buffer_.data() + n);
        return traits_type::to_int_type(buffer_[0]);
      }
      if (current_->bad()) throw Error("read failure in '" + paths_[next_ - 1].string() + "'");
      current_.reset();
    }
  }

 private:
  std::vector<std::filesystem::path> paths_;
  std::size_t next_ = 0;
  std::unique_ptr<std::istream> current_;
  std::vector<char> buffer_;
};

ConcatInput::ConcatInput(std::vector<std::filesystem::path> paths)
    : std::istream(nullptr), buf_(std::make_unique<Buf>(std::move(paths))) {
  rdbuf(buf_.get());
}

ConcatInput::~ConcatInput() = default;

}  // namespace leanstack
