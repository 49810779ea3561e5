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

// File and stream plumbing shared by the commands.

#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace leanstack {

/// Output streambuf over a POSIX file descriptor that remembers the errno
/// of the first failed write, so callers can report e.g. ENOSPC.
class FdOutBuf : public std::streambuf {
 public:
  explicit FdOutBuf(int fd, std::size_t buffer_size = 1 << 16);
  ~FdOutBuf() override;

  int error() const noexcept { return error_; }

 protected:
  int_type overflow(int_type ch) override;
  int sync() override;
  std::streamsize xsputn(const char* s, std::streamsize n) override;

 private:
  bool flush_buffer();

  int fd_;
  int error_ = 0;
  std::vector<char> buffer_;
};

/// A file opened for writing. close() flushes and throws Error with the
/// OS diagnostic if any write failed.
class OutputFile {
 public:
  explicit OutputFile(const std::filesystem::path& path, bool append = false);
  OutputFile(const OutputFile&) = delete;
  OutputFile& operator=(const OutputFile&) = delete;
  ~OutputFile();

  std::ostream& stream() noexcept { return stream_; }
  void close();

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::unique_ptr<FdOutBuf> buf_;
  std::ostream stream_;
};

/// Opens `path` for reading with a large buffer; throws Error on failure.
std::unique_ptr<std::istream> open_input(const std::filesystem::path& path);

/// Reads one line (without its LF) into `line`. Returns false at EOF.
inline bool read_line(std::istream& in, std::string& line) {
  return static_cast<bool>(std::getline(in, line));
}

/// Copies the whole of `in` to `out`; returns the byte count.
std::uint64_t copy_stream(std::istream& in, std::ostream& out);

/// Temporary directory removed (recursively) on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::filesystem::path& parent, std::string_view prefix = "leanstack");
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  ~ScratchDir();

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

/// Default scratch parent: $LEANSTACK_TMPDIR, else the system temp dir.
std::filesystem::path default_tmpdir();

}  // namespace leanstack

namespace leanstack {

/// Input stream reading a list of files back to back.
class ConcatInput : public std::istream {
 public:
  explicit ConcatInput(std::vector<std::filesystem::path> paths);
  ~ConcatInput() override;

 private:
  class Buf;
  std::unique_ptr<Buf> buf_;
};

}  // namespace leanstack
