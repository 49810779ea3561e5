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

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <streambuf>
#include <string>
#include <string_view>
#include <vector>

#include "leanstack/tukubai.hpp"

namespace leanstack {

/// Digest algorithm recorded in every report.
inline constexpr std::string_view kDigestAlgorithm = "md5";

/// Incremental MD5 (RFC 1321).
class Md5 {
 public:
  Md5();
  Md5(const Md5&) = delete;
  Md5& operator=(const Md5&) = delete;
  ~Md5();

  void update(std::string_view bytes);
  std::array<std::uint8_t, 16> finish();
  /// Lower-case hex of finish().
  std::string hex_finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Buffered output streambuf feeding an Md5. Flush before finishing the digest.
class DigestOutBuf : public std::streambuf {
 public:
  explicit DigestOutBuf(Md5& md5);

 protected:
  int_type overflow(int_type ch) override;
  int sync() override;

 private:
  Md5* md5_;
  std::vector<char> buffer_;
};

std::string digest_bytes(std::string_view bytes);
std::string digest_stream(std::istream& in);
std::string digest_file(const std::filesystem::path& path);
/// Digest of the file's lines after a byte-wise sort; independent of
/// the original record order.
std::string canonical_digest(const std::filesystem::path& path, const SortOptions& sort = {});

}  // namespace leanstack
