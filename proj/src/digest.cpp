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

#include "leanstack/digest.hpp"

#include <openssl/evp.h>

#include <ostream>

#include "leanstack/error.hpp"
#include "leanstack/io.hpp"

namespace leanstack {

struct Md5::Impl {
  EVP_MD_CTX* ctx = nullptr;
};

Md5::Md5() : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_MD_CTX_new();
  if (!impl_->ctx || EVP_DigestInit_ex(impl_->ctx, EVP_md5(), nullptr) != 1) {
    throw Error("md5: digest initialisation failed");
  }
}

Md5::~Md5() { EVP_MD_CTX_free(impl_->ctx); }

void Md5::update(std::string_view bytes) {
  if (EVP_DigestUpdate(impl_->ctx, bytes.data(), bytes.size()) != 1) {
    throw Error("md5: update failed");
  }
}

std::array<std::uint8_t, 16> Md5::finish() {
  std::array<std::uint8_t, 16> out{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(impl_->ctx, out.data(), &len) != 1 || len != out.size()) {
    throw Error("md5: finalisation failed");
  }
  return out;
}

std::string Md5::hex_finish() {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (std::uint8_t b : finish()) {
    hex += kHex[b >> 4];
    hex += kHex[b & 0xF];
  }
  return hex;
}

DigestOutBuf::DigestOutBuf(Md5& md5) : md5_(&md5), buffer_(1 << 16) {
  setp(buffer_.data(), buffer_.data() + buffer_.size());
}

int DigestOutBuf::sync() {
  md5_->update(std::string_view(pbase(), static_cast<std::size_t>(pptr() - pbase())));
  setp(buffer_.data(), buffer_.data() + buffer_.size());
  return 0;
}

DigestOutBuf::int_type DigestOutBuf::overflow(int_type ch) {
  sync();
  if (!traits_type::eq_int_type(ch, traits_type::eof())) {
    *pptr() = traits_type::to_char_type(ch);
    pbump(1);
  }
  return traits_type::not_eof(ch);
}

std::string digest_bytes(std::string_view bytes) {
  Md5 md5;
  md5.update(bytes);
  return md5.hex_finish();
}

std::string digest_stream(std::istream& in) {
  Md5 md5;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto n = static_cast<std::size_t>(in.gcount());
    if (n == 0) break;
    md5.update(std::string_view(buf.data(), n));
  }
  if (in.bad()) throw Error("digest: read failure");
  return md5.hex_finish();
}

std::string digest_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return digest_stream(*in);
}

std::string canonical_digest(const std::filesystem::path& path, const SortOptions& sort) {
  auto in = open_input(path);
  Md5 md5;
  DigestOutBuf buf(md5);
  std::ostream out(&buf);
  sort_lines(*in, out, sort);
  out.flush();
  return md5.hex_finish();
}

}  // namespace leanstack
