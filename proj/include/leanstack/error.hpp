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

#include <cstdint>
#include <stdexcept>
#include <string>

namespace leanstack {

/// Base class for every failure reported by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sortedness precondition was violated. `stream` and `record` are 1-based.
class OrderViolation : public Error {
 public:
  OrderViolation(std::size_t stream, std::uint64_t record, const std::string& what)
      : Error(what), stream_(stream), record_(record) {}

  std::size_t stream() const noexcept { return stream_; }
  std::uint64_t record() const noexcept { return record_; }

 private:
  std::size_t stream_;
  std::uint64_t record_;
};

}  // namespace leanstack
