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
#include <span>

namespace leanstack {

/// Population-mean estimate with a Student t confidence interval.
struct ValidationSummary {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double confidence = 0.95;
  std::size_t n = 0;

  double half_width() const noexcept { return (ci_high - ci_low) / 2.0; }
};

/// bytes / seconds. Throws Error unless seconds > 0.
double compute_rate(double input_bytes, double seconds);

/// Two-sided Student t critical value t(alpha/2, dof).
double student_t_critical(double confidence, std::size_t dof);

/// mean +/- t(alpha/2, n-1) * s / sqrt(n). Requires n >= 2 and
/// confidence in (0, 1).
ValidationSummary validate(std::span<const double> samples, double confidence = 0.95);

}  // namespace leanstack
