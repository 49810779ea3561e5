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

#include "leanstack/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "leanstack/error.hpp"

namespace leanstack {

double compute_rate(double input_bytes, double seconds) {
  if (!(seconds > 0.0)) throw Error("rate needs a positive wall time");
  return input_bytes / seconds;
}

double student_t_critical(double confidence, std::size_t dof) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw Error("confidence must lie in (0, 1)");
  if (dof == 0) throw Error("Student t needs at least one degree of freedom");
  const boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(boost::math::complement(dist, (1.0 - confidence) / 2.0));
}

ValidationSummary validate(std::span<const double> samples, double confidence) {
  const std::size_t n = samples.size();
  if (n < 2) {
    throw Error("validation needs at least 2 samples, got " + std::to_string(n));
  }
  const double t = student_t_critical(confidence, n - 1);
  if (std::all_of(samples.begin(), samples.end(), [&](double x) { return x == samples[0]; })) {
    return {samples[0], samples[0], samples[0], confidence, n};
  }
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double s = std::sqrt(ss / static_cast<double>(n - 1));
  const double half = t * s / std::sqrt(static_cast<double>(n));
  return {mean, mean - half, mean + half, confidence, n};
}

}  // namespace leanstack
