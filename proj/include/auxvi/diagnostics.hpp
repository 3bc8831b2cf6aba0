/*
Copyright 2026 The auxvi Authors
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

// Unimodality diagnostics for posterior samples.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace auxvi::diag {

/// Hartigan's dip statistic: sup-distance between the empirical CDF and the
/// closest unimodal CDF. Zero for perfectly unimodal (e.g. evenly spaced)
/// data; larger values indicate multimodality.
double dip_statistic(std::span<const double> samples);

struct DipTest {
  double dip = 0.0;
  /// Fraction of uniform reference samples of the same size whose dip is at
  /// least `dip`.
  double p_value = 1.0;

  bool multimodal(double alpha = 0.05) const { return p_value < alpha; }
};

/// Dip test calibrated against `reps` uniform samples of the same size.
DipTest dip_test(std::span<const double> samples, std::size_t reps = 200,
                 std::uint64_t seed = 1);

} // namespace auxvi::diag
