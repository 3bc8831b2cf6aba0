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

// Shared fixtures for the test binaries.

#pragma once

#include "auxvi/estimators.hpp"
#include "auxvi/oracle.hpp"

#include <random>
#include <vector>

namespace auxvi::testing {

/// Hierarchical family with a random tanh net for Q(z | lambda) and R.
struct HierCase {
  ad::ParamVector params;
  HierarchicalPosterior h;
  AuxPosterior r;
};

inline HierCase random_hier(std::uint64_t seed, bool condition_on_x = false,
                            std::size_t width = 8, double jitter = 0.5) {
  HierCase c;
  const std::vector<std::size_t> hidden{width};
  c.h = make_hierarchical(c.params, 1, 1, hidden, mix_seed(seed, 21));
  c.r = make_aux(c.params, 1, 1, hidden, condition_on_x, 1, mix_seed(seed, 22));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-jitter, jitter);
  for (std::size_t i = 0; i < c.params.size(); ++i) {
    c.params[i] += u(rng);
  }
  return c;
}

/// Affine family Q(z | lambda) = N(a lambda + b, s^2), R = N(c z + d, t^2).
struct AffineCase {
  ad::ParamVector params;
  HierarchicalPosterior h;
  AuxPosterior r;
};

inline AffineCase affine_case(double a, double b, double s, double c, double d,
                              double t) {
  AffineCase k;
  k.h = make_hierarchical(k.params, 1, 1, {}, 0);
  k.r = make_aux(k.params, 1, 1, {}, false, 1, 0);
  set_affine_gaussian(k.h.cond_net, k.params, a, b, s);
  set_affine_gaussian(k.r.r_net, k.params, c, d, t);
  return k;
}

inline const std::vector<double> kX1{1.0};

} // namespace auxvi::testing
