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

#pragma once

#include "auxvi/autodiff.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace auxvi {

using ad::Var;

/// Diagonal Gaussian parametrized by mean and standard deviation.
///
/// Entries may be tape variables (differentiable) or constants. The
/// constructor checks that both vectors have the same non-zero length and
/// that every std entry is strictly positive and finite.
struct DiagGaussian {
  std::vector<Var> mean;
  std::vector<Var> stddev;

  DiagGaussian(std::vector<Var> mean, std::vector<Var> stddev);
  static DiagGaussian from_values(std::span<const double> mean,
                                  std::span<const double> stddev);

  std::size_t dim() const { return mean.size(); }
  std::vector<double> mean_values() const { return ad::values_of(mean); }
  std::vector<double> std_values() const { return ad::values_of(stddev); }
};

/// Standard-normal noise for one reparametrized draw.
struct NoiseDraw {
  std::vector<double> eps;
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;
};

/// Counter-based stream: the draw depends only on (seed, counter, dim), so
/// samples can be generated in any order and reproduce bit-for-bit.
NoiseDraw draw_noise(std::uint64_t seed, std::uint64_t counter,
                     std::size_t dim);

/// Mixes two 64-bit keys into one (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

DiagGaussian standard_normal(std::size_t dim);

Var logpdf(const DiagGaussian& g, std::span<const Var> point);
double logpdf(const DiagGaussian& g, std::span<const double> point);

/// mean + std * eps
std::vector<Var> reparam_sample(const DiagGaussian& g, const NoiseDraw& noise);

/// KL(a || b) in closed form, differentiable in both arguments.
Var kl_closed_form(const DiagGaussian& a, const DiagGaussian& b);

inline constexpr double kHalfLog2Pi = 0.91893853320467274178;

} // namespace auxvi
