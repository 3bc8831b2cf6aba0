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

#include "auxvi/distributions.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace auxvi {

namespace {

void require_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(expected) + " vs " +
                                std::to_string(got) + ")");
  }
}

/// Counter-keyed splitmix64 stream; cheap to construct per draw.
class SplitMix64 {
public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

private:
  std::uint64_t state_;
};

} // namespace

DiagGaussian::DiagGaussian(std::vector<Var> mean_, std::vector<Var> stddev_)
    : mean(std::move(mean_)), stddev(std::move(stddev_)) {
  if (mean.empty()) {
    throw std::invalid_argument("DiagGaussian: dimension must be at least 1");
  }
  require_dim(mean.size(), stddev.size(), "DiagGaussian");
  for (const auto& s : stddev) {
    if (!(s.value() > 0.0) || !std::isfinite(s.value())) {
      throw ad::DomainError("DiagGaussian: std entries must be positive");
    }
  }
}

DiagGaussian DiagGaussian::from_values(std::span<const double> mean,
                                       std::span<const double> stddev) {
  return DiagGaussian(ad::constants(mean), ad::constants(stddev));
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

NoiseDraw draw_noise(std::uint64_t seed, std::uint64_t counter,
                     std::size_t dim) {
  SplitMix64 engine(mix_seed(seed, counter));
  std::normal_distribution<double> normal(0.0, 1.0);
  NoiseDraw d;
  d.seed = seed;
  d.counter = counter;
  d.eps.resize(dim);
  for (auto& e : d.eps) {
    e = normal(engine);
  }
  return d;
}

DiagGaussian standard_normal(std::size_t dim) {
  if (dim < 1) {
    throw std::invalid_argument("standard_normal: dim must be at least 1");
  }
  return DiagGaussian(std::vector<Var>(dim, Var(0.0)),
                      std::vector<Var>(dim, Var(1.0)));
}

Var logpdf(const DiagGaussian& g, std::span<const Var> point) {
  require_dim(g.dim(), point.size(), "logpdf");
  Var total(0.0);
  for (std::size_t i = 0; i < g.dim(); ++i) {
    const Var u = (point[i] - g.mean[i]) / g.stddev[i];
    total += Var(-kHalfLog2Pi) - log(g.stddev[i]) - Var(0.5) * square(u);
  }
  return total;
}

double logpdf(const DiagGaussian& g, std::span<const double> point) {
  return logpdf(g, std::span<const Var>(ad::constants(point))).value();
}

std::vector<Var> reparam_sample(const DiagGaussian& g, const NoiseDraw& noise) {
  require_dim(g.dim(), noise.eps.size(), "reparam_sample");
  std::vector<Var> out;
  out.reserve(g.dim());
  for (std::size_t i = 0; i < g.dim(); ++i) {
    out.push_back(g.mean[i] + g.stddev[i] * Var(noise.eps[i]));
  }
  return out;
}

Var kl_closed_form(const DiagGaussian& a, const DiagGaussian& b) {
  require_dim(a.dim(), b.dim(), "kl_closed_form");
  Var total(0.0);
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const Var num = square(a.stddev[i]) + square(a.mean[i] - b.mean[i]);
    total += log(b.stddev[i] / a.stddev[i]) + num / (Var(2.0) * square(b.stddev[i])) -
             Var(0.5);
  }
  return total;
}

} // namespace auxvi
