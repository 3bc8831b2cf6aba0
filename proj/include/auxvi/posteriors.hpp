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

// Variational families: a diagonal Gaussian Q(z), the hierarchical
// Q(z, lambda) = N(lambda | 0, I) Q(z | lambda) and the auxiliary R(lambda | z
// [, x]) that approximates Q(lambda | z). R is only ever evaluated.

#pragma once

#include "auxvi/distributions.hpp"
#include "auxvi/grid.hpp"
#include "auxvi/nets.hpp"

#include <span>
#include <string>

namespace auxvi {

/// Parameters: mean[dim] then log_std[dim], starting at `offset`.
struct SimplePosterior {
  std::size_t dim = 1;
  std::size_t offset = 0;

  DiagGaussian distribution(std::span<const Var> params) const;
  DiagGaussian distribution(std::span<const double> params) const;
};

/// Registers q.mean[i] = 0 and q.log_std[i] = -1.
SimplePosterior add_simple_posterior(ad::ParamVector& params, std::size_t dim,
                                     const std::string& prefix = "q");

struct JointSample {
  std::vector<Var> lambda;
  std::vector<Var> z;
  Var log_q; ///< log Q(z, lambda | theta)
};

struct HierarchicalPosterior {
  std::size_t aux_dim = 1;    ///< m
  std::size_t latent_dim = 1; ///< n
  Mlp cond_net;               ///< lambda -> Gaussian over z

  DiagGaussian conditional(std::span<const Var> params,
                           std::span<const Var> lambda) const;

  /// log N(lambda | 0, I) + log Q(z | lambda, theta)
  Var log_density(std::span<const Var> params, std::span<const Var> z,
                  std::span<const Var> lambda) const;

  /// Ancestral draw: lambda = noise_lambda, z = mu(lambda) + sigma(lambda) eps.
  JointSample sample_joint(std::span<const Var> params,
                           const NoiseDraw& noise_lambda,
                           const NoiseDraw& noise_z) const;
};

HierarchicalPosterior
make_hierarchical(ad::ParamVector& params, std::size_t aux_dim,
                  std::size_t latent_dim, std::span<const std::size_t> hidden,
                  std::uint64_t seed, const std::string& prefix = "q");

struct AuxPosterior {
  Mlp r_net; ///< z [, x] -> Gaussian over lambda
  bool conditions_on_x = false;
  std::size_t latent_dim = 1;
  std::size_t data_dim = 1;

  std::size_t aux_dim() const { return r_net.target_dim(); }

  DiagGaussian conditional(std::span<const Var> params,
                           std::span<const Var> z,
                           std::span<const double> x) const;

  Var log_density(std::span<const Var> params, std::span<const Var> lambda,
                  std::span<const Var> z, std::span<const double> x) const;
};

AuxPosterior make_aux(ad::ParamVector& params, std::size_t latent_dim,
                      std::size_t aux_dim, std::span<const std::size_t> hidden,
                      bool condition_on_x, std::size_t data_dim,
                      std::uint64_t seed, const std::string& prefix = "r");

/// log Q(z | theta) by trapezoid quadrature of the joint over a lambda grid.
/// Throws OracleInfeasible when m > 2.
double marginal_q_oracle(const HierarchicalPosterior& h,
                         std::span<const double> params,
                         std::span<const double> z,
                         const oracle::Grid& lambda_grid);

/// Exact Q(lambda | z) for the affine family Q(z | lambda) = N(a lambda + b,
/// s^2) with m = n = 1: N(a (z - b) / (a^2 + s^2), s^2 / (a^2 + s^2)).
DiagGaussian exact_aux_posterior(const HierarchicalPosterior& h,
                                 std::span<const double> params, double z);

/// Writes an affine 1 -> 1 net so its output is N(slope u + intercept, std^2).
void set_affine_gaussian(const Mlp& net, ad::ParamVector& params, double slope,
                         double intercept, double std);

/// Writes `r` (affine, 1 -> 1, not conditioned on x) to equal
/// exact_aux_posterior of the affine family (a, b, s).
void set_exact_aux(const AuxPosterior& r, ad::ParamVector& params, double a,
                   double b, double s);

} // namespace auxvi
