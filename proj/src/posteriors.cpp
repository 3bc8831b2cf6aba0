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

#include "auxvi/posteriors.hpp"

#include "auxvi/models.hpp"

#include <cmath>
#include <stdexcept>

namespace auxvi {

DiagGaussian SimplePosterior::distribution(std::span<const Var> params) const {
  if (params.size() < offset + 2 * dim) {
    throw std::invalid_argument("simple posterior: parameter vector too short");
  }
  std::vector<Var> mean(params.begin() + static_cast<std::ptrdiff_t>(offset),
                        params.begin() +
                            static_cast<std::ptrdiff_t>(offset + dim));
  std::vector<Var> sd;
  sd.reserve(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    sd.push_back(exp(params[offset + dim + i]));
  }
  return DiagGaussian(std::move(mean), std::move(sd));
}

DiagGaussian
SimplePosterior::distribution(std::span<const double> params) const {
  const auto p = ad::constants(params);
  return distribution(std::span<const Var>(p));
}

SimplePosterior add_simple_posterior(ad::ParamVector& params, std::size_t dim,
                                     const std::string& prefix) {
  if (dim < 1) {
    throw std::invalid_argument("simple posterior: dim must be at least 1");
  }
  SimplePosterior q{dim, params.size()};
  for (std::size_t i = 0; i < dim; ++i) {
    params.add(prefix + ".mean[" + std::to_string(i) + "]", 0.0);
  }
  for (std::size_t i = 0; i < dim; ++i) {
    params.add(prefix + ".log_std[" + std::to_string(i) + "]", -1.0);
  }
  return q;
}

DiagGaussian
HierarchicalPosterior::conditional(std::span<const Var> params,
                                   std::span<const Var> lambda) const {
  return cond_net.forward(params, lambda);
}

Var HierarchicalPosterior::log_density(std::span<const Var> params,
                                       std::span<const Var> z,
                                       std::span<const Var> lambda) const {
  if (z.size() != latent_dim || lambda.size() != aux_dim) {
    throw std::invalid_argument("hierarchical posterior: dimension mismatch");
  }
  return logpdf(standard_normal(aux_dim), lambda) +
         logpdf(conditional(params, lambda), z);
}

JointSample
HierarchicalPosterior::sample_joint(std::span<const Var> params,
                                    const NoiseDraw& noise_lambda,
                                    const NoiseDraw& noise_z) const {
  if (noise_lambda.eps.size() != aux_dim || noise_z.eps.size() != latent_dim) {
    throw std::invalid_argument("sample_joint: noise dimension mismatch");
  }
  JointSample s;
  s.lambda = reparam_sample(standard_normal(aux_dim), noise_lambda);
  const DiagGaussian cond = conditional(params, s.lambda);
  s.z = reparam_sample(cond, noise_z);
  s.log_q = logpdf(standard_normal(aux_dim), s.lambda) + logpdf(cond, s.z);
  return s;
}

HierarchicalPosterior make_hierarchical(ad::ParamVector& params,
                                        std::size_t aux_dim,
                                        std::size_t latent_dim,
                                        std::span<const std::size_t> hidden,
                                        std::uint64_t seed,
                                        const std::string& prefix) {
  HierarchicalPosterior h;
  h.aux_dim = aux_dim;
  h.latent_dim = latent_dim;
  h.cond_net =
      make_mlp(params, prefix, net_shape(aux_dim, hidden, latent_dim), seed);
  return h;
}

DiagGaussian AuxPosterior::conditional(std::span<const Var> params,
                                       std::span<const Var> z,
                                       std::span<const double> x) const {
  if (z.size() != latent_dim) {
    throw std::invalid_argument("aux posterior: z dimension mismatch");
  }
  if (conditions_on_x && x.size() != data_dim) {
    throw std::invalid_argument("aux posterior: x dimension mismatch");
  }
  return r_net.forward(params, aux_input(z, x, conditions_on_x));
}

Var AuxPosterior::log_density(std::span<const Var> params,
                              std::span<const Var> lambda,
                              std::span<const Var> z,
                              std::span<const double> x) const {
  return logpdf(conditional(params, z, x), lambda);
}

AuxPosterior make_aux(ad::ParamVector& params, std::size_t latent_dim,
                      std::size_t aux_dim, std::span<const std::size_t> hidden,
                      bool condition_on_x, std::size_t data_dim,
                      std::uint64_t seed, const std::string& prefix) {
  AuxPosterior r;
  r.conditions_on_x = condition_on_x;
  r.latent_dim = latent_dim;
  r.data_dim = data_dim;
  const std::size_t in = latent_dim + (condition_on_x ? data_dim : 0);
  r.r_net = make_mlp(params, prefix, net_shape(in, hidden, aux_dim), seed);
  return r;
}

double marginal_q_oracle(const HierarchicalPosterior& h,
                         std::span<const double> params,
                         std::span<const double> z,
                         const oracle::Grid& lambda_grid) {
  if (h.aux_dim > 2) {
    throw oracle::OracleInfeasible(
        "marginal_q_oracle: lambda dimension above 2");
  }
  if (lambda_grid.dim() != h.aux_dim) {
    throw std::invalid_argument("marginal_q_oracle: grid dimension mismatch");
  }
  const auto p = ad::constants(params);
  const auto zv = ad::constants(z);
  std::vector<double> lambda(h.aux_dim);
  std::vector<double> logs(lambda_grid.size());
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    lambda_grid.point(i, lambda);
    const auto lv = ad::constants(lambda);
    logs[i] = h.log_density(p, zv, lv).value();
  }
  return oracle::log_trapezoid(lambda_grid.weights(), logs);
}

DiagGaussian exact_aux_posterior(const HierarchicalPosterior& h,
                                 std::span<const double> params, double z) {
  const Mlp& net = h.cond_net;
  if (!net.is_affine() || h.aux_dim != 1 || h.latent_dim != 1) {
    throw std::invalid_argument(
        "exact_aux_posterior: requires an affine 1 -> 1 conditional net");
  }
  if (params[net.weight_index(0, 1, 0)] != 0.0) {
    throw std::invalid_argument(
        "exact_aux_posterior: log-std head must not depend on lambda");
  }
  const double a = params[net.weight_index(0, 0, 0)];
  const double b = params[net.bias_index(0, 0)];
  const double s = std::exp(params[net.bias_index(0, 1)]);
  const double denom = a * a + s * s;
  const double mean = a * (z - b) / denom;
  const double sd = std::sqrt(s * s / denom);
  return DiagGaussian::from_values(std::span<const double>(&mean, 1),
                                   std::span<const double>(&sd, 1));
}

void set_affine_gaussian(const Mlp& net, ad::ParamVector& params, double slope,
                         double intercept, double std) {
  if (!net.is_affine() || net.input_dim() != 1 || net.target_dim() != 1) {
    throw std::invalid_argument("set_affine_gaussian: requires a 1 -> 1 net");
  }
  params[net.weight_index(0, 0, 0)] = slope;
  params[net.bias_index(0, 0)] = intercept;
  params[net.weight_index(0, 1, 0)] = 0.0;
  params[net.bias_index(0, 1)] = std::log(std);
}

void set_exact_aux(const AuxPosterior& r, ad::ParamVector& params, double a,
                   double b, double s) {
  if (r.conditions_on_x) {
    throw std::invalid_argument("set_exact_aux: r must not condition on x");
  }
  const double denom = a * a + s * s;
  set_affine_gaussian(r.r_net, params, a / denom, -a * b / denom,
                      std::sqrt(s * s / denom));
}

} // namespace auxvi
