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

#include "auxvi/models.hpp"

#include "auxvi/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace auxvi {

namespace {

void check_point(const GenerativeModel& m, std::span<const double> x,
                 std::size_t z_dim) {
  if (x.size() != m.data_dim() || z_dim != m.latent_dim()) {
    throw std::invalid_argument(m.name() + ": dimension mismatch in log_joint");
  }
}

double normal_logpdf(double v, double mean, double var) {
  const double d = v - mean;
  return -kHalfLog2Pi - 0.5 * std::log(var) - 0.5 * d * d / var;
}

} // namespace

double GenerativeModel::log_joint_value(std::span<const double> x,
                                        std::span<const double> z) const {
  const auto zv = ad::constants(z);
  return log_joint(x, zv).value();
}

ConjugateGaussianModel::ConjugateGaussianModel(double prior_var,
                                               double lik_var)
    : prior_var_(prior_var), lik_var_(lik_var) {
  if (!(prior_var > 0.0) || !(lik_var > 0.0) || !std::isfinite(prior_var) ||
      !std::isfinite(lik_var)) {
    throw std::invalid_argument("conjugate model: variances must be positive");
  }
}

Var ConjugateGaussianModel::log_joint(std::span<const double> x,
                                      std::span<const Var> z) const {
  check_point(*this, x, z.size());
  const DiagGaussian prior =
      DiagGaussian({Var(0.0)}, {Var(std::sqrt(prior_var_))});
  const DiagGaussian lik = DiagGaussian({z[0]}, {Var(std::sqrt(lik_var_))});
  const Var xv(x[0]);
  return logpdf(prior, z) + logpdf(lik, std::span<const Var>(&xv, 1));
}

double
ConjugateGaussianModel::oracle_log_evidence(std::span<const double> x) const {
  return normal_logpdf(x[0], 0.0, prior_var_ + lik_var_);
}

std::optional<DiagGaussian>
ConjugateGaussianModel::oracle_posterior(std::span<const double> x) const {
  const double var = 1.0 / (1.0 / prior_var_ + 1.0 / lik_var_);
  const double mean = var * x[0] / lik_var_;
  const double sd = std::sqrt(var);
  return DiagGaussian::from_values(std::span<const double>(&mean, 1),
                                   std::span<const double>(&sd, 1));
}

BimodalModel::BimodalModel(double sep, double lik_std)
    : sep_(sep), lik_std_(lik_std) {
  if (!(lik_std > 0.0) || !std::isfinite(lik_std) || !std::isfinite(sep)) {
    throw std::invalid_argument("bimodal model: lik_std must be positive");
  }
}

Var BimodalModel::log_joint(std::span<const double> x,
                            std::span<const Var> z) const {
  check_point(*this, x, z.size());
  const DiagGaussian prior = standard_normal(1);
  const DiagGaussian lik = DiagGaussian({square(z[0])}, {Var(lik_std_)});
  const Var xv(x[0]);
  return logpdf(prior, z) + logpdf(lik, std::span<const Var>(&xv, 1));
}

double BimodalModel::oracle_log_evidence(std::span<const double> x) const {
  const oracle::Axis axis{-12.0, 12.0, evidence_points};
  std::vector<double> w(axis.points);
  std::vector<double> lv(axis.points);
  for (std::size_t i = 0; i < axis.points; ++i) {
    const double z = axis.node(i);
    w[i] = axis.weight(i);
    lv[i] = normal_logpdf(z, 0.0, 1.0) +
            normal_logpdf(x[0], z * z, lik_std_ * lik_std_);
  }
  return oracle::log_trapezoid(w, lv);
}

std::shared_ptr<const GenerativeModel>
conjugate_gaussian_model(double prior_var, double lik_var) {
  return std::make_shared<ConjugateGaussianModel>(prior_var, lik_var);
}

std::shared_ptr<const GenerativeModel> bimodal_model(double sep,
                                                     double lik_std) {
  return std::make_shared<BimodalModel>(sep, lik_std);
}

std::vector<Var> aux_input(std::span<const Var> z, std::span<const double> x,
                           bool condition_on_x) {
  std::vector<Var> in(z.begin(), z.end());
  if (condition_on_x) {
    in.insert(in.end(), x.begin(), x.end());
  }
  return in;
}

ExtendedModel::ExtendedModel(std::shared_ptr<const GenerativeModel> base,
                             Mlp aux_net, bool condition_on_x,
                             AuxDensityPath path)
    : base_(std::move(base)), aux_net_(std::move(aux_net)),
      condition_on_x_(condition_on_x), path_(path) {
  if (!base_) {
    throw std::invalid_argument("extend: null base model");
  }
  const std::size_t expected =
      base_->latent_dim() + (condition_on_x_ ? base_->data_dim() : 0);
  if (aux_net_.input_dim() != expected) {
    throw std::invalid_argument(
        "extend: aux net input width " + std::to_string(aux_net_.input_dim()) +
        " does not match " + std::to_string(expected));
  }
}

DiagGaussian ExtendedModel::aux_conditional(std::span<const Var> params,
                                            std::span<const double> x,
                                            std::span<const Var> z) const {
  return aux_net_.forward(params, aux_input(z, x, condition_on_x_));
}

Var ExtendedModel::log_aux(std::span<const Var> params,
                           std::span<const double> x, std::span<const Var> z,
                           std::span<const Var> lambda) const {
  const DiagGaussian g = aux_conditional(params, x, z);
  if (path_ == AuxDensityPath::shared) {
    return logpdf(g, lambda);
  }
  if (lambda.size() != g.dim()) {
    throw std::invalid_argument("extended model: lambda dimension mismatch");
  }
  // -1/2 |(lambda - mu) / sigma|^2 - sum log sigma - (m/2) log 2 pi
  Var quad(0.0);
  Var log_sigma(0.0);
  for (std::size_t i = 0; i < g.dim(); ++i) {
    const Var r = (lambda[i] - g.mean[i]) / g.stddev[i];
    quad += r * r;
    log_sigma += log(g.stddev[i]);
  }
  const double norm = static_cast<double>(g.dim()) * kHalfLog2Pi;
  return Var(-0.5) * quad - log_sigma - Var(norm);
}

Var ExtendedModel::log_joint(std::span<const Var> params,
                             std::span<const double> x, std::span<const Var> z,
                             std::span<const Var> lambda) const {
  return base_->log_joint(x, z) + log_aux(params, x, z, lambda);
}

ExtendedModel extend(std::shared_ptr<const GenerativeModel> base,
                     const Mlp& r_net, bool condition_on_x,
                     AuxDensityPath path) {
  return ExtendedModel(std::move(base), r_net, condition_on_x, path);
}

} // namespace auxvi
