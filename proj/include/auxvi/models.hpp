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

// Built-in generative models with evaluatable joints and evidence oracles,
// plus the extended model that adds a normalized factor over an auxiliary
// variable lambda.

#pragma once

#include "auxvi/distributions.hpp"
#include "auxvi/nets.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>

namespace auxvi {

class GenerativeModel {
public:
  virtual ~GenerativeModel() = default;

  virtual std::string name() const = 0;
  virtual std::size_t latent_dim() const = 0;
  virtual std::size_t data_dim() const = 0;

  /// log P(x, z), differentiable in z.
  virtual Var log_joint(std::span<const double> x,
                        std::span<const Var> z) const = 0;

  /// log P(x), closed form where available, quadrature otherwise.
  virtual double oracle_log_evidence(std::span<const double> x) const = 0;

  /// Exact posterior when it is Gaussian.
  virtual std::optional<DiagGaussian>
  oracle_posterior(std::span<const double> /*x*/) const {
    return std::nullopt;
  }

  double log_joint_value(std::span<const double> x,
                         std::span<const double> z) const;
};

/// z ~ N(0, prior_var), x | z ~ N(z, lik_var), all 1-D.
class ConjugateGaussianModel final : public GenerativeModel {
public:
  ConjugateGaussianModel(double prior_var, double lik_var);

  std::string name() const override { return "conjugate"; }
  std::size_t latent_dim() const override { return 1; }
  std::size_t data_dim() const override { return 1; }
  Var log_joint(std::span<const double> x,
                std::span<const Var> z) const override;
  double oracle_log_evidence(std::span<const double> x) const override;
  std::optional<DiagGaussian>
  oracle_posterior(std::span<const double> x) const override;

  double prior_var() const { return prior_var_; }
  double lik_var() const { return lik_var_; }

private:
  double prior_var_;
  double lik_var_;
};

/// z ~ N(0, 1), x | z ~ N(z^2, lik_std^2). For x near sep^2 the posterior
/// has modes near +-sep.
class BimodalModel final : public GenerativeModel {
public:
  BimodalModel(double sep, double lik_std);

  std::string name() const override { return "bimodal"; }
  std::size_t latent_dim() const override { return 1; }
  std::size_t data_dim() const override { return 1; }
  Var log_joint(std::span<const double> x,
                std::span<const Var> z) const override;
  double oracle_log_evidence(std::span<const double> x) const override;

  double sep() const { return sep_; }
  double lik_std() const { return lik_std_; }

  /// Points per axis of the evidence quadrature.
  std::size_t evidence_points = 4001;

private:
  double sep_;
  double lik_std_;
};

std::shared_ptr<const GenerativeModel>
conjugate_gaussian_model(double prior_var, double lik_var);
std::shared_ptr<const GenerativeModel> bimodal_model(double sep,
                                                     double lik_std);

/// Selects how the extended model evaluates its lambda factor. `shared` calls
/// the same density routine as the auxiliary posterior; `independent` uses a
/// separately written Gaussian log-density.
enum class AuxDensityPath { shared, independent };

/// Input to an auxiliary net: z, followed by x when conditioning on x.
std::vector<Var> aux_input(std::span<const Var> z, std::span<const double> x,
                           bool condition_on_x);

/// P(x, z, lambda | phi) = P(x, z) P(lambda | z [, x], phi).
class ExtendedModel {
public:
  ExtendedModel(std::shared_ptr<const GenerativeModel> base, Mlp aux_net,
                bool condition_on_x,
                AuxDensityPath path = AuxDensityPath::shared);

  const GenerativeModel& base() const { return *base_; }
  const Mlp& aux_net() const { return aux_net_; }
  bool condition_on_x() const { return condition_on_x_; }
  std::size_t aux_dim() const { return aux_net_.target_dim(); }
  AuxDensityPath path() const { return path_; }

  DiagGaussian aux_conditional(std::span<const Var> params,
                               std::span<const double> x,
                               std::span<const Var> z) const;

  Var log_aux(std::span<const Var> params, std::span<const double> x,
              std::span<const Var> z, std::span<const Var> lambda) const;

  Var log_joint(std::span<const Var> params, std::span<const double> x,
                std::span<const Var> z, std::span<const Var> lambda) const;

private:
  std::shared_ptr<const GenerativeModel> base_;
  Mlp aux_net_;
  bool condition_on_x_;
  AuxDensityPath path_;
};

ExtendedModel extend(std::shared_ptr<const GenerativeModel> base,
                     const Mlp& r_net, bool condition_on_x,
                     AuxDensityPath path = AuxDensityPath::shared);

} // namespace auxvi
