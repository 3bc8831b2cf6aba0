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

// Monte Carlo ELBO estimators, the HVM/ADGM equivalence check and the
// gradient-ascent training loop.
//
// Sample k draws its noise from counter-based streams: lambda from counter
// 2k and z from counter 2k + 1 under the estimator seed. Two estimators given
// the same seed therefore see the same draws.

#pragma once

#include "auxvi/models.hpp"
#include "auxvi/posteriors.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace auxvi {

struct ElboEstimate {
  Var mean; ///< differentiable when params live on a tape
  std::vector<double> terms;
  double std_error = 0.0;
  std::size_t samples = 0;

  double value() const { return mean.value(); }
};

/// Mean (ordered sum / N) and standard error (sample std / sqrt N).
ElboEstimate summarize(std::span<const Var> terms);

/// log P(x, z_k) - log Q(z_k | theta), z_k reparametrized.
ElboEstimate elbo_standard(const GenerativeModel& model,
                           const SimplePosterior& q,
                           std::span<const Var> params,
                           std::span<const double> x, std::size_t samples,
                           std::uint64_t seed);

/// log P(x, z_k) + log R(lambda_k | z_k) - log Q(z_k, lambda_k | theta).
/// `r` must not condition on x; use elbo_hvm_x for that variant.
ElboEstimate elbo_hvm(const GenerativeModel& model,
                      const HierarchicalPosterior& h, const AuxPosterior& r,
                      std::span<const Var> params, std::span<const double> x,
                      std::size_t samples, std::uint64_t seed);

/// As elbo_hvm with R evaluated at (z_k, x).
ElboEstimate elbo_hvm_x(const GenerativeModel& model,
                        const HierarchicalPosterior& h, const AuxPosterior& r,
                        std::span<const Var> params, std::span<const double> x,
                        std::size_t samples, std::uint64_t seed);

/// log P(x, z_k, lambda_k | phi) - log Q(z_k, lambda_k | theta).
ElboEstimate elbo_adgm(const ExtendedModel& ext,
                       const HierarchicalPosterior& h,
                       std::span<const Var> params, std::span<const double> x,
                       std::size_t samples, std::uint64_t seed);

/// Max |hvm_term - adgm_term| over samples. The ADGM side is evaluated on
/// extend(model, r) with the given density path and its own seed.
double check_equivalence(std::shared_ptr<const GenerativeModel> model,
                         const HierarchicalPosterior& h, const AuxPosterior& r,
                         std::span<const double> params,
                         std::span<const double> x, std::size_t samples,
                         std::uint64_t hvm_seed, std::uint64_t adgm_seed,
                         AuxDensityPath path = AuxDensityPath::shared);

inline double check_equivalence(std::shared_ptr<const GenerativeModel> model,
                                const HierarchicalPosterior& h,
                                const AuxPosterior& r,
                                std::span<const double> params,
                                std::span<const double> x, std::size_t samples,
                                std::uint64_t seed,
                                AuxDensityPath path = AuxDensityPath::shared) {
  return check_equivalence(std::move(model), h, r, params, x, samples, seed,
                           seed, path);
}

enum class OptimizerKind { sgd, adam };

struct TrainConfig {
  std::size_t samples = 16;
  std::size_t steps = 2000;
  double learning_rate = 0.01;
  OptimizerKind optimizer = OptimizerKind::adam;
  std::uint64_t seed = 0;
  /// Update theta on even steps and phi on odd steps instead of jointly.
  bool alternate = false;

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  /// Throws std::invalid_argument on samples == 0 or learning_rate < 0.
  void validate() const;
};

struct TraceRow {
  std::size_t step = 0;
  double elbo = 0.0;
  double std_error = 0.0;
  double grad_norm = 0.0;
  double wall_ms = 0.0;
};

struct TrainResult {
  std::vector<TraceRow> trace;
  bool ok = true;
  std::size_t failed_step = 0;
  std::string error;
};

/// Builds the estimate for one step from tape-bound params.
using Objective = std::function<ElboEstimate(
    std::span<const Var> params, std::size_t samples, std::uint64_t seed)>;

/// Per-step estimator seed derived from the run seed.
std::uint64_t step_seed(std::uint64_t run_seed, std::size_t step);

/// Gradient ascent on the objective. `phi_mask[i]` marks parameters belonging
/// to the auxiliary net (only used when alternating). Each row is passed to
/// `on_row` as soon as it is computed. A non-finite estimate or gradient stops
/// training; the trace up to that step is returned with ok = false.
TrainResult train(const Objective& objective, ad::ParamVector& params,
                  const TrainConfig& cfg, const std::vector<bool>& phi_mask = {},
                  const std::function<void(const TraceRow&)>& on_row = {});

} // namespace auxvi
