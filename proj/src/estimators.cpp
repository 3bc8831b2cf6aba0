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

#include "auxvi/estimators.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace auxvi {

namespace {

void require_samples(std::size_t samples) {
  if (samples == 0) {
    throw std::invalid_argument("estimator: sample count must be at least 1");
  }
}

template <class Term>
ElboEstimate collect(std::size_t samples, Term&& term) {
  require_samples(samples);
  std::vector<Var> terms;
  terms.reserve(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    try {
      terms.push_back(term(k));
    } catch (const ad::NumericalError& e) {
      throw ad::NumericalError("sample " + std::to_string(k) + ": " +
                               e.what());
    }
  }
  return summarize(terms);
}

ElboEstimate hvm_impl(const GenerativeModel& model,
                      const HierarchicalPosterior& h, const AuxPosterior& r,
                      std::span<const Var> params, std::span<const double> x,
                      std::size_t samples, std::uint64_t seed) {
  if (h.latent_dim != model.latent_dim() || r.latent_dim != h.latent_dim ||
      r.aux_dim() != h.aux_dim) {
    throw std::invalid_argument("elbo_hvm: inconsistent dimensions");
  }
  return collect(samples, [&](std::size_t k) {
    const JointSample s =
        h.sample_joint(params, draw_noise(seed, 2 * k, h.aux_dim),
                       draw_noise(seed, 2 * k + 1, h.latent_dim));
    return model.log_joint(x, s.z) + r.log_density(params, s.lambda, s.z, x) -
           s.log_q;
  });
}

} // namespace

ElboEstimate summarize(std::span<const Var> terms) {
  require_samples(terms.size());
  const double n = static_cast<double>(terms.size());
  ElboEstimate est;
  est.samples = terms.size();
  est.mean = ad::sum(terms) / Var(n);
  est.terms = ad::values_of(terms);
  double ss = 0.0;
  for (double t : est.terms) {
    const double d = t - est.mean.value();
    ss += d * d;
  }
  const double var = terms.size() > 1 ? ss / (n - 1.0) : 0.0;
  est.std_error = std::sqrt(var / n);
  return est;
}

ElboEstimate elbo_standard(const GenerativeModel& model,
                           const SimplePosterior& q,
                           std::span<const Var> params,
                           std::span<const double> x, std::size_t samples,
                           std::uint64_t seed) {
  if (q.dim != model.latent_dim()) {
    throw std::invalid_argument("elbo_standard: posterior dimension mismatch");
  }
  return collect(samples, [&](std::size_t k) {
    const DiagGaussian g = q.distribution(params);
    const auto z = reparam_sample(g, draw_noise(seed, 2 * k + 1, q.dim));
    return model.log_joint(x, z) - logpdf(g, z);
  });
}

ElboEstimate elbo_hvm(const GenerativeModel& model,
                      const HierarchicalPosterior& h, const AuxPosterior& r,
                      std::span<const Var> params, std::span<const double> x,
                      std::size_t samples, std::uint64_t seed) {
  if (r.conditions_on_x) {
    throw std::invalid_argument(
        "elbo_hvm: r conditions on x; use elbo_hvm_x");
  }
  return hvm_impl(model, h, r, params, x, samples, seed);
}

ElboEstimate elbo_hvm_x(const GenerativeModel& model,
                        const HierarchicalPosterior& h, const AuxPosterior& r,
                        std::span<const Var> params, std::span<const double> x,
                        std::size_t samples, std::uint64_t seed) {
  if (!r.conditions_on_x) {
    throw std::invalid_argument("elbo_hvm_x: r must condition on x");
  }
  return hvm_impl(model, h, r, params, x, samples, seed);
}

ElboEstimate elbo_adgm(const ExtendedModel& ext,
                       const HierarchicalPosterior& h,
                       std::span<const Var> params, std::span<const double> x,
                       std::size_t samples, std::uint64_t seed) {
  if (h.latent_dim != ext.base().latent_dim() || ext.aux_dim() != h.aux_dim) {
    throw std::invalid_argument("elbo_adgm: inconsistent dimensions");
  }
  return collect(samples, [&](std::size_t k) {
    const NoiseDraw eps_lambda = draw_noise(seed, 2 * k, h.aux_dim);
    const NoiseDraw eps_z = draw_noise(seed, 2 * k + 1, h.latent_dim);
    const JointSample s = h.sample_joint(params, eps_lambda, eps_z);
    const Var log_p = ext.log_joint(params, x, s.z, s.lambda);
    return log_p - s.log_q;
  });
}

double check_equivalence(std::shared_ptr<const GenerativeModel> model,
                         const HierarchicalPosterior& h, const AuxPosterior& r,
                         std::span<const double> params,
                         std::span<const double> x, std::size_t samples,
                         std::uint64_t hvm_seed, std::uint64_t adgm_seed,
                         AuxDensityPath path) {
  const auto p = ad::constants(params);
  const ExtendedModel ext = extend(model, r.r_net, r.conditions_on_x, path);
  const ElboEstimate hvm = hvm_impl(*model, h, r, p, x, samples, hvm_seed);
  const ElboEstimate adgm = elbo_adgm(ext, h, p, x, samples, adgm_seed);
  double worst = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    worst = std::max(worst, std::abs(hvm.terms[k] - adgm.terms[k]));
  }
  return worst;
}

void TrainConfig::validate() const {
  if (samples < 1) {
    throw std::invalid_argument("train: samples must be at least 1");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("train: learning rate must be non-negative");
  }
}

std::uint64_t step_seed(std::uint64_t run_seed, std::size_t step) {
  return mix_seed(run_seed, 0x7374657000000000ULL + step);
}

TrainResult train(const Objective& objective, ad::ParamVector& params,
                  const TrainConfig& cfg, const std::vector<bool>& phi_mask,
                  const std::function<void(const TraceRow&)>& on_row) {
  cfg.validate();
  if (cfg.alternate && phi_mask.size() != params.size()) {
    throw std::invalid_argument("train: alternation needs a full phi mask");
  }
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> m1(params.size(), 0.0);
  std::vector<double> m2(params.size(), 0.0);
  TrainResult result;
  ad::Tape tape;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    tape.clear();
    std::vector<double> grad;
    ElboEstimate est;
    try {
      const auto leaves = tape.bind(params);
      est = objective(leaves, cfg.samples, step_seed(cfg.seed, step));
      tape.backward(est.mean);
      grad = tape.gradient(leaves);
    } catch (const ad::NumericalError& e) {
      result.ok = false;
      result.failed_step = step;
      result.error = "step " + std::to_string(step) + ": " + e.what();
      return result;
    }
    double norm2 = 0.0;
    for (double g : grad) {
      norm2 += g * g;
    }
    TraceRow row;
    row.step = step;
    row.elbo = est.value();
    row.std_error = est.std_error;
    row.grad_norm = std::sqrt(norm2);
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    if (!std::isfinite(row.grad_norm)) {
      result.ok = false;
      result.failed_step = step;
      result.error =
          "step " + std::to_string(step) + ": non-finite gradient norm";
      return result;
    }
    result.trace.push_back(row);
    if (on_row) {
      on_row(row);
    }

    const double t = static_cast<double>(step + 1);
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (cfg.alternate && phi_mask[i] != (step % 2 == 1)) {
        continue;
      }
      if (cfg.optimizer == OptimizerKind::sgd) {
        params[i] += cfg.learning_rate * grad[i];
        continue;
      }
      m1[i] = TrainConfig::kBeta1 * m1[i] + (1.0 - TrainConfig::kBeta1) * grad[i];
      m2[i] = TrainConfig::kBeta2 * m2[i] +
              (1.0 - TrainConfig::kBeta2) * grad[i] * grad[i];
      const double mhat = m1[i] / (1.0 - std::pow(TrainConfig::kBeta1, t));
      const double vhat = m2[i] / (1.0 - std::pow(TrainConfig::kBeta2, t));
      params[i] += cfg.learning_rate * mhat /
                   (std::sqrt(vhat) + TrainConfig::kEpsilon);
    }
  }
  return result;
}

} // namespace auxvi
