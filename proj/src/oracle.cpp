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

#include "auxvi/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace auxvi::oracle {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct GaussianParams {
  std::vector<double> mean;
  std::vector<double> stddev;
};

GaussianParams values_of(const DiagGaussian& g) {
  return {g.mean_values(), g.std_values()};
}

double log_normal(std::span<const double> point, const GaussianParams& g) {
  double total = 0.0;
  for (std::size_t d = 0; d < point.size(); ++d) {
    const double u = (point[d] - g.mean[d]) / g.stddev[d];
    total += -kHalfLog2Pi - std::log(g.stddev[d]) - 0.5 * u * u;
  }
  return total;
}

void require_feasible(std::size_t dim, const Grid& grid, const char* what) {
  if (dim > 2) {
    throw OracleInfeasible(std::string(what) + ": dimension above 2");
  }
  if (grid.dim() != dim) {
    throw std::invalid_argument(std::string(what) + ": grid dimension " +
                                std::to_string(grid.dim()) + " != " +
                                std::to_string(dim));
  }
}

void require_joint_budget(const Grid& z_grid, const Grid& lambda_grid) {
  if (z_grid.size() > Grid::kMaxPoints / lambda_grid.size()) {
    throw OracleInfeasible("joint (z, lambda) grid exceeds the 1e7 budget");
  }
}

std::vector<double> log_joint_on(const GenerativeModel& model,
                                 std::span<const double> x,
                                 const Grid& z_grid) {
  const std::size_t n = z_grid.dim();
  const auto coords = z_grid.coordinates();
  std::vector<double> out(z_grid.size());
  for (std::size_t i = 0; i < z_grid.size(); ++i) {
    out[i] = model.log_joint_value(
        x, std::span<const double>(coords).subspan(i * n, n));
  }
  return out;
}

/// log Q(z_i, lambda_j) stored row-major by z.
struct JointTable {
  std::size_t nz = 0;
  std::size_t nl = 0;
  std::vector<double> log_q;
  std::vector<double> wz;
  std::vector<double> wl;
  std::vector<double> z_coords;
  std::vector<double> lambda_coords;

  double at(std::size_t i, std::size_t j) const { return log_q[i * nl + j]; }
};

JointTable joint_table(const HierarchicalPosterior& h,
                       std::span<const double> params, const Grid& z_grid,
                       const Grid& lambda_grid) {
  require_feasible(h.latent_dim, z_grid, "hierarchical oracle (z)");
  require_feasible(h.aux_dim, lambda_grid, "hierarchical oracle (lambda)");
  require_joint_budget(z_grid, lambda_grid);
  JointTable t;
  t.nz = z_grid.size();
  t.nl = lambda_grid.size();
  t.wz = z_grid.weights();
  t.wl = lambda_grid.weights();
  t.z_coords = z_grid.coordinates();
  t.lambda_coords = lambda_grid.coordinates();
  const std::size_t n = h.latent_dim;
  const std::size_t m = h.aux_dim;
  const auto p = ad::constants(params);
  const GaussianParams prior{std::vector<double>(m, 0.0),
                             std::vector<double>(m, 1.0)};
  t.log_q.resize(t.nz * t.nl);
  for (std::size_t j = 0; j < t.nl; ++j) {
    const auto lambda = std::span<const double>(t.lambda_coords).subspan(j * m, m);
    const auto lv = ad::constants(lambda);
    const GaussianParams cond = values_of(h.conditional(p, lv));
    const double log_prior = log_normal(lambda, prior);
    for (std::size_t i = 0; i < t.nz; ++i) {
      const auto z = std::span<const double>(t.z_coords).subspan(i * n, n);
      t.log_q[i * t.nl + j] = log_prior + log_normal(z, cond);
    }
  }
  return t;
}

std::vector<double> marginal_from(const JointTable& t) {
  std::vector<double> out(t.nz);
  for (std::size_t i = 0; i < t.nz; ++i) {
    out[i] = log_trapezoid(
        t.wl, std::span<const double>(t.log_q).subspan(i * t.nl, t.nl));
  }
  return out;
}

/// log R(lambda_j | z_i [, x]) for every grid pair.
std::vector<double> aux_table(const AuxPosterior& r,
                              std::span<const double> params,
                              std::span<const double> x, const JointTable& t,
                              std::size_t n, std::size_t m) {
  const auto p = ad::constants(params);
  std::vector<double> out(t.nz * t.nl);
  for (std::size_t i = 0; i < t.nz; ++i) {
    const auto zv = ad::constants(
        std::span<const double>(t.z_coords).subspan(i * n, n));
    const GaussianParams g = values_of(r.conditional(p, zv, x));
    for (std::size_t j = 0; j < t.nl; ++j) {
      out[i * t.nl + j] = log_normal(
          std::span<const double>(t.lambda_coords).subspan(j * m, m), g);
    }
  }
  return out;
}

double elbo_marginal_from(const JointTable& t, std::span<const double> log_qz,
                          std::span<const double> log_joint) {
  double acc = 0.0;
  for (std::size_t i = 0; i < t.nz; ++i) {
    const double q = std::exp(log_qz[i]);
    if (q > 0.0) {
      acc += t.wz[i] * q * (log_joint[i] - log_qz[i]);
    }
  }
  return acc;
}

double elbo_hier_from(const JointTable& t, std::span<const double> log_r,
                      std::span<const double> log_joint) {
  double acc = 0.0;
  for (std::size_t i = 0; i < t.nz; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < t.nl; ++j) {
      const double lq = t.at(i, j);
      const double q = std::exp(lq);
      if (q > 0.0) {
        row += t.wl[j] * q * (log_joint[i] + log_r[i * t.nl + j] - lq);
      }
    }
    acc += t.wz[i] * row;
  }
  return acc;
}

double kl_gap_from(const JointTable& t, std::span<const double> log_qz,
                   std::span<const double> log_r) {
  double acc = 0.0;
  for (std::size_t i = 0; i < t.nz; ++i) {
    if (log_qz[i] == kNegInf) {
      continue;
    }
    const double qz = std::exp(log_qz[i]);
    if (qz == 0.0) {
      continue;
    }
    double kl = 0.0;
    for (std::size_t j = 0; j < t.nl; ++j) {
      const double log_cond = t.at(i, j) - log_qz[i];
      const double cond = std::exp(log_cond);
      if (cond > 0.0) {
        kl += t.wl[j] * cond * (log_cond - log_r[i * t.nl + j]);
      }
    }
    acc += t.wz[i] * qz * kl;
  }
  return acc;
}

void check_aux(const HierarchicalPosterior& h, const AuxPosterior& r) {
  if (r.latent_dim != h.latent_dim || r.aux_dim() != h.aux_dim) {
    throw std::invalid_argument("oracle: posterior and aux dims disagree");
  }
}

} // namespace

double quad_evidence(const GenerativeModel& model, std::span<const double> x,
                     const Grid& z_grid) {
  require_feasible(model.latent_dim(), z_grid, "quad_evidence");
  return log_trapezoid(z_grid.weights(), log_joint_on(model, x, z_grid));
}

double quad_elbo_simple(const GenerativeModel& model, const SimplePosterior& q,
                        std::span<const double> params,
                        std::span<const double> x, const Grid& z_grid) {
  require_feasible(model.latent_dim(), z_grid, "quad_elbo_simple");
  const GaussianParams g = values_of(q.distribution(params));
  const auto lj = log_joint_on(model, x, z_grid);
  const auto coords = z_grid.coordinates();
  const std::size_t n = z_grid.dim();
  double acc = 0.0;
  for (std::size_t i = 0; i < z_grid.size(); ++i) {
    const double lq =
        log_normal(std::span<const double>(coords).subspan(i * n, n), g);
    const double dens = std::exp(lq);
    if (dens > 0.0) {
      acc += z_grid.weight(i) * dens * (lj[i] - lq);
    }
  }
  return acc;
}

std::vector<double> marginal_log_density(const HierarchicalPosterior& h,
                                         std::span<const double> params,
                                         const Grid& z_grid,
                                         const Grid& lambda_grid) {
  return marginal_from(joint_table(h, params, z_grid, lambda_grid));
}

double quad_elbo_marginal(const GenerativeModel& model,
                          const HierarchicalPosterior& h,
                          std::span<const double> params,
                          std::span<const double> x, const Grid& z_grid,
                          const Grid& lambda_grid) {
  const JointTable t = joint_table(h, params, z_grid, lambda_grid);
  const auto log_qz = marginal_from(t);
  return elbo_marginal_from(t, log_qz, log_joint_on(model, x, z_grid));
}

double quad_elbo_hier(const GenerativeModel& model,
                      const HierarchicalPosterior& h, const AuxPosterior& r,
                      std::span<const double> params, std::span<const double> x,
                      const Grid& z_grid, const Grid& lambda_grid) {
  check_aux(h, r);
  const JointTable t = joint_table(h, params, z_grid, lambda_grid);
  const auto log_r = aux_table(r, params, x, t, h.latent_dim, h.aux_dim);
  return elbo_hier_from(t, log_r, log_joint_on(model, x, z_grid));
}

double kl_gap(const HierarchicalPosterior& h, const AuxPosterior& r,
              std::span<const double> params, std::span<const double> x,
              const Grid& z_grid, const Grid& lambda_grid) {
  check_aux(h, r);
  const JointTable t = joint_table(h, params, z_grid, lambda_grid);
  const auto log_r = aux_table(r, params, x, t, h.latent_dim, h.aux_dim);
  return kl_gap_from(t, marginal_from(t), log_r);
}

double quad_evidence_extended(const ExtendedModel& ext,
                              std::span<const double> params,
                              std::span<const double> x, const Grid& z_grid,
                              const Grid& lambda_grid) {
  const std::size_t n = ext.base().latent_dim();
  const std::size_t m = ext.aux_dim();
  require_feasible(n, z_grid, "quad_evidence_extended (z)");
  require_feasible(m, lambda_grid, "quad_evidence_extended (lambda)");
  require_joint_budget(z_grid, lambda_grid);
  const auto p = ad::constants(params);
  const auto z_coords = z_grid.coordinates();
  const auto l_coords = lambda_grid.coordinates();
  const auto wl = lambda_grid.weights();
  std::vector<double> per_z(z_grid.size());
  std::vector<double> inner(lambda_grid.size());
  for (std::size_t i = 0; i < z_grid.size(); ++i) {
    const auto zv =
        ad::constants(std::span<const double>(z_coords).subspan(i * n, n));
    const double lj = ext.base().log_joint(x, zv).value();
    const GaussianParams g = values_of(ext.aux_conditional(p, x, zv));
    for (std::size_t j = 0; j < lambda_grid.size(); ++j) {
      inner[j] =
          lj + log_normal(std::span<const double>(l_coords).subspan(j * m, m), g);
    }
    per_z[i] = log_trapezoid(wl, inner);
  }
  return log_trapezoid(z_grid.weights(), per_z);
}

HierarchicalCertificate certify(const GenerativeModel& model,
                                const HierarchicalPosterior& h,
                                const AuxPosterior& r,
                                std::span<const double> params,
                                std::span<const double> x, const Grid& z_grid,
                                const Grid& lambda_grid) {
  check_aux(h, r);
  const JointTable t = joint_table(h, params, z_grid, lambda_grid);
  const auto log_qz = marginal_from(t);
  const auto log_r = aux_table(r, params, x, t, h.latent_dim, h.aux_dim);
  const auto lj = log_joint_on(model, x, z_grid);
  HierarchicalCertificate c;
  c.log_evidence = log_trapezoid(t.wz, lj);
  c.elbo_marginal = elbo_marginal_from(t, log_qz, lj);
  c.elbo_hier = elbo_hier_from(t, log_r, lj);
  c.kl_gap = kl_gap_from(t, log_qz, log_r);
  return c;
}

} // namespace auxvi::oracle
