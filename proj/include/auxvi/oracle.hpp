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

// Brute-force quadrature for every quantity the variational methods treat as
// intractable: the evidence, the marginal Q(z | theta), the ELBO of the
// induced marginal L(theta), the modified bound L(theta, phi) and the
// expected KL gap between them.
//
// Hierarchical oracles integrate over the product of a z grid and a lambda
// grid; both factors count against the 1e7 point budget.

#pragma once

#include "auxvi/grid.hpp"
#include "auxvi/models.hpp"
#include "auxvi/posteriors.hpp"

#include <span>
#include <vector>

namespace auxvi::oracle {

double quad_evidence(const GenerativeModel& model, std::span<const double> x,
                     const Grid& z_grid);

/// Exact L(theta) for a diagonal Gaussian posterior.
double quad_elbo_simple(const GenerativeModel& model, const SimplePosterior& q,
                        std::span<const double> params,
                        std::span<const double> x, const Grid& z_grid);

/// log Q(z_i | theta) at every node of z_grid.
std::vector<double> marginal_log_density(const HierarchicalPosterior& h,
                                         std::span<const double> params,
                                         const Grid& z_grid,
                                         const Grid& lambda_grid);

/// Exact L(theta) of the marginal induced by a hierarchical posterior.
double quad_elbo_marginal(const GenerativeModel& model,
                          const HierarchicalPosterior& h,
                          std::span<const double> params,
                          std::span<const double> x, const Grid& z_grid,
                          const Grid& lambda_grid);

/// Exact L(theta, phi): integral of Q(z, lambda) log[P(x, z) R / Q(z, lambda)].
double quad_elbo_hier(const GenerativeModel& model,
                      const HierarchicalPosterior& h, const AuxPosterior& r,
                      std::span<const double> params, std::span<const double> x,
                      const Grid& z_grid, const Grid& lambda_grid);

/// E_{Q(z)} KL(Q(lambda | z) || R(lambda | z [, x])) with Q(lambda | z)
/// formed as the quotient Q(z, lambda) / Q(z).
double kl_gap(const HierarchicalPosterior& h, const AuxPosterior& r,
              std::span<const double> params, std::span<const double> x,
              const Grid& z_grid, const Grid& lambda_grid);

/// log of the double integral of P(x, z, lambda | phi) over (z, lambda).
double quad_evidence_extended(const ExtendedModel& ext,
                              std::span<const double> params,
                              std::span<const double> x, const Grid& z_grid,
                              const Grid& lambda_grid);

/// All hierarchical oracle values from one pass over the joint grid.
struct HierarchicalCertificate {
  double log_evidence = 0.0;
  double elbo_marginal = 0.0; ///< L(theta)
  double elbo_hier = 0.0;     ///< L(theta, phi)
  double kl_gap = 0.0;
};

HierarchicalCertificate certify(const GenerativeModel& model,
                                const HierarchicalPosterior& h,
                                const AuxPosterior& r,
                                std::span<const double> params,
                                std::span<const double> x, const Grid& z_grid,
                                const Grid& lambda_grid);

} // namespace auxvi::oracle
