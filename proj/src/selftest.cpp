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

#include "auxvi/selftest.hpp"

#include "auxvi/diagnostics.hpp"
#include "auxvi/estimators.hpp"
#include "auxvi/oracle.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace auxvi {

namespace {

using oracle::Grid;

std::string show(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct HierCase {
  ad::ParamVector params;
  HierarchicalPosterior h;
  AuxPosterior r;
};

HierCase random_hier(std::uint64_t seed) {
  HierCase c;
  const std::size_t hidden[] = {8};
  c.h = make_hierarchical(c.params, 1, 1, hidden, mix_seed(seed, 11));
  c.r = make_aux(c.params, 1, 1, hidden, false, 1, mix_seed(seed, 12));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  for (std::size_t i = 0; i < c.params.size(); ++i) {
    c.params[i] += jitter(rng);
  }
  return c;
}

} // namespace

int run_selftest(const std::function<void(const CheckResult&)>& report) {
  int failures = 0;
  auto check = [&](const std::string& name, auto&& body) {
    CheckResult r{name, false, {}};
    try {
      r.passed = body(r.detail);
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    failures += r.passed ? 0 : 1;
    report(r);
  };
  const std::vector<double> x1{1.0};
  const Grid z_fine = Grid::uniform(1, 4001);
  const Grid z_grid = Grid::uniform(1, 1001);
  const Grid l_grid = Grid::uniform(1, 1001);

  check("autodiff: gradient of sum(v^2) is 2v", [](std::string& d) {
    const std::vector<double> at{1.0, 2.0, 3.0};
    const auto g = ad::gradient(
        [](ad::Tape&, std::span<const Var> v) {
          Var s(0.0);
          for (const auto& e : v) s += square(e);
          return s;
        },
        at);
    d = "(" + show(g[0]) + ", " + show(g[1]) + ", " + show(g[2]) + ")";
    return g[0] == 2.0 && g[1] == 4.0 && g[2] == 6.0;
  });

  check("autodiff: Gaussian log-pdf passes finite differences", [](std::string& d) {
    const std::vector<double> at{0.3, -0.2, 1.1};
    const double worst = ad::fd_check(
        [](ad::Tape&, std::span<const Var> p) {
          const DiagGaussian g({p[0]}, {exp(p[1])});
          return logpdf(g, p.subspan(2, 1));
        },
        at, 1e-5);
    d = "max rel discrepancy " + show(worst);
    return worst <= 1e-4;
  });

  check("distributions: KL closed form matches quadrature", [&](std::string& d) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> mu(-2.0, 2.0), sd(0.3, 3.0);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      const double ma = mu(rng), sa = sd(rng), mb = mu(rng), sb = sd(rng);
      const auto a = DiagGaussian::from_values(std::vector{ma}, std::vector{sa});
      const auto b = DiagGaussian::from_values(std::vector{mb}, std::vector{sb});
      const oracle::Axis ax{ma - 12 * sa, ma + 12 * sa, 4001};
      double quad = 0.0;
      for (std::size_t i = 0; i < ax.points; ++i) {
        const std::vector<double> z{ax.node(i)};
        const double la = logpdf(a, z);
        quad += ax.weight(i) * std::exp(la) * (la - logpdf(b, z));
      }
      worst = std::max(worst, std::abs(quad - kl_closed_form(a, b).value()));
    }
    d = "max |diff| " + show(worst);
    return worst <= 1e-6;
  });

  check("models: conjugate evidence quadrature matches closed form", [&](std::string& d) {
    const auto m = conjugate_gaussian_model(1.0, 1.0);
    const double diff =
        std::abs(oracle::quad_evidence(*m, x1, z_fine) - m->oracle_log_evidence(x1));
    d = "|diff| " + show(diff);
    return diff <= 1e-6;
  });

  check("models: bimodal evidence is stable under refinement", [&](std::string& d) {
    BimodalModel coarse(1.0, 0.3);
    BimodalModel fine(1.0, 0.3);
    coarse.evidence_points = 2001;
    const double diff =
        std::abs(coarse.oracle_log_evidence(x1) - fine.oracle_log_evidence(x1));
    d = "|2001 - 4001 points| " + show(diff);
    return diff < 1e-8;
  });

  check("models: extended evidence is independent of phi", [&](std::string& d) {
    const auto base = bimodal_model(1.0, 0.3);
    double worst = 0.0;
    for (std::uint64_t s : {1u, 2u}) {
      HierCase c = random_hier(s);
      const ExtendedModel ext = extend(base, c.r.r_net, false);
      const double ev =
          oracle::quad_evidence_extended(ext, c.params.values(), x1,
                                         Grid::uniform(1, 2001), l_grid);
      worst = std::max(worst, std::abs(ev - base->oracle_log_evidence(x1)));
    }
    d = "max |diff| " + show(worst);
    return worst <= 1e-6;
  });

  check("posteriors: affine marginal equals N(b, a^2 + s^2)", [&](std::string& d) {
    ad::ParamVector p;
    const HierarchicalPosterior h = make_hierarchical(p, 1, 1, {}, 0);
    set_affine_gaussian(h.cond_net, p, 1.0, 0.0, 1.0);
    const std::vector<double> z{0.7};
    const double got = marginal_q_oracle(h, p.values(), z, Grid::uniform(1, 4001));
    const double want = logpdf(
        DiagGaussian::from_values(std::vector{0.0}, std::vector{std::sqrt(2.0)}), z);
    d = "|diff| " + show(std::abs(got - want));
    return std::abs(got - want) <= 1e-6;
  });

  check("oracle: bound chain holds at random parameters", [&](std::string& d) {
    double worst = 1e300;
    for (auto model : {conjugate_gaussian_model(1.0, 1.0), bimodal_model(1.0, 0.3)}) {
      for (std::uint64_t s = 0; s < 3; ++s) {
        const HierCase c = random_hier(100 + s);
        const auto cert =
            oracle::certify(*model, c.h, c.r, c.params.values(), x1, z_grid, l_grid);
        worst = std::min({worst, cert.log_evidence - cert.elbo_marginal,
                          cert.elbo_marginal - cert.elbo_hier});
      }
    }
    d = "min slack " + show(worst);
    return worst >= -1e-6;
  });

  check("oracle: gap equals L(theta) - L(theta, phi)", [&](std::string& d) {
    const auto model = bimodal_model(1.0, 0.3);
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 3; ++s) {
      const HierCase c = random_hier(200 + s);
      const auto cert =
          oracle::certify(*model, c.h, c.r, c.params.values(), x1, z_grid, l_grid);
      worst = std::max(worst, std::abs(cert.elbo_marginal - cert.elbo_hier - cert.kl_gap));
    }
    d = "max |diff| " + show(worst);
    return worst <= 1e-5;
  });

  check("oracle: exact R closes the gap", [&](std::string& d) {
    const auto model = conjugate_gaussian_model(1.0, 1.0);
    ad::ParamVector p;
    const HierarchicalPosterior h = make_hierarchical(p, 1, 1, {}, 0);
    const AuxPosterior r = make_aux(p, 1, 1, {}, false, 1, 0);
    set_affine_gaussian(h.cond_net, p, 0.8, 0.3, 0.6);
    set_exact_aux(r, p, 0.8, 0.3, 0.6);
    const auto cert = oracle::certify(*model, h, r, p.values(), x1, z_grid, l_grid);
    const double gap = cert.elbo_marginal - cert.elbo_hier;
    d = "gap " + show(gap);
    return std::abs(gap) <= 1e-6;
  });

  check("estimators: HVM and ADGM terms agree", [&](std::string& d) {
    const auto model = bimodal_model(1.0, 0.3);
    double shared = 0.0;
    double independent = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s) {
      const HierCase c = random_hier(300 + s);
      shared = std::max(shared, check_equivalence(model, c.h, c.r, c.params.values(),
                                                  x1, 64, s, AuxDensityPath::shared));
      independent = std::max(
          independent, check_equivalence(model, c.h, c.r, c.params.values(), x1, 64,
                                         s, AuxDensityPath::independent));
    }
    d = "shared " + show(shared) + ", independent " + show(independent);
    return shared == 0.0 && independent <= 1e-12;
  });

  check("estimators: HVM estimate is unbiased", [&](std::string& d) {
    const auto model = conjugate_gaussian_model(1.0, 1.0);
    const HierCase c = random_hier(400);
    const auto p = ad::constants(c.params.values());
    const ElboEstimate est = elbo_hvm(*model, c.h, c.r, p, x1, 20000, 9);
    const double truth =
        oracle::quad_elbo_hier(*model, c.h, c.r, c.params.values(), x1, z_grid, l_grid);
    const double z = std::abs(est.value() - truth) / est.std_error;
    d = "|mc - quad| / se = " + show(z);
    return z <= 4.0;
  });

  check("estimators: HVM gradient passes finite differences", [&](std::string& d) {
    const auto model = bimodal_model(1.0, 0.3);
    const HierCase c = random_hier(500);
    const auto h = c.h;
    const auto r = c.r;
    const double worst = ad::fd_check(
        [&](ad::Tape&, std::span<const Var> p) {
          return elbo_hvm(*model, h, r, p, x1, 8, 3).mean;
        },
        c.params.values(), 1e-5);
    d = "max rel discrepancy " + show(worst);
    return worst <= 1e-4;
  });

  check("diagnostics: dip statistic matches reference values", [](std::string& d) {
    std::vector<double> a;
    for (int i = 0; i < 200; ++i) {
      a.push_back((i % 2 == 0 ? -2.0 : 2.0) + ((i * 37) % 101) / 101.0);
    }
    const double dip = diag::dip_statistic(a);
    const auto t = diag::dip_test(a);
    d = "dip " + show(dip) + ", p " + show(t.p_value);
    return std::abs(dip - 0.18811881188118812) <= 1e-12 && t.multimodal();
  });

  check("train: simple posterior reaches the conjugate evidence", [&](std::string& d) {
    const auto model = conjugate_gaussian_model(1.0, 1.0);
    ad::ParamVector p;
    const SimplePosterior q = add_simple_posterior(p, 1);
    TrainConfig cfg;
    const auto res = train(
        [&](std::span<const Var> v, std::size_t n, std::uint64_t s) {
          return elbo_standard(*model, q, v, x1, n, s);
        },
        p, cfg);
    const double l = oracle::quad_elbo_simple(*model, q, p.values(), x1, z_fine);
    d = "L(theta) " + show(l) + " vs log P(x) " + show(model->oracle_log_evidence(x1));
    return res.ok && std::abs(l - model->oracle_log_evidence(x1)) <= 0.01;
  });

  return failures;
}

} // namespace auxvi
