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

#include "doctest.h"

#include "support.hpp"

#include <cmath>

using namespace auxvi;
using testing::kX1;

namespace {

SimplePosterior prior_like(ad::ParamVector& p) {
  const SimplePosterior q = add_simple_posterior(p, 1);
  p[q.offset + 1] = 0.0; // std 1
  return q;
}

const oracle::Grid& z_grid() {
  static const oracle::Grid g = oracle::Grid::uniform(1, 2001);
  return g;
}

const oracle::Grid& l_grid() {
  static const oracle::Grid g = oracle::Grid::uniform(1, 2001);
  return g;
}

} // namespace

TEST_CASE("summarize uses the N-1 sample standard deviation") {
  const std::vector<Var> terms{1.0, 2.0, 3.0, 6.0};
  const ElboEstimate e = summarize(terms);
  CHECK(e.value() == 3.0);
  CHECK(e.std_error == doctest::Approx(std::sqrt(14.0 / 3.0) / 2.0));
  CHECK(summarize(std::vector<Var>{4.0}).std_error == 0.0);
}

TEST_CASE("single-sample term of the standard estimator") {
  // q = prior N(0, 1) on the conjugate model: term = log N(1; z, 1).
  const auto m = conjugate_gaussian_model(1.0, 1.0);
  ad::ParamVector p;
  const SimplePosterior q = prior_like(p);
  const auto pv = ad::constants(p.values());
  const ElboEstimate e = elbo_standard(*m, q, pv, kX1, 1, 42);
  const double z = draw_noise(42, 1, 1).eps[0];
  CHECK(e.value() == doctest::Approx(-kHalfLog2Pi - 0.5 * (1 - z) * (1 - z)).epsilon(1e-14));
  // At z = 0 this is -1.4189385332.
  CHECK(-kHalfLog2Pi - 0.5 == doctest::Approx(-1.4189385332046727).epsilon(1e-14));
}

TEST_CASE("standard estimator at the prior") {
  const auto m = conjugate_gaussian_model(1.0, 1.0);
  ad::ParamVector p;
  const SimplePosterior q = prior_like(p);
  // tests/oracles/references.py: -1.9189385332046729.
  const double truth = oracle::quad_elbo_simple(*m, q, p.values(), kX1, z_grid());
  CHECK(truth == doctest::Approx(-1.9189385332046729).epsilon(1e-10));
  const auto pv = ad::constants(p.values());
  const ElboEstimate e = elbo_standard(*m, q, pv, kX1, 100000, 5);
  CHECK(std::abs(e.value() - truth) <= 3 * e.std_error);
}

TEST_CASE("zero samples is an error") {
  const auto m = conjugate_gaussian_model(1.0, 1.0);
  ad::ParamVector p;
  const SimplePosterior q = add_simple_posterior(p, 1);
  const auto pv = ad::constants(p.values());
  CHECK_THROWS_AS(elbo_standard(*m, q, pv, kX1, 0, 0), std::invalid_argument);
}

TEST_CASE("hierarchical estimators are unbiased") {
  const auto m = bimodal_model(1.0, 0.3);
  const auto c = testing::random_hier(31);
  const auto cx = testing::random_hier(31, true);
  const auto pv = ad::constants(c.params.values());
  const auto pxv = ad::constants(cx.params.values());
  const double truth =
      oracle::quad_elbo_hier(*m, c.h, c.r, c.params.values(), kX1, z_grid(), l_grid());
  const double truth_x =
      oracle::quad_elbo_hier(*m, cx.h, cx.r, cx.params.values(), kX1, z_grid(), l_grid());
  const ElboEstimate hvm = elbo_hvm(*m, c.h, c.r, pv, kX1, 40000, 1);
  const ElboEstimate adgm = elbo_adgm(extend(m, c.r.r_net, false), c.h, pv, kX1, 40000, 2);
  const ElboEstimate hvm_x = elbo_hvm_x(*m, cx.h, cx.r, pxv, kX1, 40000, 3);
  CHECK(std::abs(hvm.value() - truth) <= 4 * hvm.std_error);
  CHECK(std::abs(adgm.value() - truth) <= 4 * adgm.std_error);
  CHECK(std::abs(hvm_x.value() - truth_x) <= 4 * hvm_x.std_error);
}

TEST_CASE("HVM and ADGM terms coincide") {
  const auto m = bimodal_model(1.0, 0.3);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto c = testing::random_hier(40 + s);
    CHECK(check_equivalence(m, c.h, c.r, c.params.values(), kX1, 32, s,
                            AuxDensityPath::shared) == 0.0);
    CHECK(check_equivalence(m, c.h, c.r, c.params.values(), kX1, 32, s,
                            AuxDensityPath::independent) <= 1e-12);
  }
}

TEST_CASE("equivalence check detects different noise") {
  const auto m = bimodal_model(1.0, 0.3);
  const auto c = testing::random_hier(50);
  CHECK(check_equivalence(m, c.h, c.r, c.params.values(), kX1, 8, 1, 2) > 1e-3);
}

TEST_CASE("x-conditioned aux needs the matching estimator") {
  const auto m = bimodal_model(1.0, 0.3);
  const auto c = testing::random_hier(1);
  const auto cx = testing::random_hier(1, true);
  const auto pv = ad::constants(c.params.values());
  const auto pxv = ad::constants(cx.params.values());
  CHECK_THROWS(elbo_hvm(*m, cx.h, cx.r, pxv, kX1, 4, 0));
  CHECK_THROWS(elbo_hvm_x(*m, c.h, c.r, pv, kX1, 4, 0));
}

TEST_CASE("zero x-weights reproduce the plain estimator") {
  const auto m = bimodal_model(1.0, 0.3);
  ad::ParamVector plain;
  ad::ParamVector with_x;
  const std::vector<std::size_t> hidden{8};
  const auto h = make_hierarchical(plain, 1, 1, hidden, 3);
  make_hierarchical(with_x, 1, 1, hidden, 3);
  const AuxPosterior r = make_aux(plain, 1, 1, hidden, false, 1, 4);
  const AuxPosterior rx = make_aux(with_x, 1, 1, hidden, true, 1, 4);
  // Copy every weight; the x column of the first layer is zero.
  for (std::size_t l = 0; l < r.r_net.layer_count(); ++l) {
    for (std::size_t o = 0; o < r.r_net.widths[l + 1]; ++o) {
      for (std::size_t in = 0; in < r.r_net.widths[l]; ++in) {
        with_x[rx.r_net.weight_index(l, o, in)] = plain[r.r_net.weight_index(l, o, in)];
      }
      if (l == 0) {
        with_x[rx.r_net.weight_index(0, o, 1)] = 0.0;
      }
      with_x[rx.r_net.bias_index(l, o)] = plain[r.r_net.bias_index(l, o)];
    }
  }
  const auto a = elbo_hvm(*m, h, r, ad::constants(plain.values()), kX1, 64, 9);
  const auto b = elbo_hvm_x(*m, h, rx, ad::constants(with_x.values()), kX1, 64, 9);
  CHECK(a.terms == b.terms);
}

TEST_CASE("estimator gradients pass finite differences") {
  const auto m = bimodal_model(1.0, 0.3);
  const auto c = testing::random_hier(60);
  const auto cx = testing::random_hier(61, true);
  const ExtendedModel ext = extend(m, c.r.r_net, false);
  ad::ParamVector sp;
  const SimplePosterior q = add_simple_posterior(sp, 1);
  sp[0] = 0.4;
  CHECK(ad::fd_check([&](ad::Tape&, std::span<const Var> p) {
          return elbo_standard(*m, q, p, kX1, 8, 1).mean;
        }, sp.values(), 1e-5) <= 1e-4);
  CHECK(ad::fd_check([&](ad::Tape&, std::span<const Var> p) {
          return elbo_hvm(*m, c.h, c.r, p, kX1, 8, 2).mean;
        }, c.params.values(), 1e-5) <= 1e-4);
  CHECK(ad::fd_check([&](ad::Tape&, std::span<const Var> p) {
          return elbo_adgm(ext, c.h, p, kX1, 8, 3).mean;
        }, c.params.values(), 1e-5) <= 1e-4);
  CHECK(ad::fd_check([&](ad::Tape&, std::span<const Var> p) {
          return elbo_hvm_x(*m, cx.h, cx.r, p, kX1, 8, 4).mean;
        }, cx.params.values(), 1e-5) <= 1e-4);
}

namespace {

struct SimpleRun {
  ad::ParamVector params;
  SimplePosterior q;
  TrainResult result;
};

SimpleRun train_conjugate(const TrainConfig& cfg) {
  static const auto m = conjugate_gaussian_model(1.0, 1.0);
  SimpleRun run;
  run.q = add_simple_posterior(run.params, 1);
  const SimplePosterior q = run.q;
  run.result = train(
      [q](std::span<const Var> p, std::size_t n, std::uint64_t s) {
        return elbo_standard(*m, q, p, kX1, n, s);
      },
      run.params, cfg);
  return run;
}

} // namespace

TEST_CASE("training reaches the conjugate evidence") {
  const auto m = conjugate_gaussian_model(1.0, 1.0);
  TrainConfig cfg;
  const SimpleRun run = train_conjugate(cfg);
  REQUIRE(run.result.ok);
  CHECK(run.result.trace.size() == 2000);
  const double l = oracle::quad_elbo_simple(*m, run.q, run.params.values(), kX1, z_grid());
  CHECK(std::abs(l - (-1.5155121234846454)) <= 0.01);
}

TEST_CASE("training is deterministic given the seed") {
  TrainConfig cfg;
  cfg.steps = 200;
  cfg.seed = 17;
  const SimpleRun a = train_conjugate(cfg);
  const SimpleRun b = train_conjugate(cfg);
  REQUIRE(a.result.trace.size() == b.result.trace.size());
  for (std::size_t i = 0; i < a.result.trace.size(); ++i) {
    CHECK(a.result.trace[i].elbo == b.result.trace[i].elbo);
    CHECK(a.result.trace[i].grad_norm == b.result.trace[i].grad_norm);
  }
  CHECK(std::equal(a.params.values().begin(), a.params.values().end(),
                   b.params.values().begin()));
  cfg.seed = 18;
  const SimpleRun c = train_conjugate(cfg);
  CHECK(c.result.trace[0].elbo != a.result.trace[0].elbo);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  for (auto opt : {OptimizerKind::sgd, OptimizerKind::adam}) {
    TrainConfig cfg;
    cfg.steps = 20;
    cfg.learning_rate = 0.0;
    cfg.optimizer = opt;
    const SimpleRun run = train_conjugate(cfg);
    CHECK(run.params[0] == 0.0);
    CHECK(run.params[1] == -1.0);
  }
}

TEST_CASE("alternating updates touch theta and phi on separate steps") {
  const auto m = bimodal_model(1.0, 0.3);
  auto c = testing::random_hier(70);
  std::vector<bool> phi(c.params.size(), false);
  for (std::size_t i = c.r.r_net.offset; i < c.r.r_net.offset + c.r.r_net.param_count(); ++i) {
    phi[i] = true;
  }
  const auto h = c.h;
  const auto r = c.r;
  Objective obj = [&](std::span<const Var> p, std::size_t n, std::uint64_t s) {
    return elbo_hvm(*m, h, r, p, kX1, n, s);
  };
  TrainConfig cfg;
  cfg.alternate = true;
  cfg.steps = 1;
  const std::vector<double> before(c.params.values().begin(), c.params.values().end());
  train(obj, c.params, cfg, phi);
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (phi[i]) {
      CHECK(c.params[i] == before[i]);
    }
  }
  CHECK(c.params[0] != before[0]);
  cfg.steps = 2;
  ad::ParamVector fresh = testing::random_hier(70).params;
  train(obj, fresh, cfg, phi);
  bool phi_moved = false;
  for (std::size_t i = 0; i < before.size(); ++i) {
    phi_moved = phi_moved || (phi[i] && fresh[i] != before[i]);
  }
  CHECK(phi_moved);
}

TEST_CASE("divergent training stops with a partial trace") {
  TrainConfig cfg;
  cfg.optimizer = OptimizerKind::sgd;
  cfg.learning_rate = 1e6;
  cfg.steps = 50;
  std::size_t rows = 0;
  const auto m = conjugate_gaussian_model(1.0, 1.0);
  ad::ParamVector p;
  const SimplePosterior q = add_simple_posterior(p, 1);
  const TrainResult res = train(
      [&](std::span<const Var> v, std::size_t n, std::uint64_t s) {
        return elbo_standard(*m, q, v, kX1, n, s);
      },
      p, cfg, {}, [&](const TraceRow&) { ++rows; });
  CHECK_FALSE(res.ok);
  CHECK(res.failed_step == res.trace.size());
  CHECK(rows == res.trace.size());
  CHECK(res.error.find("non-finite") != std::string::npos);
}

TEST_CASE("invalid training configs are rejected") {
  TrainConfig cfg;
  cfg.samples = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.samples = 1;
  cfg.learning_rate = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("exact R turns HVM terms into marginal terms") {
  // With R = Q(lambda | z) each term is log P(x, z) - log Q(z).
  const auto m = bimodal_model(1.0, 0.3);
  const double a = 0.9, b = -0.2, s = 0.7;
  auto k = testing::affine_case(a, b, s, 0.0, 0.0, 1.0);
  set_exact_aux(k.r, k.params, a, b, s);
  const auto pv = ad::constants(k.params.values());
  const ElboEstimate e = elbo_hvm(*m, k.h, k.r, pv, kX1, 64, 12);
  const auto qz = DiagGaussian::from_values(std::vector{b}, std::vector{std::sqrt(a * a + s * s)});
  for (std::size_t i = 0; i < 64; ++i) {
    const auto js = k.h.sample_joint(pv, draw_noise(12, 2 * i, 1), draw_noise(12, 2 * i + 1, 1));
    const auto z = ad::values_of(js.z);
    const double want = m->log_joint_value(kX1, z) - logpdf(qz, z);
    CHECK(std::abs(e.terms[i] - want) <= 1e-12);
  }
}

TEST_CASE("a badly mismatched R costs exactly its expected KL") {
  const auto m = conjugate_gaussian_model(1.0, 1.0);
  const double a = 0.8, b = 0.3, s = 0.6;
  auto k = testing::affine_case(a, b, s, 0.0, 0.0, 1.0);
  set_exact_aux(k.r, k.params, a, b, s);
  k.params[k.r.r_net.bias_index(0, 0)] += 5.0;
  const auto cert = oracle::certify(*m, k.h, k.r, k.params.values(), kX1, z_grid(), l_grid());
  CHECK(cert.elbo_hier < cert.elbo_marginal);
  // The shifted R has the exact variance, so the gap is 5^2 / (2 var).
  const double var = s * s / (a * a + s * s);
  CHECK(cert.kl_gap == doctest::Approx(25.0 / (2.0 * var)).epsilon(1e-8));
  CHECK(std::abs(cert.elbo_marginal - cert.elbo_hier - cert.kl_gap) <= 1e-5);
}

TEST_CASE("x-conditioned bound stays below L(theta)") {
  const auto m = bimodal_model(1.0, 0.3);
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto c = testing::random_hier(110 + s, true);
    const auto cert = oracle::certify(*m, c.h, c.r, c.params.values(), kX1, z_grid(), l_grid());
    CHECK(cert.elbo_hier <= cert.elbo_marginal + 1e-6);
  }
}

TEST_CASE("ADGM and HVM gradients are identical") {
  const auto m = bimodal_model(1.0, 0.3);
  const auto c = testing::random_hier(120);
  const ExtendedModel ext = extend(m, c.r.r_net, false);
  const auto g_hvm = ad::gradient(
      [&](ad::Tape&, std::span<const Var> p) { return elbo_hvm(*m, c.h, c.r, p, kX1, 16, 4).mean; },
      c.params.values());
  const auto g_adgm = ad::gradient(
      [&](ad::Tape&, std::span<const Var> p) { return elbo_adgm(ext, c.h, p, kX1, 16, 4).mean; },
      c.params.values());
  CHECK(g_hvm == g_adgm);
}

TEST_CASE("grand mean of small-sample estimates is unbiased") {
  // 200 independent N = 64 estimates; grand mean within 4 standard errors.
  const auto m = bimodal_model(1.0, 0.3);
  const auto c = testing::random_hier(130);
  const auto pv = ad::constants(c.params.values());
  const double truth =
      oracle::quad_elbo_hier(*m, c.h, c.r, c.params.values(), kX1, z_grid(), l_grid());
  ad::ParamVector sp;
  const SimplePosterior q = add_simple_posterior(sp, 1);
  sp[0] = 0.6;
  const auto sv = ad::constants(sp.values());
  const double truth_simple = oracle::quad_elbo_simple(*m, q, sp.values(), kX1, z_grid());
  std::vector<Var> hvm_means;
  std::vector<Var> simple_means;
  for (std::uint64_t r = 0; r < 200; ++r) {
    hvm_means.push_back(elbo_hvm(*m, c.h, c.r, pv, kX1, 64, 1000 + r).mean);
    simple_means.push_back(elbo_standard(*m, q, sv, kX1, 64, 2000 + r).mean);
  }
  const ElboEstimate gh = summarize(hvm_means);
  const ElboEstimate gs = summarize(simple_means);
  CHECK(std::abs(gh.value() - truth) <= 4 * gh.std_error);
  CHECK(std::abs(gs.value() - truth_simple) <= 4 * gs.std_error);
}
