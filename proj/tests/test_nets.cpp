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

#include "auxvi/nets.hpp"

#include <cmath>
#include <random>

using namespace auxvi;

TEST_CASE("layout and parameter count") {
  ad::ParamVector p;
  const Mlp net = add_mlp(p, "q", {1, 4, 2});
  CHECK(net.param_count() == 4 + 4 + 8 + 2);
  CHECK(p.size() == net.param_count());
  CHECK(net.input_dim() == 1);
  CHECK(net.target_dim() == 1);
  CHECK(net.layer_count() == 2);
  CHECK_FALSE(net.is_affine());
  CHECK(p.names()[net.weight_index(1, 1, 3)] == "q.l1.w[1,3]");
  CHECK(p.names()[net.bias_index(0, 2)] == "q.l0.b[2]");
}

TEST_CASE("odd output width is rejected") {
  ad::ParamVector p;
  CHECK_THROWS(add_mlp(p, "q", {2, 3}));
  CHECK_THROWS(add_mlp(p, "q", {2}));
}

TEST_CASE("affine net computes mean and exp log-std") {
  ad::ParamVector p;
  const Mlp net = add_mlp(p, "a", {1, 2});
  p[net.weight_index(0, 0, 0)] = 2.0;
  p[net.bias_index(0, 0)] = 0.5;
  p[net.weight_index(0, 1, 0)] = 0.0;
  p[net.bias_index(0, 1)] = std::log(0.3);
  const auto g = net.forward(p.values(), std::vector{1.5});
  CHECK(g.mean_values()[0] == doctest::Approx(3.5));
  CHECK(g.std_values()[0] == doctest::Approx(0.3));
}

TEST_CASE("hidden layer applies tanh") {
  ad::ParamVector p;
  const Mlp net = add_mlp(p, "h", {1, 1, 2});
  p[net.weight_index(0, 0, 0)] = 1.0;
  p[net.weight_index(1, 0, 0)] = 1.0;
  const auto g = net.forward(p.values(), std::vector{0.8});
  CHECK(g.mean_values()[0] == doctest::Approx(std::tanh(0.8)));
  CHECK(g.std_values()[0] == doctest::Approx(1.0));
}

TEST_CASE("initialization is seeded and biases the log-std head") {
  ad::ParamVector a;
  ad::ParamVector b;
  const Mlp na = make_mlp(a, "q", {2, 8, 4}, 5);
  make_mlp(b, "q", {2, 8, 4}, 5);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  CHECK(a[na.bias_index(0, 0)] == 0.0);
  CHECK(a[na.bias_index(1, 0)] == 0.0);
  CHECK(a[na.bias_index(1, 2)] == -1.0);
  ad::ParamVector c;
  make_mlp(c, "q", {2, 8, 4}, 6);
  CHECK_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
}

TEST_CASE("Var and double forward passes agree") {
  ad::ParamVector p;
  const Mlp net = make_mlp(p, "q", {2, 5, 5, 4}, 9);
  const std::vector<double> in{0.3, -1.1};
  const auto gd = net.forward(p.values(), in);
  const auto pv = ad::constants(p.values());
  const auto gv = net.forward(std::span<const Var>(pv), std::span<const Var>(ad::constants(in)));
  CHECK(gd.mean_values() == gv.mean_values());
  CHECK(gd.std_values() == gv.std_values());
}

TEST_CASE("forward gradient matches finite differences") {
  ad::ParamVector p;
  const Mlp net = make_mlp(p, "q", {1, 6, 2}, 2);
  std::vector<double> at(p.values().begin(), p.values().end());
  at.push_back(0.4);
  const double worst = ad::fd_check(
      [&](ad::Tape&, std::span<const Var> v) {
        const auto g = net.forward(v.first(net.param_count()), v.subspan(net.param_count(), 1));
        return g.mean[0] * g.stddev[0];
      },
      at, 1e-5);
  CHECK(worst <= 1e-4);
}

TEST_CASE("shape helper") {
  const std::vector<std::size_t> hidden{16, 8};
  CHECK(net_shape(3, hidden, 2) == std::vector<std::size_t>{3, 16, 8, 4});
  CHECK(net_shape(1, {}, 1) == std::vector<std::size_t>{1, 2});
}

TEST_CASE("constant net ignores its input") {
  ad::ParamVector p;
  const Mlp net = add_mlp(p, "c", {3, 5, 2});
  p[net.bias_index(1, 0)] = 0.4;
  p[net.bias_index(1, 1)] = -0.7;
  for (const auto& in : {std::vector{0.0, 0.0, 0.0}, std::vector{3.0, -1.0, 2.0}}) {
    const auto g = net.forward(p.values(), in);
    CHECK(g.mean_values()[0] == 0.4);
    CHECK(g.std_values()[0] == std::exp(-0.7));
  }
}

TEST_CASE("affine net mean is W u + b") {
  ad::ParamVector p;
  const Mlp net = add_mlp(p, "a", {2, 4});
  const double w[2][2] = {{1.5, -0.5}, {0.25, 2.0}};
  for (std::size_t o = 0; o < 2; ++o) {
    for (std::size_t i = 0; i < 2; ++i) {
      p[net.weight_index(0, o, i)] = w[o][i];
    }
    p[net.bias_index(0, o)] = 0.1 * double(o + 1);
  }
  CHECK(net.is_affine());
  const auto g = net.forward(p.values(), std::vector{2.0, 3.0});
  CHECK(g.mean_values()[0] == doctest::Approx(1.5 * 2 - 0.5 * 3 + 0.1));
  CHECK(g.mean_values()[1] == doctest::Approx(0.25 * 2 + 2.0 * 3 + 0.2));
}

TEST_CASE("fan-in scaling keeps pre-activation variance") {
  // Inputs with unit variance; pre-activations of a width-64 layer should
  // have variance within a factor 2 of 1.
  ad::ParamVector p;
  const Mlp net = make_mlp(p, "f", {64, 64, 2}, 13);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  double s2 = 0.0;
  std::size_t count = 0;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> u(64);
    for (double& v : u) v = n01(rng);
    for (std::size_t o = 0; o < 64; ++o) {
      double a = p[net.bias_index(0, o)];
      for (std::size_t i = 0; i < 64; ++i) a += p[net.weight_index(0, o, i)] * u[i];
      s2 += a * a;
      ++count;
    }
  }
  const double var = s2 / double(count);
  CHECK(var > 0.5);
  CHECK(var < 2.0);
}

TEST_CASE("seed-zero net is finite on a box") {
  ad::ParamVector p;
  const Mlp net = make_mlp(p, "z", {2, 32, 4}, 0);
  for (double a = -5.0; a <= 5.0; a += 0.5) {
    for (double b = -5.0; b <= 5.0; b += 0.5) {
      const auto g = net.forward(p.values(), std::vector{a, b});
      for (double v : g.mean_values()) CHECK(std::isfinite(v));
      for (double v : g.std_values()) CHECK((std::isfinite(v) && v > 0.0));
    }
  }
}
