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

#include "auxvi/nets.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace auxvi {

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    n += widths[l + 1] * (widths[l] + 1);
  }
  return n;
}

std::size_t Mlp::weight_index(std::size_t layer, std::size_t out,
                              std::size_t in) const {
  std::size_t base = offset;
  for (std::size_t l = 0; l < layer; ++l) {
    base += widths[l + 1] * (widths[l] + 1);
  }
  return base + out * widths[layer] + in;
}

std::size_t Mlp::bias_index(std::size_t layer, std::size_t out) const {
  return weight_index(layer, 0, 0) + widths[layer + 1] * widths[layer] + out;
}

DiagGaussian Mlp::forward(std::span<const Var> params,
                          std::span<const Var> input) const {
  if (input.size() != input_dim()) {
    throw std::invalid_argument(prefix + ": input dimension " +
                                std::to_string(input.size()) + ", expected " +
                                std::to_string(input_dim()));
  }
  if (params.size() < offset + param_count()) {
    throw std::invalid_argument(prefix + ": parameter vector too short");
  }
  std::vector<Var> h(input.begin(), input.end());
  std::size_t pos = offset;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const std::size_t in = widths[l];
    const std::size_t out = widths[l + 1];
    const auto weights = params.subspan(pos, out * in);
    const auto bias = params.subspan(pos + out * in, out);
    pos += out * (in + 1);
    std::vector<Var> next;
    next.reserve(out);
    for (std::size_t o = 0; o < out; ++o) {
      Var pre = ad::dot(weights.subspan(o * in, in), h) + bias[o];
      next.push_back(l + 1 < layer_count() ? tanh(pre) : pre);
    }
    h = std::move(next);
  }
  const std::size_t d = target_dim();
  std::vector<Var> mean(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(d));
  std::vector<Var> stddev;
  stddev.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    stddev.push_back(exp(h[d + i]));
  }
  return DiagGaussian(std::move(mean), std::move(stddev));
}

DiagGaussian Mlp::forward(std::span<const double> params,
                          std::span<const double> input) const {
  const auto p = ad::constants(params);
  const auto u = ad::constants(input);
  return forward(std::span<const Var>(p), std::span<const Var>(u));
}

Mlp add_mlp(ad::ParamVector& params, std::string prefix,
            std::vector<std::size_t> widths) {
  if (widths.size() < 2) {
    throw std::invalid_argument(prefix + ": need at least input and output");
  }
  for (auto w : widths) {
    if (w < 1) {
      throw std::invalid_argument(prefix + ": widths must be at least 1");
    }
  }
  if (widths.back() % 2 != 0) {
    throw std::invalid_argument(prefix +
                                ": output width must be 2 x target dim");
  }
  Mlp net;
  net.widths = std::move(widths);
  net.offset = params.size();
  net.prefix = std::move(prefix);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const std::size_t in = net.widths[l];
    const std::size_t out = net.widths[l + 1];
    const std::string layer = net.prefix + ".l" + std::to_string(l);
    for (std::size_t o = 0; o < out; ++o) {
      for (std::size_t i = 0; i < in; ++i) {
        params.add(layer + ".w[" + std::to_string(o) + "," +
                       std::to_string(i) + "]",
                   0.0);
      }
    }
    for (std::size_t o = 0; o < out; ++o) {
      params.add(layer + ".b[" + std::to_string(o) + "]", 0.0);
    }
  }
  return net;
}

void init_mlp(const Mlp& net, ad::ParamVector& params, std::uint64_t seed) {
  std::mt19937_64 engine(mix_seed(seed, 0x6d6c70ULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const std::size_t in = net.widths[l];
    const std::size_t out = net.widths[l + 1];
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (std::size_t o = 0; o < out; ++o) {
      for (std::size_t i = 0; i < in; ++i) {
        params[net.weight_index(l, o, i)] = scale * normal(engine);
      }
      params[net.bias_index(l, o)] = 0.0;
    }
  }
  const std::size_t last = net.layer_count() - 1;
  for (std::size_t i = 0; i < net.target_dim(); ++i) {
    params[net.bias_index(last, net.target_dim() + i)] = -1.0;
  }
}

Mlp make_mlp(ad::ParamVector& params, std::string prefix,
             std::vector<std::size_t> widths, std::uint64_t seed) {
  Mlp net = add_mlp(params, std::move(prefix), std::move(widths));
  init_mlp(net, params, seed);
  return net;
}

std::vector<std::size_t> net_shape(std::size_t input,
                                   std::span<const std::size_t> hidden,
                                   std::size_t target) {
  std::vector<std::size_t> w{input};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(2 * target);
  return w;
}

} // namespace auxvi
