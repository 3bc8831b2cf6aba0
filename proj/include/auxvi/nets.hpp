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

#pragma once

#include "auxvi/autodiff.hpp"
#include "auxvi/distributions.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace auxvi {

/// Fully connected net mapping a conditioning vector to a DiagGaussian.
///
/// widths = {input, hidden..., 2 * target}. Hidden layers use tanh; the
/// output is split into a mean head and a log-std head, std = exp(log-std).
/// Weights live in a ParamVector slice starting at `offset`: for each layer a
/// row-major (out x in) weight block followed by the bias vector.
struct Mlp {
  std::vector<std::size_t> widths;
  std::size_t offset = 0;
  std::string prefix;

  std::size_t input_dim() const { return widths.front(); }
  std::size_t target_dim() const { return widths.back() / 2; }
  std::size_t layer_count() const { return widths.size() - 1; }
  std::size_t param_count() const;
  bool is_affine() const { return widths.size() == 2; }

  std::size_t weight_index(std::size_t layer, std::size_t out,
                           std::size_t in) const;
  std::size_t bias_index(std::size_t layer, std::size_t out) const;

  DiagGaussian forward(std::span<const Var> params,
                       std::span<const Var> input) const;
  DiagGaussian forward(std::span<const double> params,
                       std::span<const double> input) const;
};

/// Registers the net's parameters (zero-valued) at the end of `params`.
Mlp add_mlp(ad::ParamVector& params, std::string prefix,
            std::vector<std::size_t> widths);

/// Weights ~ N(0, 1/fan_in), biases 0, log-std head biases -1.
void init_mlp(const Mlp& net, ad::ParamVector& params, std::uint64_t seed);

/// add_mlp followed by init_mlp.
Mlp make_mlp(ad::ParamVector& params, std::string prefix,
             std::vector<std::size_t> widths, std::uint64_t seed);

/// Widths for a net from `input` to a Gaussian over `target` dims.
std::vector<std::size_t> net_shape(std::size_t input,
                                   std::span<const std::size_t> hidden,
                                   std::size_t target);

} // namespace auxvi
