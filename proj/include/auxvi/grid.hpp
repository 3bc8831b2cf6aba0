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

// Uniform trapezoid grids used by every brute-force oracle.

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace auxvi::oracle {

/// Thrown when an oracle is asked for a dimension or grid it cannot afford.
class OracleInfeasible : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Axis {
  double lower = -12.0;
  double upper = 12.0;
  std::size_t points = 4001;

  double spacing() const;
  double node(std::size_t i) const;
  double weight(std::size_t i) const;
};

/// Tensor-product grid; points per axis odd and >= 101, total <= 1e7.
class Grid {
public:
  static constexpr std::size_t kMaxPoints = 10'000'000;

  Grid() = default;
  explicit Grid(std::vector<Axis> axes);
  static Grid uniform(std::size_t dim, std::size_t points, double bound = 12.0);

  std::size_t dim() const { return axes_.size(); }
  std::size_t size() const { return size_; }
  const std::vector<Axis>& axes() const { return axes_; }

  /// Coordinates of flattened point i (last axis fastest).
  void point(std::size_t i, std::span<double> out) const;
  double weight(std::size_t i) const;

  /// All points, row-major, dim() values each.
  std::vector<double> coordinates() const;
  std::vector<double> weights() const;

private:
  std::vector<Axis> axes_;
  std::size_t size_ = 0;
};

/// log of sum_i w_i exp(log_values_i), stable for very negative inputs.
double log_trapezoid(std::span<const double> weights,
                     std::span<const double> log_values);

} // namespace auxvi::oracle
