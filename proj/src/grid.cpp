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

#include "auxvi/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace auxvi::oracle {

double Axis::spacing() const {
  return (upper - lower) / static_cast<double>(points - 1);
}

double Axis::node(std::size_t i) const {
  return lower + spacing() * static_cast<double>(i);
}

double Axis::weight(std::size_t i) const {
  const double h = spacing();
  return (i == 0 || i + 1 == points) ? 0.5 * h : h;
}

Grid::Grid(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) {
    throw OracleInfeasible("grid needs at least one axis");
  }
  size_ = 1;
  for (const auto& a : axes_) {
    if (a.points < 101 || a.points % 2 == 0) {
      throw OracleInfeasible("grid axis needs an odd point count >= 101, got " +
                             std::to_string(a.points));
    }
    if (!std::isfinite(a.lower) || !std::isfinite(a.upper) ||
        !(a.lower < a.upper)) {
      throw OracleInfeasible("grid axis bounds must be finite and ordered");
    }
    if (size_ > kMaxPoints / a.points) {
      throw OracleInfeasible("grid exceeds the 1e7 point budget");
    }
    size_ *= a.points;
  }
}

Grid Grid::uniform(std::size_t dim, std::size_t points, double bound) {
  return Grid(std::vector<Axis>(dim, Axis{-bound, bound, points}));
}

void Grid::point(std::size_t i, std::span<double> out) const {
  for (std::size_t d = axes_.size(); d-- > 0;) {
    const std::size_t n = axes_[d].points;
    out[d] = axes_[d].node(i % n);
    i /= n;
  }
}

double Grid::weight(std::size_t i) const {
  double w = 1.0;
  for (std::size_t d = axes_.size(); d-- > 0;) {
    const std::size_t n = axes_[d].points;
    w *= axes_[d].weight(i % n);
    i /= n;
  }
  return w;
}

std::vector<double> Grid::coordinates() const {
  std::vector<double> out(size_ * dim());
  for (std::size_t i = 0; i < size_; ++i) {
    point(i, std::span<double>(out).subspan(i * dim(), dim()));
  }
  return out;
}

std::vector<double> Grid::weights() const {
  std::vector<double> out(size_);
  for (std::size_t i = 0; i < size_; ++i) {
    out[i] = weight(i);
  }
  return out;
}

double log_trapezoid(std::span<const double> weights,
                     std::span<const double> log_values) {
  double top = -std::numeric_limits<double>::infinity();
  for (double v : log_values) {
    top = std::max(top, v);
  }
  if (!std::isfinite(top)) {
    return top;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < log_values.size(); ++i) {
    acc += weights[i] * std::exp(log_values[i] - top);
  }
  return top + std::log(acc);
}

} // namespace auxvi::oracle
