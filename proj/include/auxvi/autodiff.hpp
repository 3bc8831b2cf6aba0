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

// Reverse-mode automatic differentiation over scalars.
//
// A Var is either a constant (no tape) or a reference to a node recorded on a
// Tape. Arithmetic between constants never touches a tape, so the same code
// path evaluates plain values and differentiable graphs. Every operation
// checks its result for finiteness and throws with the node label when it is
// not.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace auxvi::ad {

class Tape;

/// Thrown when an operation produces (or receives) a non-finite value.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Thrown on log of a non-positive value or division by zero.
class DomainError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

enum class OpKind : std::uint8_t {
  leaf,
  add,
  sub,
  mul,
  div,
  neg,
  exp,
  log,
  tanh,
  square,
  sum,
  dot,
};

const char* op_name(OpKind kind);

class Var {
public:
  Var() = default;
  Var(double value); // NOLINT: implicit constants are the point

  double value() const { return value_; }
  bool is_constant() const { return tape_ == nullptr; }
  Tape* tape() const { return tape_; }
  std::uint32_t index() const { return index_; }

  /// Adjoint after the last backward pass; 0 for constants.
  double adjoint() const;

private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t index, double value)
      : tape_(tape), index_(index), value_(value) {}

  Tape* tape_ = nullptr;
  std::uint32_t index_ = 0;
  double value_ = 0.0;
};

/// Flat named vector of real parameters.
class ParamVector {
public:
  /// Appends a parameter; names must be unique.
  std::size_t add(std::string name, double value);

  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const std::vector<std::string>& names() const { return names_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Index of a named parameter; throws std::out_of_range when absent.
  std::size_t find(const std::string& name) const;

private:
  std::vector<double> values_;
  std::vector<std::string> names_;
};

class Tape {
public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var variable(double value, std::string label = {});

  /// Records one leaf per parameter, labelled with the parameter name.
  std::vector<Var> bind(const ParamVector& params);

  /// Records a node with up to two parents and their local partials.
  Var record(OpKind kind, double value, const Var& a, double da);
  Var record(OpKind kind, double value, const Var& a, double da, const Var& b,
             double db);

  /// Zeroes all adjoints, seeds root with 1 and sweeps in reverse.
  void backward(const Var& root);

  void zero_adjoints();

  /// Drops every node; Vars referring to this tape become dangling.
  void clear();

  std::size_t size() const { return nodes_.size(); }
  double adjoint(std::uint32_t index) const { return nodes_[index].adjoint; }

  std::vector<double> gradient(std::span<const Var> leaves) const;

  /// Human-readable description of a node for diagnostics.
  std::string describe(std::uint32_t index) const;

private:
  struct Node {
    double adjoint = 0.0;
    double partial[2] = {0.0, 0.0};
    std::uint32_t parent[2] = {0, 0};
    std::uint8_t arity = 0;
    OpKind kind = OpKind::leaf;
    std::int32_t label = -1;
  };

  std::vector<Node> nodes_;
  std::vector<std::string> labels_;
};

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator-(const Var& a);
Var& operator+=(Var& a, const Var& b);
Var& operator-=(Var& a, const Var& b);
Var& operator*=(Var& a, const Var& b);

Var exp(const Var& a);
Var log(const Var& a);
Var tanh(const Var& a);
Var square(const Var& a);
Var sum(std::span<const Var> v);
Var dot(std::span<const Var> a, std::span<const Var> b);

/// Generic dispatcher over the op set. Binary ops take exactly two inputs,
/// unary ops one, sum any number, dot an even number (first half · second).
Var apply(OpKind kind, std::span<const Var> inputs);

std::vector<Var> constants(std::span<const double> values);
std::vector<double> values_of(std::span<const Var> vars);

/// Scalar function of a parameter vector, built on the given tape.
using ScalarFn = std::function<Var(Tape&, std::span<const Var>)>;

/// Gradient of f at the given point by one backward pass.
std::vector<double> gradient(const ScalarFn& f, std::span<const double> at);

/// Max over parameters of |g_ad - g_fd| / max(1, |g_ad|) using central
/// differences with the given step.
double fd_check(const ScalarFn& f, std::span<const double> at, double step);

} // namespace auxvi::ad
