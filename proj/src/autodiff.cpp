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

#include "auxvi/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace auxvi::ad {

const char* op_name(OpKind kind) {
  switch (kind) {
  case OpKind::leaf: return "leaf";
  case OpKind::add: return "add";
  case OpKind::sub: return "sub";
  case OpKind::mul: return "mul";
  case OpKind::div: return "div";
  case OpKind::neg: return "neg";
  case OpKind::exp: return "exp";
  case OpKind::log: return "log";
  case OpKind::tanh: return "tanh";
  case OpKind::square: return "square";
  case OpKind::sum: return "sum";
  case OpKind::dot: return "dot";
  }
  return "?";
}

namespace {

std::string describe_var(const Var& v) {
  if (v.is_constant()) {
    std::ostringstream os;
    os.precision(17);
    os << "const " << v.value();
    return os.str();
  }
  return v.tape()->describe(v.index());
}

[[noreturn]] void fail_non_finite(OpKind kind, double value, const Var& a,
                                  const Var* b) {
  std::ostringstream os;
  os << "non-finite result " << value << " of " << op_name(kind) << " (inputs: "
     << describe_var(a);
  if (b != nullptr) {
    os << ", " << describe_var(*b);
  }
  os << ")";
  throw NumericalError(os.str());
}

Tape* common_tape(const Var& a, const Var& b) {
  if (a.is_constant()) {
    return b.tape();
  }
  if (!b.is_constant() && b.tape() != a.tape()) {
    throw std::logic_error("auxvi::ad: operands recorded on different tapes");
  }
  return a.tape();
}

Var unary(OpKind kind, double value, const Var& a, double da) {
  if (!std::isfinite(value)) {
    fail_non_finite(kind, value, a, nullptr);
  }
  if (a.is_constant()) {
    return Var(value);
  }
  return a.tape()->record(kind, value, a, da);
}

Var binary(OpKind kind, double value, const Var& a, double da, const Var& b,
           double db) {
  if (!std::isfinite(value)) {
    fail_non_finite(kind, value, a, &b);
  }
  Tape* tape = common_tape(a, b);
  if (tape == nullptr) {
    return Var(value);
  }
  return tape->record(kind, value, a, da, b, db);
}

} // namespace

Var::Var(double value) : value_(value) {
  if (!std::isfinite(value)) {
    std::ostringstream os;
    os << "non-finite constant " << value;
    throw NumericalError(os.str());
  }
}

double Var::adjoint() const {
  return tape_ == nullptr ? 0.0 : tape_->adjoint(index_);
}

std::size_t ParamVector::add(std::string name, double value) {
  for (const auto& n : names_) {
    if (n == name) {
      throw std::invalid_argument("duplicate parameter name: " + name);
    }
  }
  names_.push_back(std::move(name));
  values_.push_back(value);
  return values_.size() - 1;
}

std::size_t ParamVector::find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) {
      return i;
    }
  }
  throw std::out_of_range("unknown parameter: " + name);
}

Var Tape::variable(double value, std::string label) {
  if (!std::isfinite(value)) {
    std::ostringstream os;
    os << "non-finite leaf " << (label.empty() ? "<unnamed>" : label) << " = "
       << value;
    throw NumericalError(os.str());
  }
  Node node;
  if (!label.empty()) {
    node.label = static_cast<std::int32_t>(labels_.size());
    labels_.push_back(std::move(label));
  }
  nodes_.push_back(node);
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1), value);
}

std::vector<Var> Tape::bind(const ParamVector& params) {
  std::vector<Var> out;
  out.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    out.push_back(variable(params[i], params.names()[i]));
  }
  return out;
}

Var Tape::record(OpKind kind, double value, const Var& a, double da) {
  Node node;
  node.kind = kind;
  if (!a.is_constant()) {
    node.parent[0] = a.index();
    node.partial[0] = da;
    node.arity = 1;
  }
  nodes_.push_back(node);
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1), value);
}

Var Tape::record(OpKind kind, double value, const Var& a, double da,
                 const Var& b, double db) {
  Node node;
  node.kind = kind;
  if (!a.is_constant()) {
    node.parent[node.arity] = a.index();
    node.partial[node.arity] = da;
    ++node.arity;
  }
  if (!b.is_constant()) {
    node.parent[node.arity] = b.index();
    node.partial[node.arity] = db;
    ++node.arity;
  }
  nodes_.push_back(node);
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1), value);
}

void Tape::zero_adjoints() {
  for (auto& n : nodes_) {
    n.adjoint = 0.0;
  }
}

void Tape::backward(const Var& root) {
  zero_adjoints();
  if (root.is_constant()) {
    return;
  }
  if (root.tape() != this) {
    throw std::logic_error("auxvi::ad: backward on a foreign tape");
  }
  nodes_[root.index()].adjoint = 1.0;
  for (std::uint32_t i = root.index() + 1; i-- > 0;) {
    const Node& node = nodes_[i];
    if (node.adjoint == 0.0) {
      continue;
    }
    for (std::uint8_t p = 0; p < node.arity; ++p) {
      double& target = nodes_[node.parent[p]].adjoint;
      target += node.adjoint * node.partial[p];
      if (!std::isfinite(target)) {
        throw NumericalError("non-finite adjoint at " +
                             describe(node.parent[p]) + " from " + describe(i));
      }
    }
  }
}

void Tape::clear() {
  nodes_.clear();
  labels_.clear();
}

std::vector<double> Tape::gradient(std::span<const Var> leaves) const {
  std::vector<double> g;
  g.reserve(leaves.size());
  for (const auto& v : leaves) {
    if (v.is_constant()) {
      g.push_back(0.0);
    } else {
      if (v.tape() != this) {
        throw std::logic_error("auxvi::ad: gradient of a foreign leaf");
      }
      g.push_back(nodes_[v.index()].adjoint);
    }
  }
  return g;
}

std::string Tape::describe(std::uint32_t index) const {
  const Node& n = nodes_.at(index);
  std::ostringstream os;
  if (n.label >= 0) {
    os << labels_[static_cast<std::size_t>(n.label)];
  } else {
    os << op_name(n.kind) << "#" << index;
  }
  return os.str();
}

Var operator+(const Var& a, const Var& b) {
  return binary(OpKind::add, a.value() + b.value(), a, 1.0, b, 1.0);
}

Var operator-(const Var& a, const Var& b) {
  return binary(OpKind::sub, a.value() - b.value(), a, 1.0, b, -1.0);
}

Var operator*(const Var& a, const Var& b) {
  return binary(OpKind::mul, a.value() * b.value(), a, b.value(), b, a.value());
}

Var operator/(const Var& a, const Var& b) {
  if (b.value() == 0.0) {
    throw DomainError("division by zero (numerator " + describe_var(a) +
                      ", denominator " + describe_var(b) + ")");
  }
  const double inv = 1.0 / b.value();
  const double q = a.value() / b.value();
  return binary(OpKind::div, q, a, inv, b, -q * inv);
}

Var operator-(const Var& a) { return unary(OpKind::neg, -a.value(), a, -1.0); }

Var& operator+=(Var& a, const Var& b) { return a = a + b; }
Var& operator-=(Var& a, const Var& b) { return a = a - b; }
Var& operator*=(Var& a, const Var& b) { return a = a * b; }

Var exp(const Var& a) {
  const double e = std::exp(a.value());
  return unary(OpKind::exp, e, a, e);
}

Var log(const Var& a) {
  if (!(a.value() > 0.0)) {
    throw DomainError("log of non-positive value (input: " + describe_var(a) +
                      ")");
  }
  return unary(OpKind::log, std::log(a.value()), a, 1.0 / a.value());
}

Var tanh(const Var& a) {
  const double t = std::tanh(a.value());
  return unary(OpKind::tanh, t, a, 1.0 - t * t);
}

Var square(const Var& a) {
  return unary(OpKind::square, a.value() * a.value(), a, 2.0 * a.value());
}

Var sum(std::span<const Var> v) {
  if (v.empty()) {
    return Var(0.0);
  }
  Var acc = v[0];
  for (std::size_t i = 1; i < v.size(); ++i) {
    acc = acc + v[i];
  }
  return acc;
}

Var dot(std::span<const Var> a, std::span<const Var> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("dot: length mismatch");
  }
  if (a.empty()) {
    return Var(0.0);
  }
  Var acc = a[0] * b[0];
  for (std::size_t i = 1; i < a.size(); ++i) {
    acc = acc + a[i] * b[i];
  }
  return acc;
}

Var apply(OpKind kind, std::span<const Var> in) {
  auto need = [&](std::size_t n) {
    if (in.size() != n) {
      throw std::invalid_argument(std::string("apply: ") + op_name(kind) +
                                  " takes " + std::to_string(n) + " inputs");
    }
  };
  switch (kind) {
  case OpKind::add: need(2); return in[0] + in[1];
  case OpKind::sub: need(2); return in[0] - in[1];
  case OpKind::mul: need(2); return in[0] * in[1];
  case OpKind::div: need(2); return in[0] / in[1];
  case OpKind::neg: need(1); return -in[0];
  case OpKind::exp: need(1); return exp(in[0]);
  case OpKind::log: need(1); return log(in[0]);
  case OpKind::tanh: need(1); return tanh(in[0]);
  case OpKind::square: need(1); return square(in[0]);
  case OpKind::sum: return sum(in);
  case OpKind::dot: {
    if (in.size() % 2 != 0) {
      throw std::invalid_argument("apply: dot takes an even number of inputs");
    }
    const std::size_t half = in.size() / 2;
    return dot(in.first(half), in.subspan(half));
  }
  case OpKind::leaf: break;
  }
  throw std::invalid_argument("apply: leaf is not an operation");
}

std::vector<Var> constants(std::span<const double> values) {
  return {values.begin(), values.end()};
}

std::vector<double> values_of(std::span<const Var> vars) {
  std::vector<double> out;
  out.reserve(vars.size());
  for (const auto& v : vars) {
    out.push_back(v.value());
  }
  return out;
}

namespace {

ParamVector anonymous(std::span<const double> at) {
  ParamVector p;
  for (std::size_t i = 0; i < at.size(); ++i) {
    p.add("p" + std::to_string(i), at[i]);
  }
  return p;
}

} // namespace

std::vector<double> gradient(const ScalarFn& f, std::span<const double> at) {
  Tape tape;
  const auto leaves = tape.bind(anonymous(at));
  const Var root = f(tape, leaves);
  tape.backward(root);
  return tape.gradient(leaves);
}

double fd_check(const ScalarFn& f, std::span<const double> at, double step) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("fd_check: step must be positive");
  }
  const auto g_ad = gradient(f, at);
  std::vector<double> point(at.begin(), at.end());
  auto eval = [&]() {
    const auto vars = constants(point);
    Tape tape;
    return f(tape, vars).value();
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + step;
    const double up = eval();
    point[i] = saved - step;
    const double down = eval();
    point[i] = saved;
    const double g_fd = (up - down) / (2.0 * step);
    const double rel =
        std::abs(g_ad[i] - g_fd) / std::max(1.0, std::abs(g_ad[i]));
    worst = std::max(worst, rel);
  }
  return worst;
}

} // namespace auxvi::ad
