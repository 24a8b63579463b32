#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "psym/errors.hpp"
#include "psym/linalg.hpp"

namespace psym {

// ---------------------------------------------------------------------------
// Scalar shims. Generic numeric code in this library calls cos/sin/log/abs/
// powi unqualified; these overloads make the calls resolve for plain doubles
// exactly like <cmath>, with the domain checks the traced types also perform.
// ---------------------------------------------------------------------------

inline double cos(double x) { return std::cos(x); }
inline double sin(double x) { return std::sin(x); }

inline double log(double x) {
  if (!(x > 0.0)) throw DomainError("log of non-positive argument");
  return std::log(x);
}

inline double abs(double x) { return std::fabs(x); }

// x^n by repeated multiplication; one canonical evaluation order shared by
// the plain, tangent and taped paths so their values agree bit for bit.
inline double powi_value(double x, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= x;
  return r;
}

inline double powi(double x, int n) {
  if (n < 0) throw DomainError("powi requires a non-negative exponent");
  return powi_value(x, n);
}

// max(0,x) written in terms of abs so it stays inside the primitive set;
// equals std::max(0.0, x) bit for bit, derivative 0 at x = 0.
template <class T>
T relu(const T& x) {
  return (x + abs(x)) * 0.5;
}

// ---------------------------------------------------------------------------
// Forward mode: value + directional derivative.
// ---------------------------------------------------------------------------

struct Dual {
  double v = 0.0;  // primal
  double t = 0.0;  // tangent

  Dual() = default;
  Dual(double value) : v(value) {}
  Dual(double value, double tangent) : v(value), t(tangent) {}
  double value() const { return v; }
};

inline Dual operator-(const Dual& x) { return {-x.v, -x.t}; }
inline Dual operator+(const Dual& x, const Dual& y) { return {x.v + y.v, x.t + y.t}; }
inline Dual operator-(const Dual& x, const Dual& y) { return {x.v - y.v, x.t - y.t}; }
inline Dual operator*(const Dual& x, const Dual& y) {
  return {x.v * y.v, x.t * y.v + x.v * y.t};
}
inline Dual operator/(const Dual& x, const Dual& y) {
  if (y.v == 0.0) throw DomainError("division by zero");
  return {x.v / y.v, (x.t * y.v - x.v * y.t) / (y.v * y.v)};
}

inline Dual operator+(const Dual& x, double c) { return {x.v + c, x.t}; }
inline Dual operator+(double c, const Dual& x) { return {c + x.v, x.t}; }
inline Dual operator-(const Dual& x, double c) { return {x.v - c, x.t}; }
inline Dual operator-(double c, const Dual& x) { return {c - x.v, -x.t}; }
inline Dual operator*(const Dual& x, double c) { return {x.v * c, x.t * c}; }
inline Dual operator*(double c, const Dual& x) { return {c * x.v, c * x.t}; }
inline Dual operator/(const Dual& x, double c) {
  if (c == 0.0) throw DomainError("division by zero");
  return {x.v / c, x.t / c};
}
inline Dual operator/(double c, const Dual& x) {
  if (x.v == 0.0) throw DomainError("division by zero");
  return {c / x.v, -c * x.t / (x.v * x.v)};
}

inline Dual cos(const Dual& x) { return {std::cos(x.v), -std::sin(x.v) * x.t}; }
inline Dual sin(const Dual& x) { return {std::sin(x.v), std::cos(x.v) * x.t}; }
inline Dual log(const Dual& x) {
  if (!(x.v > 0.0)) throw DomainError("log of non-positive argument");
  return {std::log(x.v), x.t / x.v};
}
inline Dual abs(const Dual& x) {
  const double s = x.v > 0.0 ? 1.0 : (x.v < 0.0 ? -1.0 : 0.0);
  return {std::fabs(x.v), s * x.t};
}
inline Dual powi(const Dual& x, int n) {
  if (n < 0) throw DomainError("powi requires a non-negative exponent");
  const double d = n == 0 ? 0.0 : static_cast<double>(n) * powi_value(x.v, n - 1);
  return {powi_value(x.v, n), d * x.t};
}

// ---------------------------------------------------------------------------
// Reverse mode: a Wengert tape of primitive records. Each node stores its
// operand indices and the local partials evaluated at forward time, so one
// reverse sweep yields exact gradients in deterministic order.
// ---------------------------------------------------------------------------

class Tape;

// Handle to a tape node, or an untracked constant when `tape() == nullptr`.
class Rev {
 public:
  Rev() = default;
  Rev(double value) : v_(value) {}
  Rev(Tape* tape, std::uint32_t index, double value) : t_(tape), i_(index), v_(value) {}

  double value() const { return v_; }
  Tape* tape() const { return t_; }
  std::uint32_t index() const { return i_; }

 private:
  Tape* t_ = nullptr;
  std::uint32_t i_ = 0;
  double v_ = 0.0;
};

class Tape {
 public:
  enum class Op : std::uint8_t {
    Leaf, Const,
    Add, Sub, Mul, Div,
    Neg, Abs, Cos, Sin, Log, PowInt,
    AddC, SubC, RSubC, MulC, DivC, RDivC,
  };

  struct Node {
    Op op;
    std::uint32_t a = 0;
    std::uint32_t b = 0;  // second operand, or integer payload for PowInt
    double pa = 0.0;      // partial w.r.t. a (Leaf/Const: stored value)
    double pb = 0.0;      // partial w.r.t. b, or constant payload
  };

  void clear() {
    nodes_.clear();
    vals_.clear();
    inputs_.clear();
    outputs_.clear();
  }

  std::size_t size() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  double value_at(std::uint32_t i) const { return vals_[i]; }
  const std::vector<std::uint32_t>& inputs() const { return inputs_; }
  const std::vector<std::uint32_t>& outputs() const { return outputs_; }

  Rev leaf(double v) {
    const auto i = emit(Op::Leaf, 0, 0, v, 0.0, v);
    inputs_.push_back(i);
    return {this, i, v};
  }

  Rev constant(double v) { return {this, emit(Op::Const, 0, 0, v, 0.0, v), v}; }

  void set_outputs(std::span<const Rev> ys) {
    outputs_.clear();
    for (const Rev& y : ys) {
      if (y.tape() == this) {
        outputs_.push_back(y.index());
      } else {
        outputs_.push_back(constant(y.value()).index());
      }
    }
  }

  std::vector<double> output_values() const {
    std::vector<double> out;
    out.reserve(outputs_.size());
    for (auto i : outputs_) out.push_back(vals_[i]);
    return out;
  }

  // Recomputes every node value from the recorded operations and returns the
  // outputs. Bit-identical to the recorded forward pass.
  std::vector<double> replay();

  std::uint32_t emit(Op op, std::uint32_t a, std::uint32_t b, double pa, double pb, double value) {
    nodes_.push_back({op, a, b, pa, pb});
    vals_.push_back(value);
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

 private:
  std::vector<Node> nodes_;
  std::vector<double> vals_;
  std::vector<std::uint32_t> inputs_;
  std::vector<std::uint32_t> outputs_;
};

namespace detail {

inline Tape* joint_tape(const Rev& x, const Rev& y) {
  Tape* t = x.tape();
  Tape* u = y.tape();
  if (t && u && t != u) throw std::logic_error("operands recorded on different tapes");
  return t ? t : u;
}

}  // namespace detail

inline Rev operator+(const Rev& x, const Rev& y) {
  const double v = x.value() + y.value();
  Tape* t = detail::joint_tape(x, y);
  if (!t) return v;
  if (x.tape() && y.tape())
    return {t, t->emit(Tape::Op::Add, x.index(), y.index(), 1.0, 1.0, v), v};
  if (x.tape()) return {t, t->emit(Tape::Op::AddC, x.index(), 0, 1.0, y.value(), v), v};
  return {t, t->emit(Tape::Op::AddC, y.index(), 0, 1.0, x.value(), v), v};
}

inline Rev operator-(const Rev& x, const Rev& y) {
  const double v = x.value() - y.value();
  Tape* t = detail::joint_tape(x, y);
  if (!t) return v;
  if (x.tape() && y.tape())
    return {t, t->emit(Tape::Op::Sub, x.index(), y.index(), 1.0, -1.0, v), v};
  if (x.tape()) return {t, t->emit(Tape::Op::SubC, x.index(), 0, 1.0, y.value(), v), v};
  return {t, t->emit(Tape::Op::RSubC, y.index(), 0, -1.0, x.value(), v), v};
}

inline Rev operator*(const Rev& x, const Rev& y) {
  const double v = x.value() * y.value();
  Tape* t = detail::joint_tape(x, y);
  if (!t) return v;
  if (x.tape() && y.tape())
    return {t, t->emit(Tape::Op::Mul, x.index(), y.index(), y.value(), x.value(), v), v};
  if (x.tape()) return {t, t->emit(Tape::Op::MulC, x.index(), 0, y.value(), y.value(), v), v};
  return {t, t->emit(Tape::Op::MulC, y.index(), 0, x.value(), x.value(), v), v};
}

inline Rev operator/(const Rev& x, const Rev& y) {
  Tape* t = detail::joint_tape(x, y);
  if (y.value() == 0.0)
    throw DomainError("division by zero", t ? t->size() : DomainError::no_node);
  const double v = x.value() / y.value();
  if (!t) return v;
  if (x.tape() && y.tape()) {
    const double pa = 1.0 / y.value();
    const double pb = -x.value() / (y.value() * y.value());
    return {t, t->emit(Tape::Op::Div, x.index(), y.index(), pa, pb, v), v};
  }
  if (x.tape())
    return {t, t->emit(Tape::Op::DivC, x.index(), 0, 1.0 / y.value(), y.value(), v), v};
  const double pa = -x.value() / (y.value() * y.value());
  return {t, t->emit(Tape::Op::RDivC, y.index(), 0, pa, x.value(), v), v};
}

inline Rev operator+(const Rev& x, double c) { return x + Rev(c); }
inline Rev operator+(double c, const Rev& x) { return Rev(c) + x; }
inline Rev operator-(const Rev& x, double c) { return x - Rev(c); }
inline Rev operator-(double c, const Rev& x) { return Rev(c) - x; }
inline Rev operator*(const Rev& x, double c) { return x * Rev(c); }
inline Rev operator*(double c, const Rev& x) { return Rev(c) * x; }
inline Rev operator/(const Rev& x, double c) { return x / Rev(c); }
inline Rev operator/(double c, const Rev& x) { return Rev(c) / x; }

inline Rev operator-(const Rev& x) {
  const double v = -x.value();
  if (!x.tape()) return v;
  Tape* t = x.tape();
  return {t, t->emit(Tape::Op::Neg, x.index(), 0, -1.0, 0.0, v), v};
}

inline Rev abs(const Rev& x) {
  const double v = std::fabs(x.value());
  if (!x.tape()) return v;
  const double s = x.value() > 0.0 ? 1.0 : (x.value() < 0.0 ? -1.0 : 0.0);
  Tape* t = x.tape();
  return {t, t->emit(Tape::Op::Abs, x.index(), 0, s, 0.0, v), v};
}

inline Rev cos(const Rev& x) {
  const double v = std::cos(x.value());
  if (!x.tape()) return v;
  Tape* t = x.tape();
  return {t, t->emit(Tape::Op::Cos, x.index(), 0, -std::sin(x.value()), 0.0, v), v};
}

inline Rev sin(const Rev& x) {
  const double v = std::sin(x.value());
  if (!x.tape()) return v;
  Tape* t = x.tape();
  return {t, t->emit(Tape::Op::Sin, x.index(), 0, std::cos(x.value()), 0.0, v), v};
}

inline Rev log(const Rev& x) {
  if (!(x.value() > 0.0))
    throw DomainError("log of non-positive argument",
                      x.tape() ? x.tape()->size() : DomainError::no_node);
  const double v = std::log(x.value());
  if (!x.tape()) return v;
  Tape* t = x.tape();
  return {t, t->emit(Tape::Op::Log, x.index(), 0, 1.0 / x.value(), 0.0, v), v};
}

inline Rev powi(const Rev& x, int n) {
  if (n < 0) throw DomainError("powi requires a non-negative exponent");
  const double v = powi_value(x.value(), n);
  if (!x.tape()) return v;
  const double pa = n == 0 ? 0.0 : static_cast<double>(n) * powi_value(x.value(), n - 1);
  Tape* t = x.tape();
  return {t, t->emit(Tape::Op::PowInt, x.index(), static_cast<std::uint32_t>(n), pa, 0.0, v), v};
}

inline std::vector<double> Tape::replay() {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::Leaf:
      case Op::Const: vals_[i] = n.pa; break;
      case Op::Add: vals_[i] = vals_[n.a] + vals_[n.b]; break;
      case Op::Sub: vals_[i] = vals_[n.a] - vals_[n.b]; break;
      case Op::Mul: vals_[i] = vals_[n.a] * vals_[n.b]; break;
      case Op::Div: vals_[i] = vals_[n.a] / vals_[n.b]; break;
      case Op::Neg: vals_[i] = -vals_[n.a]; break;
      case Op::Abs: vals_[i] = std::fabs(vals_[n.a]); break;
      case Op::Cos: vals_[i] = std::cos(vals_[n.a]); break;
      case Op::Sin: vals_[i] = std::sin(vals_[n.a]); break;
      case Op::Log: vals_[i] = std::log(vals_[n.a]); break;
      case Op::PowInt: vals_[i] = powi_value(vals_[n.a], static_cast<int>(n.b)); break;
      case Op::AddC: vals_[i] = vals_[n.a] + n.pb; break;
      case Op::SubC: vals_[i] = vals_[n.a] - n.pb; break;
      case Op::RSubC: vals_[i] = n.pb - vals_[n.a]; break;
      case Op::MulC: vals_[i] = vals_[n.a] * n.pb; break;
      case Op::DivC: vals_[i] = vals_[n.a] / n.pb; break;
      case Op::RDivC: vals_[i] = n.pb / vals_[n.a]; break;
    }
  }
  return output_values();
}

// ---------------------------------------------------------------------------
// Module entry points.
// ---------------------------------------------------------------------------

// Records f at the given leaves. f is a generic callable mapping
// std::span<const Rev> to std::vector<Rev>.
template <class F>
void record_into(Tape& tape, F&& f, std::span<const double> leaves) {
  tape.clear();
  std::vector<Rev> xs;
  xs.reserve(leaves.size());
  for (double v : leaves) xs.push_back(tape.leaf(v));
  std::vector<Rev> ys = f(std::span<const Rev>(xs));
  tape.set_outputs(ys);
}

struct Recording {
  std::vector<double> output;
  Tape tape;
};

template <class F>
Recording record(F&& f, std::span<const double> leaves) {
  Recording rec;
  record_into(rec.tape, std::forward<F>(f), leaves);
  rec.output = rec.tape.output_values();
  return rec;
}

// Accumulates d(cotangent . output)/d(leaf_i) into grad[i].
// `adjoint` is scratch storage reused across calls.
inline void backward_into(const Tape& tape, std::span<const double> cotangent,
                          std::vector<double>& adjoint, std::span<double> grad) {
  const auto& nodes = tape.nodes();
  const auto& outputs = tape.outputs();
  const auto& inputs = tape.inputs();
  if (cotangent.size() != outputs.size())
    throw std::invalid_argument("cotangent dimension does not match recorded output");
  if (grad.size() != inputs.size())
    throw std::invalid_argument("gradient buffer does not match leaf count");

  adjoint.assign(nodes.size(), 0.0);
  for (std::size_t k = 0; k < outputs.size(); ++k) adjoint[outputs[k]] += cotangent[k];

  for (std::size_t i = nodes.size(); i-- > 0;) {
    const double a = adjoint[i];
    if (a == 0.0) continue;
    const Tape::Node& n = nodes[i];
    switch (n.op) {
      case Tape::Op::Leaf:
      case Tape::Op::Const:
        break;
      case Tape::Op::Add:
      case Tape::Op::Sub:
      case Tape::Op::Mul:
      case Tape::Op::Div:
        adjoint[n.a] += n.pa * a;
        adjoint[n.b] += n.pb * a;
        break;
      default:
        adjoint[n.a] += n.pa * a;
        break;
    }
  }
  for (std::size_t k = 0; k < inputs.size(); ++k) grad[k] += adjoint[inputs[k]];
}

// Gradient of cotangent . output with respect to the recorded leaves.
inline std::vector<double> backward(const Tape& tape, std::span<const double> cotangent) {
  std::vector<double> grad(tape.inputs().size(), 0.0);
  std::vector<double> adjoint;
  backward_into(tape, cotangent, adjoint, grad);
  return grad;
}

// Jacobian-vector product (df/dy)(point) . tangent via forward tangent
// propagation. f maps std::span<const Dual> to std::vector<Dual>.
template <class F>
std::vector<double> jvp(F&& f, std::span<const double> point, std::span<const double> tangent) {
  if (point.size() != tangent.size())
    throw std::invalid_argument("tangent dimension does not match point");
  std::vector<Dual> xs(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) xs[i] = Dual(point[i], tangent[i]);
  std::vector<Dual> ys = f(std::span<const Dual>(xs));
  std::vector<double> out(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) out[i] = ys[i].t;
  return out;
}

// Dense Jacobian assembled column by column from unit-tangent jvp calls.
template <class F>
Mat jacobian(F&& f, std::span<const double> point) {
  const std::size_t n = point.size();
  std::vector<double> e(n, 0.0);
  Mat jac;
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    std::vector<double> col = jvp(f, point, e);
    e[j] = 0.0;
    if (j == 0) jac = Mat(col.size(), n);
    for (std::size_t i = 0; i < col.size(); ++i) jac.at(i, j) = col[i];
  }
  return jac;
}

// Central-difference gradient of a scalar function; the test oracle.
// f maps std::span<const double> to double.
template <class F>
std::vector<double> fd_gradient(F&& f, std::span<const double> point, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_gradient step must be positive");
  std::vector<double> x(point.begin(), point.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + step;
    const double fp = f(std::span<const double>(x));
    x[i] = xi - step;
    const double fm = f(std::span<const double>(x));
    x[i] = xi;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

}  // namespace psym
