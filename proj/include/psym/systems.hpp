#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "psym/ad.hpp"
#include "psym/linalg.hpp"

namespace psym {

// State convention everywhere in this library: y = (p_1..p_d, q_1..q_d).

enum class SystemId { Harmonic, Pendulum, ModifiedPendulum, BeadOnWire, Galactic };

// The canonical structure matrix J = [[0, I], [-I, 0]] on R^{2d};
// J^2 = -I, J^T = -J and J^{-1} = -J.
struct SymplecticMatrix {
  int half_dim = 1;

  // J y = (q, -p)
  template <class T>
  std::vector<T> apply(std::span<const T> y) const {
    check(y.size());
    const int d = half_dim;
    std::vector<T> out(2 * d);
    for (int i = 0; i < d; ++i) {
      out[i] = y[d + i];
      out[d + i] = -y[i];
    }
    return out;
  }

  // J^{-1} y = -J y = (-q, p)
  template <class T>
  std::vector<T> apply_inverse(std::span<const T> y) const {
    check(y.size());
    const int d = half_dim;
    std::vector<T> out(2 * d);
    for (int i = 0; i < d; ++i) {
      out[i] = -y[d + i];
      out[d + i] = y[i];
    }
    return out;
  }

  Mat dense() const {
    Mat j(2 * half_dim, 2 * half_dim);
    for (int i = 0; i < half_dim; ++i) {
      j.at(i, half_dim + i) = 1.0;
      j.at(half_dim + i, i) = -1.0;
    }
    return j;
  }

 private:
  void check(std::size_t n) const {
    if (n != static_cast<std::size_t>(2 * half_dim))
      throw std::invalid_argument("symplectic matrix: dimension mismatch");
  }
};

namespace detail {

// U(q) = 0.1 q (q - 1) for the bead-on-a-wire potential.
template <class T>
T bead_potential(const T& q) {
  return 0.1 * q * (q - 1.0);
}

template <class T>
T bead_potential_slope(const T& q) {
  return 0.1 * (2.0 * q - 1.0);
}

template <class T>
T hamiltonian_impl(SystemId id, std::span<const T> y) {
  switch (id) {
    case SystemId::Harmonic:
      return (y[0] * y[0] + y[1] * y[1]) * 0.5;
    case SystemId::Pendulum:
      return y[0] * y[0] * 0.5 - cos(y[1]);
    case SystemId::ModifiedPendulum:
      return y[0] * y[0] * 0.5 - cos(y[1]) * (1.0 - y[0] / 6.0);
    case SystemId::BeadOnWire: {
      const T up = bead_potential_slope(y[1]);
      return y[0] * y[0] / (2.0 * (1.0 + up * up)) + bead_potential(y[1]);
    }
    case SystemId::Galactic: {
      const T& p1 = y[0];
      const T& p2 = y[1];
      const T& q1 = y[2];
      const T& q2 = y[3];
      return (p1 * p1 + p2 * p2) * 0.5 + (p1 * q2 - p2 * q1) * 0.5 +
             log(1.0 + q1 * q1 + q2 * q2);
    }
  }
  throw std::logic_error("unreachable");
}

// Hand-differentiated gradients, kept in sync with hamiltonian_impl.
template <class T>
std::vector<T> gradient_impl(SystemId id, std::span<const T> y) {
  switch (id) {
    case SystemId::Harmonic:
      return {y[0], y[1]};
    case SystemId::Pendulum:
      return {y[0], sin(y[1])};
    case SystemId::ModifiedPendulum:
      return {y[0] + cos(y[1]) / 6.0, sin(y[1]) * (1.0 - y[0] / 6.0)};
    case SystemId::BeadOnWire: {
      const T up = bead_potential_slope(y[1]);
      const T w = 1.0 + up * up;
      const T hp = y[0] / w;
      // d/dq [p^2 / (2w)] = -p^2 U' U'' / w^2 with U'' = 0.2
      const T hq = up - y[0] * y[0] * up * 0.2 / (w * w);
      return {hp, hq};
    }
    case SystemId::Galactic: {
      const T& p1 = y[0];
      const T& p2 = y[1];
      const T& q1 = y[2];
      const T& q2 = y[3];
      const T s = 1.0 + q1 * q1 + q2 * q2;
      return {p1 + q2 * 0.5, p2 - q1 * 0.5,
              2.0 * q1 / s - p2 * 0.5, 2.0 * q2 / s + p1 * 0.5};
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace detail

// A named 2d-dimensional system with analytic H and grad H. The evaluation
// templates accept double, Dual or Rev states, so the same formulas serve
// plain evaluation, tangent propagation and tape recording.
class HamiltonianSystem {
 public:
  static HamiltonianSystem builtin(std::string_view name) {
    if (name == "harmonic") return {SystemId::Harmonic, 1, "harmonic"};
    if (name == "pendulum") return {SystemId::Pendulum, 1, "pendulum"};
    if (name == "modified_pendulum") return {SystemId::ModifiedPendulum, 1, "modified_pendulum"};
    if (name == "bead_on_wire") return {SystemId::BeadOnWire, 1, "bead_on_wire"};
    if (name == "galactic") return {SystemId::Galactic, 2, "galactic"};
    throw std::invalid_argument("unknown system name: " + std::string(name));
  }

  SystemId id() const { return id_; }
  int half_dim() const { return half_dim_; }
  int dim() const { return 2 * half_dim_; }
  const std::string& name() const { return name_; }
  SymplecticMatrix structure() const { return {half_dim_}; }

  template <class T>
  T hamiltonian(std::span<const T> y) const {
    check_dim(y.size());
    return detail::hamiltonian_impl(id_, y);
  }

  template <class T>
  std::vector<T> gradient(std::span<const T> y) const {
    check_dim(y.size());
    return detail::gradient_impl(id_, y);
  }

  // The symplectic vector field J^{-1} grad H = (-H_q, H_p).
  template <class T>
  std::vector<T> field(std::span<const T> y) const {
    check_dim(y.size());
    std::vector<T> g = detail::gradient_impl(id_, y);
    return structure().template apply_inverse<T>(g);
  }

  double hamiltonian_at(std::span<const double> y) const { return hamiltonian<double>(y); }
  std::vector<double> gradient_at(std::span<const double> y) const { return gradient<double>(y); }
  std::vector<double> field_at(std::span<const double> y) const { return field<double>(y); }

 private:
  HamiltonianSystem(SystemId id, int half_dim, std::string name)
      : id_(id), half_dim_(half_dim), name_(std::move(name)) {}

  void check_dim(std::size_t n) const {
    if (n != static_cast<std::size_t>(2 * half_dim_))
      throw std::invalid_argument(name_ + ": state dimension must be " +
                                  std::to_string(2 * half_dim_));
  }

  SystemId id_;
  int half_dim_;
  std::string name_;
};

inline const std::vector<std::string>& builtin_system_names() {
  static const std::vector<std::string> names = {
      "harmonic", "pendulum", "modified_pendulum", "bead_on_wire", "galactic"};
  return names;
}

// Exact flow of the harmonic oscillator: rotation by angle t in each
// (p_i, q_i) plane. Test oracle with closed form.
inline std::vector<double> harmonic_rotation(std::span<const double> y0, double t) {
  if (y0.size() % 2 != 0) throw std::invalid_argument("state dimension must be even");
  const std::size_t d = y0.size() / 2;
  const double c = std::cos(t), s = std::sin(t);
  std::vector<double> y(y0.size());
  for (std::size_t i = 0; i < d; ++i) {
    y[i] = c * y0[i] - s * y0[d + i];
    y[d + i] = s * y0[i] + c * y0[d + i];
  }
  return y;
}

}  // namespace psym
