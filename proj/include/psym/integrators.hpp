#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "psym/ad.hpp"
#include "psym/errors.hpp"
#include "psym/linalg.hpp"
#include "psym/systems.hpp"

namespace psym {

// gamma = 1 / (4 (2 - 2^{1/3})), the coefficient every tableau entry is
// built from.
inline double ps_gamma() { return 1.0 / (4.0 * (2.0 - std::cbrt(2.0))); }

// Coefficients of the explicit 7-stage pseudo-symplectic Runge-Kutta method
// (convergence order 4). `a` is strictly lower triangular.
struct ButcherTableau {
  std::array<std::array<double, 7>, 7> a{};
  std::array<double, 7> b{};
  std::array<double, 7> c{};

  static const ButcherTableau& pseudo_symplectic7() {
    static const ButcherTableau tab = make();
    return tab;
  }

 private:
  static ButcherTableau make() {
    const double g = ps_gamma();
    ButcherTableau t;
    t.a[1][0] = 2 * g;
    t.a[2][1] = 4 * g;
    t.a[3][0] = 2 * g;
    t.a[3][2] = 0.5 - 2 * g;
    t.a[4][1] = 4 * g;
    t.a[4][3] = 1 - 8 * g;
    t.a[5][0] = 2 * g;
    t.a[5][2] = 0.5 - 2 * g;
    t.a[5][4] = 0.5 - 2 * g;
    t.a[6][1] = 4 * g;
    t.a[6][3] = 1 - 8 * g;
    t.a[6][5] = 4 * g;
    t.b = {g, 2 * g, 0.25 - g, 0.5 - 4 * g, 0.25 - g, 2 * g, g};
    t.c = {0.0, 2 * g, 4 * g, 0.5, 1 - 4 * g, 1 - 2 * g, 1.0};
    // explicitness: nothing on or above the diagonal
    for (int i = 0; i < 7; ++i)
      for (int j = i; j < 7; ++j)
        if (t.a[i][j] != 0.0) throw std::logic_error("tableau is not explicit");
    return t;
  }
};

// One step of the pseudo-symplectic Runge-Kutta method. `field` is a generic
// callable mapping std::span<const T> to std::vector<T>, so T may be double,
// Dual (for jvp/jacobian) or Rev (for tape recording).
template <class T, class F>
std::vector<T> ps_rk_step(F&& field, std::span<const T> y, double h) {
  if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("ps_rk_step requires 0 < h < 1");
  const auto& tab = ButcherTableau::pseudo_symplectic7();
  const std::size_t n = y.size();

  std::array<std::vector<T>, 7> f;
  std::vector<T> xi(n);
  for (int i = 0; i < 7; ++i) {
    xi.assign(y.begin(), y.end());
    for (int j = 0; j < i; ++j) {
      const double w = h * tab.a[i][j];
      if (w == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) xi[k] = xi[k] + w * f[j][k];
    }
    f[i] = field(std::span<const T>(xi));
    if (f[i].size() != n) throw std::invalid_argument("field output dimension mismatch");
  }

  std::vector<T> out(y.begin(), y.end());
  for (int j = 0; j < 7; ++j) {
    const double w = h * tab.b[j];
    for (std::size_t k = 0; k < n; ++k) out[k] = out[k] + w * f[j][k];
  }
  return out;
}

// K-fold composition; returns the whole trajectory, trajectory[0] = y0.
template <class T, class F>
std::vector<std::vector<T>> compose_flow(F&& field, std::span<const T> y0, double h, int K) {
  if (K < 1) throw std::invalid_argument("compose_flow requires K >= 1");
  std::vector<std::vector<T>> traj;
  traj.reserve(K + 1);
  traj.emplace_back(y0.begin(), y0.end());
  for (int k = 0; k < K; ++k) {
    try {
      traj.push_back(ps_rk_step<T>(field, std::span<const T>(traj.back()), h));
    } catch (const DomainError& e) {
      throw DomainError(std::string(e.what()) + " at flow step " + std::to_string(k + 1),
                        e.node());
    }
  }
  return traj;
}

// Implicit midpoint rule solved by fixed-point iteration started at the
// explicit Euler predictor; stops when successive iterates differ by less
// than tol in the max norm.
template <class F>
std::vector<double> implicit_midpoint_step(F&& field, std::span<const double> y, double h,
                                           double tol = 1e-12, int max_iter = 100,
                                           int* iterations = nullptr) {
  if (!(tol > 0.0)) throw std::invalid_argument("midpoint tolerance must be positive");
  const std::size_t n = y.size();
  std::vector<double> f0 = field(y);
  std::vector<double> yn(n), mid(n), next(n);
  for (std::size_t k = 0; k < n; ++k) yn[k] = y[k] + h * f0[k];

  double residual = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    for (std::size_t k = 0; k < n; ++k) mid[k] = (y[k] + yn[k]) * 0.5;
    std::vector<double> fm = field(std::span<const double>(mid));
    for (std::size_t k = 0; k < n; ++k) next[k] = y[k] + h * fm[k];
    residual = max_norm_diff(next, yn);
    yn = next;
    if (residual < tol) {
      if (iterations) *iterations = it;
      return yn;
    }
  }
  throw ConvergenceError("implicit midpoint did not converge within " +
                             std::to_string(max_iter) + " iterations",
                         residual);
}

// Reference trajectory point: implicit midpoint with a fixed small step.
inline std::vector<double> reference_solution(const HamiltonianSystem& sys,
                                              std::span<const double> y0, double t,
                                              double h_ref = 1e-4) {
  if (t < 0.0) throw std::invalid_argument("reference_solution requires t >= 0");
  const double steps_real = t / h_ref;
  const long steps = std::lround(steps_real);
  if (std::fabs(steps_real - static_cast<double>(steps)) > 1e-6)
    throw std::invalid_argument("t must be an integer multiple of the reference step");
  auto field = [&sys](std::span<const double> y) { return sys.field_at(y); };
  std::vector<double> y(y0.begin(), y0.end());
  for (long k = 0; k < steps; ++k) y = implicit_midpoint_step(field, y, h_ref);
  return y;
}

// One-step flow map of a system under the pseudo-symplectic integrator.
struct FlowMap {
  const HamiltonianSystem* system = nullptr;
  double step = 0.0;  // h < 1
  int compose = 1;    // number of chained steps

  template <class T>
  std::vector<T> operator()(std::span<const T> y) const {
    auto field = [this](std::span<const T> z) { return system->field<T>(z); };
    std::vector<T> out(y.begin(), y.end());
    for (int k = 0; k < compose; ++k) out = ps_rk_step<T>(field, std::span<const T>(out), step);
    return out;
  }
};

// Exact rotation map (the closed-form harmonic flow over one step);
// symplectic to rounding, used as a zero-residual control.
struct RotationMap {
  double angle = 0.0;

  template <class T>
  std::vector<T> operator()(std::span<const T> y) const {
    if (y.size() % 2 != 0) throw std::invalid_argument("state dimension must be even");
    const std::size_t d = y.size() / 2;
    const double c = std::cos(angle), s = std::sin(angle);
    std::vector<T> out(y.size());
    for (std::size_t i = 0; i < d; ++i) {
      out[i] = c * y[i] - s * y[d + i];
      out[d + i] = s * y[i] + c * y[d + i];
    }
    return out;
  }
};

// || M^T J M - J ||_F where M is the Jacobian of the one-step map at y.
template <class Map>
double symplecticity_residual(Map&& one_step, std::span<const double> y) {
  Mat m = jacobian([&one_step](std::span<const Dual> z) { return one_step(z); }, y);
  SymplecticMatrix j{static_cast<int>(y.size() / 2)};
  const Mat jd = j.dense();
  Mat r = matmul(matmul(transpose(m), jd), m);
  for (std::size_t i = 0; i < r.rows; ++i)
    for (std::size_t k = 0; k < r.cols; ++k) r.at(i, k) -= jd.at(i, k);
  return frobenius_norm(r);
}

inline double symplecticity_residual(const FlowMap& flow, std::span<const double> y) {
  return symplecticity_residual<const FlowMap&>(flow, y);
}

enum class OrderMode { Convergence, Symplecticity };

struct OrderFit {
  std::vector<double> steps;   // the h values actually used in the fit
  std::vector<double> errors;  // matching error or residual values
  double slope = 0.0;          // least-squares slope of log(error) vs log(h)
};

// Least-squares log-log fit; points at or below the noise floor are dropped.
// Throws NoiseFloorError when fewer than two usable points remain.
inline OrderFit fit_loglog(std::span<const double> steps, std::span<const double> errors,
                           double noise_floor = 1e-13) {
  OrderFit fit;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (errors[i] > noise_floor) {
      fit.steps.push_back(steps[i]);
      fit.errors.push_back(errors[i]);
    }
  }
  if (fit.steps.size() < 2)
    throw NoiseFloorError("errors are below the noise floor; enlarge the step sizes");

  const std::size_t n = fit.steps.size();
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += std::log(fit.steps[i]);
    sy += std::log(fit.errors[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(fit.steps[i]) - mx;
    sxy += dx * (std::log(fit.errors[i]) - my);
    sxx += dx * dx;
  }
  fit.slope = sxy / sxx;
  return fit;
}

struct OrderCheckOptions {
  int compose = 1;           // K, symplecticity mode
  double t_final = 1.0;      // horizon, convergence mode
  double noise_floor = 1e-13;
  double h_ref = 1e-5;       // reference step for the convergence-mode errors
};

// Measured order of the pseudo-symplectic method on a built-in system:
// convergence mode fits the global error at t_final against a midpoint
// reference; symplecticity mode fits the one-step (or K-step) structure
// residual at y0.
inline OrderFit observed_order(const HamiltonianSystem& sys, std::span<const double> y0,
                               std::span<const double> steps, OrderMode mode,
                               const OrderCheckOptions& opts = {}) {
  if (steps.size() < 3) throw std::invalid_argument("observed_order needs at least 3 steps");
  for (double h : steps)
    if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("steps must lie in (0, 1)");

  std::vector<double> errors;
  errors.reserve(steps.size());
  if (mode == OrderMode::Convergence) {
    const std::vector<double> ref = reference_solution(sys, y0, opts.t_final, opts.h_ref);
    auto field = [&sys](std::span<const double> y) { return sys.field_at(y); };
    for (double h : steps) {
      const double n_real = opts.t_final / h;
      const long n = std::lround(n_real);
      if (std::fabs(n_real - static_cast<double>(n)) > 1e-9)
        throw std::invalid_argument("t_final must be an integer multiple of every step");
      std::vector<double> y(y0.begin(), y0.end());
      for (long k = 0; k < n; ++k) y = ps_rk_step<double>(field, y, h);
      double s = 0.0;
      for (std::size_t k = 0; k < y.size(); ++k) s += (y[k] - ref[k]) * (y[k] - ref[k]);
      errors.push_back(std::sqrt(s));
    }
  } else {
    for (double h : steps) {
      FlowMap flow{&sys, h, opts.compose};
      errors.push_back(symplecticity_residual(flow, y0));
    }
  }
  return fit_loglog(steps, errors, opts.noise_floor);
}

}  // namespace psym
