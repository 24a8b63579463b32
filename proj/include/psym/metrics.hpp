#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "psym/integrators.hpp"
#include "psym/network.hpp"
#include "psym/systems.hpp"

namespace psym {

struct ErrorCurve {
  std::vector<double> times;
  std::vector<double> values;
};

using FieldFn = std::function<std::vector<double>(std::span<const double>)>;
using StepFn = std::function<std::vector<double>(std::span<const double>)>;  // one h-step

// Squared distance between the trajectory of `field` under the
// pseudo-symplectic integrator at step h and the midpoint reference
// trajectory, sampled at 0, h, 2h, ..., t_max.
inline ErrorCurve prediction_error_curve_field(const FieldFn& field,
                                               const HamiltonianSystem& sys,
                                               std::span<const double> y0, double h,
                                               double t_max, double h_ref = 1e-4) {
  const double n_real = t_max / h;
  const long n = std::lround(n_real);
  if (n < 1 || std::fabs(n_real - static_cast<double>(n)) > 1e-9)
    throw std::invalid_argument("t_max must be an integer multiple of h");
  const double r_real = h / h_ref;
  const long ref_per_sample = std::lround(r_real);
  if (ref_per_sample < 1 || std::fabs(r_real - static_cast<double>(ref_per_sample)) > 1e-9)
    throw std::invalid_argument("h must be an integer multiple of the reference step");

  auto true_field = [&sys](std::span<const double> y) { return sys.field_at(y); };
  std::vector<double> yhat(y0.begin(), y0.end());
  std::vector<double> yref(y0.begin(), y0.end());

  ErrorCurve curve;
  curve.times.push_back(0.0);
  curve.values.push_back(0.0);
  for (long k = 1; k <= n; ++k) {
    yhat = ps_rk_step<double>(field, yhat, h);
    for (long r = 0; r < ref_per_sample; ++r)
      yref = implicit_midpoint_step(true_field, yref, h_ref);
    double s = 0.0;
    for (std::size_t j = 0; j < yhat.size(); ++j) s += (yhat[j] - yref[j]) * (yhat[j] - yref[j]);
    curve.times.push_back(static_cast<double>(k) * h);
    curve.values.push_back(s);
  }
  return curve;
}

inline ErrorCurve prediction_error_curve(const GradientNet& net, const HamiltonianSystem& sys,
                                         std::span<const double> y0, double h, double t_max) {
  FieldFn f = [&net](std::span<const double> y) { return net.field(y); };
  return prediction_error_curve_field(f, sys, y0, h, t_max);
}

// Long-horizon trajectory error: mean over steps i = 1..n of
// (1/2d) || y_i - yhat_i ||^2, where y_i is the midpoint trajectory at the
// same step h and yhat is produced by `step` (one application per sample).
inline double trajectory_error_step(const StepFn& step, const HamiltonianSystem& sys,
                                    std::span<const double> y0, double h = 0.01,
                                    long n_steps = 60000) {
  if (n_steps < 1) throw std::invalid_argument("n_steps must be positive");
  auto true_field = [&sys](std::span<const double> y) { return sys.field_at(y); };
  std::vector<double> yref(y0.begin(), y0.end());
  std::vector<double> yhat(y0.begin(), y0.end());
  const double inv_dim = 1.0 / static_cast<double>(sys.dim());
  double acc = 0.0;
  for (long i = 0; i < n_steps; ++i) {
    yref = implicit_midpoint_step(true_field, yref, h);
    yhat = step(yhat);
    double s = 0.0;
    for (std::size_t j = 0; j < yref.size(); ++j) s += (yref[j] - yhat[j]) * (yref[j] - yhat[j]);
    acc += s * inv_dim;
  }
  return acc / static_cast<double>(n_steps);
}

inline double trajectory_error_field(const FieldFn& field, const HamiltonianSystem& sys,
                                     std::span<const double> y0, double h = 0.01,
                                     long n_steps = 60000) {
  StepFn step = [&field, h](std::span<const double> y) {
    return ps_rk_step<double>(field, y, h);
  };
  return trajectory_error_step(step, sys, y0, h, n_steps);
}

inline double trajectory_error(const GradientNet& net, const HamiltonianSystem& sys,
                               std::span<const double> y0, double h = 0.01,
                               long n_steps = 60000) {
  FieldFn f = [&net](std::span<const double> y) { return net.field(y); };
  return trajectory_error_field(f, sys, y0, h, n_steps);
}

// True Hamiltonian evaluated along the predicted trajectory.
inline ErrorCurve energy_curve_field(const FieldFn& field, const HamiltonianSystem& sys,
                                     std::span<const double> y0, double h, double t_max) {
  const double n_real = t_max / h;
  const long n = std::lround(n_real);
  if (n < 1 || std::fabs(n_real - static_cast<double>(n)) > 1e-9)
    throw std::invalid_argument("t_max must be an integer multiple of h");
  std::vector<double> y(y0.begin(), y0.end());
  ErrorCurve curve;
  curve.times.push_back(0.0);
  curve.values.push_back(sys.hamiltonian_at(y));
  for (long k = 1; k <= n; ++k) {
    y = ps_rk_step<double>(field, y, h);
    curve.times.push_back(static_cast<double>(k) * h);
    curve.values.push_back(sys.hamiltonian_at(y));
  }
  return curve;
}

inline ErrorCurve energy_curve(const GradientNet& net, const HamiltonianSystem& sys,
                               std::span<const double> y0, double h, double t_max) {
  FieldFn f = [&net](std::span<const double> y) { return net.field(y); };
  return energy_curve_field(f, sys, y0, h, t_max);
}

// max_t |H(yhat(t)) - H(y0)| of an energy curve.
inline double max_energy_drift(const ErrorCurve& energy) {
  if (energy.values.empty()) return 0.0;
  const double h0 = energy.values.front();
  double m = 0.0;
  for (double v : energy.values) m = std::max(m, std::fabs(v - h0));
  return m;
}

// Per-system default evaluation start points, recorded in output metadata.
inline std::vector<double> default_eval_start(const HamiltonianSystem& sys) {
  if (sys.id() == SystemId::Galactic) return {0.5, 0.0, 0.5, 0.0};
  return {1.0, 0.0};
}

}  // namespace psym
