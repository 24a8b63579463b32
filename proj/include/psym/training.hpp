#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "psym/ad.hpp"
#include "psym/integrators.hpp"
#include "psym/network.hpp"
#include "psym/rng.hpp"
#include "psym/systems.hpp"

namespace psym {

struct DatasetMeta {
  std::string system_name;
  std::vector<std::pair<double, double>> region;  // per-coordinate bounds
  double interval = 0.01;                         // T
  double h_gen = 0.01;
  std::uint64_t seed = 0;
};

// N pairs (y0, y1) separated by the observation interval T.
struct Dataset {
  int half_dim = 1;
  std::vector<std::vector<double>> y0;
  std::vector<std::vector<double>> y1;
  DatasetMeta meta;

  std::size_t size() const { return y0.size(); }
  int dim() const { return 2 * half_dim; }
};

// Core generator over an arbitrary field, so tests can substitute stubs.
// y0 ~ uniform on the region (coordinates drawn in order from the seeded
// stream, sample by sample); y1 is T/h_gen implicit midpoint steps.
template <class F>
Dataset generate_dataset_with_field(F&& field, int half_dim, const std::string& system_name,
                                    std::span<const std::pair<double, double>> region, int n,
                                    double interval, double h_gen, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("dataset needs at least one sample");
  const int dim = 2 * half_dim;
  if (region.size() != static_cast<std::size_t>(dim))
    throw std::invalid_argument("region must have one bound pair per coordinate");
  const double steps_real = interval / h_gen;
  const long steps = std::lround(steps_real);
  if (steps < 1 || std::fabs(steps_real - static_cast<double>(steps)) > 1e-12)
    throw std::invalid_argument("h_gen must divide the observation interval");

  Dataset ds;
  ds.half_dim = half_dim;
  ds.meta = {system_name, {region.begin(), region.end()}, interval, h_gen, seed};
  RandomStream rng(seed);
  for (int i = 0; i < n; ++i) {
    std::vector<double> y(dim);
    for (int k = 0; k < dim; ++k) y[k] = rng.uniform(region[k].first, region[k].second);
    ds.y0.push_back(y);
    try {
      for (long s = 0; s < steps; ++s)
        y = implicit_midpoint_step(field, std::span<const double>(y), h_gen);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("sample " + std::to_string(i) + ": " + e.what(), e.residual());
    }
    ds.y1.push_back(std::move(y));
  }
  return ds;
}

inline Dataset generate_dataset(const HamiltonianSystem& sys,
                                std::span<const std::pair<double, double>> region, int n,
                                double interval, double h_gen, std::uint64_t seed) {
  auto field = [&sys](std::span<const double> y) { return sys.field_at(y); };
  return generate_dataset_with_field(field, sys.half_dim(), sys.name(), region, n, interval,
                                     h_gen, seed);
}

struct AdamParams {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m, v;
  long t = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// One Adam update with bias correction.
inline void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad,
                      const AdamParams& hp) {
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.t = 0;
  }
  if (grad.size() != params.size()) throw std::invalid_argument("adam_step: shape mismatch");
  ++state.t;
  const double c1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * grad[i];
    state.v[i] = hp.beta2 * state.v[i] + (1.0 - hp.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= hp.lr * mhat / (std::sqrt(vhat) + hp.eps);
  }
}

struct TrainConfig {
  double h = 0.01;        // integrator step
  int steps_per_pair = 1; // K; K * h must equal the dataset interval
  int epochs = 1500;
  AdamParams adam;
  std::uint64_t seed = 1;
  int width = 16;
  int summands = 4;
  ActivationKind kind = ActivationKind::pade();

  void validate(double interval) const {
    if (steps_per_pair < 1) throw std::invalid_argument("K must be at least 1");
    if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("train step must satisfy 0 < h < 1");
    if (std::fabs(steps_per_pair * h - interval) > 1e-12)
      throw std::invalid_argument("K * h must equal the dataset observation interval");
    if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  }
};

// K pseudo-symplectic steps of the learned field from y0.
template <class T>
std::vector<T> predict_pair(const GradientNet& net, std::span<const T> theta,
                            std::span<const T> y0, double h, int k_steps) {
  if (k_steps < 1) throw std::invalid_argument("K must be at least 1");
  auto field = [&](std::span<const T> y) { return hynet_field(net, theta, y); };
  std::vector<T> y(y0.begin(), y0.end());
  for (int k = 0; k < k_steps; ++k) y = ps_rk_step<T>(field, std::span<const T>(y), h);
  return y;
}

inline std::vector<double> predict_pair(const GradientNet& net, std::span<const double> y0,
                                        double h, int k_steps) {
  return predict_pair<double>(net, net.theta, y0, h, k_steps);
}

// Mean squared prediction error over the dataset.
inline double loss(const GradientNet& net, const Dataset& data, double h, int k_steps) {
  if (data.size() == 0) throw std::invalid_argument("loss of an empty dataset");
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::vector<double> yhat = predict_pair(net, data.y0[i], h, k_steps);
    double s = 0.0;
    for (std::size_t k = 0; k < yhat.size(); ++k) {
      const double d = yhat[k] - data.y1[i][k];
      s += d * d;
    }
    acc += s;
  }
  return acc / static_cast<double>(data.size());
}

// Exact reverse-mode gradient of the loss with respect to every learnable
// parameter. Per-sample tapes are recorded and swept in dataset order; the
// summation order is fixed, so results are bit-reproducible.
inline std::vector<double> loss_gradient(const GradientNet& net, const Dataset& data, double h,
                                         int k_steps, double* loss_out = nullptr) {
  if (data.size() == 0) throw std::invalid_argument("loss_gradient of an empty dataset");
  std::vector<double> grad(net.param_count(), 0.0);
  std::vector<double> adjoint;
  Tape tape;
  double loss_acc = 0.0;
  const double cot[1] = {1.0};

  for (std::size_t i = 0; i < data.size(); ++i) {
    auto sample_loss = [&](std::span<const Rev> theta) {
      Tape* tp = theta.empty() ? nullptr : theta[0].tape();
      std::vector<Rev> y0(data.dim());
      for (int k = 0; k < data.dim(); ++k) y0[k] = tp->constant(data.y0[i][k]);
      std::vector<Rev> yhat =
          predict_pair<Rev>(net, theta, std::span<const Rev>(y0), h, k_steps);
      Rev s = 0.0;
      for (std::size_t k = 0; k < yhat.size(); ++k) {
        const Rev d = yhat[k] - data.y1[i][k];
        s = s + d * d;
      }
      return std::vector<Rev>{s};
    };
    record_into(tape, sample_loss, net.theta);
    loss_acc += tape.output_values()[0];
    backward_into(tape, cot, adjoint, grad);
  }

  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (double& g : grad) g *= inv_n;
  if (loss_out) *loss_out = loss_acc * inv_n;
  return grad;
}

struct TrainResult {
  GradientNet net;
  std::vector<double> history;  // loss before the update of each epoch
};

// Full-batch loop: per epoch, one gradient over the whole dataset and one
// Adam update. Aborts on a non-finite loss. Deterministic given the seed.
inline TrainResult train(const Dataset& data, const TrainConfig& config) {
  config.validate(data.meta.interval);
  TrainResult result;
  result.net = init_network(data.half_dim, config.width, config.summands, config.kind,
                            config.seed);
  AdamState state(result.net.param_count());

  double last_finite = std::numeric_limits<double>::quiet_NaN();
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    double l = 0.0;
    std::vector<double> grad =
        loss_gradient(result.net, data, config.h, config.steps_per_pair, &l);
    if (!std::isfinite(l))
      throw TrainingDiverged("loss became non-finite at epoch " + std::to_string(epoch),
                             epoch, last_finite);
    last_finite = l;
    result.history.push_back(l);
    adam_step(state, result.net.theta, grad, config.adam);
  }
  return result;
}

}  // namespace psym
