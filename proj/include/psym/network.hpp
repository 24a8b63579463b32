#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "psym/activations.hpp"
#include "psym/ad.hpp"
#include "psym/linalg.hpp"
#include "psym/rng.hpp"
#include "psym/systems.hpp"

namespace psym {

// Gradient network with structurally symmetric Jacobian:
//
//   g(y) = sum_i A_i^T s_i(A_i y) - sum_i B_i^T s_i(B_i y) + b
//
// where s_i is the (element-wise) activation of summand i, shared between
// the A and B branches. A_i and B_i are width x 2d, b has length 2d.
//
// Parameters are stored flat, in this order:
//   A_1 .. A_S (row-major), B_1 .. B_S (row-major), b,
//   then per-summand activation parameters.
struct GradientNet {
  int half_dim = 1;
  int width = 16;
  int summands = 4;
  ActivationKind kind = ActivationKind::pade();
  std::vector<double> theta;

  int dim() const { return 2 * half_dim; }
  std::size_t matrix_size() const { return static_cast<std::size_t>(width) * dim(); }
  std::size_t a_offset(int i) const { return static_cast<std::size_t>(i) * matrix_size(); }
  std::size_t b_offset(int i) const {
    return (static_cast<std::size_t>(summands) + i) * matrix_size();
  }
  std::size_t bias_offset() const { return 2 * static_cast<std::size_t>(summands) * matrix_size(); }
  std::size_t act_offset(int i) const {
    return bias_offset() + dim() + static_cast<std::size_t>(i) * kind.params_per_summand();
  }
  std::size_t param_count() const {
    return 2 * static_cast<std::size_t>(summands) * matrix_size() + dim() +
           static_cast<std::size_t>(summands) * kind.params_per_summand();
  }

  std::vector<double> forward(std::span<const double> y) const;
  std::vector<double> field(std::span<const double> y) const;
  Mat jacobian_y(std::span<const double> y) const;
};

// g(y) with parameters and state of the same scalar type T, so the forward
// pass can be recorded on a tape (T = Rev, theta as leaves) or propagated
// with tangents (T = Dual).
template <class T>
std::vector<T> hynet_forward(const GradientNet& net, std::span<const T> theta,
                             std::span<const T> y) {
  if (theta.size() != net.param_count()) throw std::invalid_argument("theta size mismatch");
  if (y.size() != static_cast<std::size_t>(net.dim()))
    throw std::invalid_argument("state dimension mismatch");

  const std::size_t l = net.width, n = net.dim();
  const int pps = net.kind.params_per_summand();

  std::vector<T> out(theta.subspan(net.bias_offset(), n).begin(),
                     theta.subspan(net.bias_offset(), n).end());
  std::vector<T> hidden(l);
  for (int i = 0; i < net.summands; ++i) {
    const auto act_params = theta.subspan(net.act_offset(i), pps);
    for (int branch = 0; branch < 2; ++branch) {
      const auto w = branch == 0 ? theta.subspan(net.a_offset(i), l * n)
                                 : theta.subspan(net.b_offset(i), l * n);
      std::vector<T> z = matvec(w, l, n, y);
      for (std::size_t r = 0; r < l; ++r)
        hidden[r] = activation_forward(net.kind, i + 1, act_params, z[r]);
      std::vector<T> back = matvec_transposed(w, l, n, std::span<const T>(hidden));
      for (std::size_t k = 0; k < n; ++k)
        out[k] = branch == 0 ? out[k] + back[k] : out[k] - back[k];
    }
  }
  return out;
}

// The induced vector field J^{-1} g(y) = (-g_q, g_p).
template <class T>
std::vector<T> hynet_field(const GradientNet& net, std::span<const T> theta,
                           std::span<const T> y) {
  std::vector<T> g = hynet_forward(net, theta, y);
  const int d = net.half_dim;
  std::vector<T> f(2 * d);
  for (int i = 0; i < d; ++i) {
    f[i] = -g[d + i];
    f[d + i] = g[i];
  }
  return f;
}

inline std::vector<double> GradientNet::forward(std::span<const double> y) const {
  return hynet_forward<double>(*this, theta, y);
}

inline std::vector<double> GradientNet::field(std::span<const double> y) const {
  return hynet_field<double>(*this, theta, y);
}

// Jacobian dg/dy = sum_i A_i^T diag(s_i'(A_i y)) A_i - (B terms), assembled
// from the analytic activation derivative. Symmetric by construction.
inline Mat GradientNet::jacobian_y(std::span<const double> y) const {
  if (y.size() != static_cast<std::size_t>(dim()))
    throw std::invalid_argument("state dimension mismatch");
  const std::size_t l = width, n = dim();
  const int pps = kind.params_per_summand();
  const std::span<const double> th(theta);

  Mat jac(n, n);
  for (int i = 0; i < summands; ++i) {
    const auto act_params = th.subspan(act_offset(i), pps);
    for (int branch = 0; branch < 2; ++branch) {
      const auto w = branch == 0 ? th.subspan(a_offset(i), l * n) : th.subspan(b_offset(i), l * n);
      const double sgn = branch == 0 ? 1.0 : -1.0;
      std::vector<double> z = matvec(w, l, n, y);
      for (std::size_t r = 0; r < l; ++r) {
        const double sp = activation_derivative(kind, i + 1, act_params, z[r]);
        if (sp == 0.0) continue;
        const auto row = w.subspan(r * n, n);
        // accumulate the upper triangle only; mirroring below keeps the
        // matrix symmetric to the last bit
        for (std::size_t p = 0; p < n; ++p) {
          const double wrp = sgn * sp * row[p];
          if (wrp == 0.0) continue;
          for (std::size_t q = p; q < n; ++q) jac.at(p, q) += wrp * row[q];
        }
      }
    }
  }
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) jac.at(q, p) = jac.at(p, q);
  return jac;
}

// Weights A_i, B_i ~ N(0, sqrt(2/(2 l d))), bias ~ N(0, 1), learnable
// activation parameters start at zero. Draw order matches the flat layout,
// so a seed pins the network bit for bit.
inline GradientNet init_network(int half_dim, int width, int summands,
                                const ActivationKind& kind, std::uint64_t seed) {
  if (half_dim < 1 || width < 1 || summands < 1)
    throw std::invalid_argument("init_network: dimensions must be positive");
  GradientNet net;
  net.half_dim = half_dim;
  net.width = width;
  net.summands = summands;
  net.kind = kind;
  net.theta.assign(net.param_count(), 0.0);

  RandomStream rng(seed);
  const double sigma = std::sqrt(2.0 / (2.0 * width * half_dim));
  const std::size_t weight_count = 2 * static_cast<std::size_t>(summands) * net.matrix_size();
  for (std::size_t k = 0; k < weight_count; ++k) net.theta[k] = rng.normal(sigma);
  for (int k = 0; k < net.dim(); ++k) net.theta[net.bias_offset() + k] = rng.normal();
  return net;
}

}  // namespace psym
