#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "psym/ad.hpp"

namespace psym {

enum class ActivationType { Pade, Taylor, Pau, Relu };

inline std::string to_string(ActivationType t) {
  switch (t) {
    case ActivationType::Pade: return "pade";
    case ActivationType::Taylor: return "taylor";
    case ActivationType::Pau: return "pau";
    case ActivationType::Relu: return "relu";
  }
  throw std::logic_error("unreachable");
}

inline ActivationType activation_type_from_string(const std::string& s) {
  if (s == "pade") return ActivationType::Pade;
  if (s == "taylor") return ActivationType::Taylor;
  if (s == "pau") return ActivationType::Pau;
  if (s == "relu") return ActivationType::Relu;
  throw std::invalid_argument("unknown activation kind: " + s);
}

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }
inline double value_of(const Rev& x) { return x.value(); }

// Activation family used by the gradient network.
//
//   pade(L,M):  x -> (sum_j c_j x^j) / d_M(x), numerator learnable per
//               summand, d_M a fixed polynomial of degree M with no real
//               roots (default 2 + 2x + x^2)
//   taylor:     summand i uses x^i / i!
//   pau(m,n):   x -> (sum_j a_j x^j) / (1 + |sum_k b_k x^k|), all learnable
//   relu:       max(0, x)
struct ActivationKind {
  ActivationType type = ActivationType::Pade;
  int num_degree = 3;                     // L (pade) or m (pau)
  int den_degree = 2;                     // M (pade) or n (pau)
  std::vector<double> fixed_denominator;  // pade only, coefficients of d_M

  static ActivationKind pade(int L = 3, int M = 2, std::vector<double> denominator = {}) {
    if (L < 1 || M < 1) throw std::invalid_argument("pade degrees must be positive");
    if (L == M) throw std::invalid_argument("pade requires L != M");
    if (denominator.empty()) {
      if (M != 2)
        throw std::invalid_argument("a fixed denominator must be supplied when M != 2");
      denominator = {2.0, 2.0, 1.0};  // 2 + 2x + x^2, discriminant 4 - 8 < 0
    }
    if (denominator.size() != static_cast<std::size_t>(M + 1) || denominator.back() == 0.0)
      throw std::invalid_argument("denominator must have degree M");
    if (M == 2) {
      const double disc = denominator[1] * denominator[1] - 4.0 * denominator[2] * denominator[0];
      if (disc >= 0.0) throw std::invalid_argument("denominator has real roots");
    } else {
      if (M % 2 != 0) throw std::invalid_argument("denominator degree must be even");
      // root-freeness is only spot-checked for custom high-degree denominators
      for (int k = -4000; k <= 4000; ++k) {
        const double x = k * 0.05;
        double v = 0.0;
        for (std::size_t j = denominator.size(); j-- > 0;) v = v * x + denominator[j];
        if (v == 0.0) throw std::invalid_argument("denominator has a real root");
      }
    }
    ActivationKind k;
    k.type = ActivationType::Pade;
    k.num_degree = L;
    k.den_degree = M;
    k.fixed_denominator = std::move(denominator);
    return k;
  }

  static ActivationKind taylor() {
    ActivationKind k;
    k.type = ActivationType::Taylor;
    k.num_degree = 0;
    k.den_degree = 0;
    return k;
  }

  static ActivationKind pau(int m = 5, int n = 4) {
    if (m < 1 || n < 1) throw std::invalid_argument("pau degrees must be positive");
    ActivationKind k;
    k.type = ActivationType::Pau;
    k.num_degree = m;
    k.den_degree = n;
    return k;
  }

  static ActivationKind relu() {
    ActivationKind k;
    k.type = ActivationType::Relu;
    k.num_degree = 0;
    k.den_degree = 0;
    return k;
  }

  // learnable activation parameters per summand
  int params_per_summand() const {
    switch (type) {
      case ActivationType::Pade: return num_degree + 1;
      case ActivationType::Pau: return num_degree + 1 + den_degree;
      default: return 0;
    }
  }
};

namespace detail {

// Horner evaluation of sum_j coeffs[j] x^j; coefficients may be doubles
// (fixed denominator) or T (learnable numerators).
template <class T, class C>
T polyval(std::span<const C> coeffs, const T& x) {
  if (coeffs.empty()) return T{};
  T v = [&] {
    if constexpr (std::is_same_v<C, T>) return coeffs.back();
    else return T{} + coeffs.back();
  }();
  for (std::size_t j = coeffs.size() - 1; j-- > 0;) v = v * x + coeffs[j];
  return v;
}

// Derivative of the polynomial above.
template <class T, class C>
T polyder(std::span<const C> coeffs, const T& x) {
  if (coeffs.size() < 2) return T{};
  T v = coeffs.back() * static_cast<double>(coeffs.size() - 1);
  for (std::size_t j = coeffs.size() - 1; j-- > 1;) v = v * x + coeffs[j] * static_cast<double>(j);
  return v;
}

// B(x) = sum_{k=1..n} b_k x^k with b[k-1] = b_k (no constant term).
template <class T>
T poly_noconst(std::span<const T> b, const T& x) {
  T v{};
  for (std::size_t k = b.size(); k-- > 0;) v = (v + b[k]) * x;
  return v;
}

template <class T>
T poly_noconst_derivative(std::span<const T> b, const T& x) {
  // B'(x) = sum_{k=1..n} k b_k x^{k-1}, Horner over c_j = (j+1) b[j]
  T v{};
  for (std::size_t k = b.size(); k-- > 0;) v = v * x + b[k] * static_cast<double>(k + 1);
  return v;
}

inline double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

template <class T>
T sign_of(const T& x) {
  const double v = value_of(x);
  return T{} + (v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
}

}  // namespace detail

// Value of the activation of summand `index` (1-based; only the Taylor
// family depends on it) with that summand's learnable parameters.
template <class T>
T activation_forward(const ActivationKind& kind, int index, std::span<const T> params,
                     const T& x) {
  switch (kind.type) {
    case ActivationType::Pade: {
      const T num = detail::polyval<T, T>(params, x);
      const T den =
          detail::polyval<T, double>(std::span<const double>(kind.fixed_denominator), x);
      return num / den;
    }
    case ActivationType::Taylor:
      return powi(x, index) / detail::factorial(index);
    case ActivationType::Pau: {
      const auto a = params.subspan(0, kind.num_degree + 1);
      const auto b = params.subspan(kind.num_degree + 1, kind.den_degree);
      const T num = detail::polyval<T, T>(a, x);
      const T den = 1.0 + abs(detail::poly_noconst(b, x));
      return num / den;
    }
    case ActivationType::Relu:
      return relu(x);
  }
  throw std::logic_error("unreachable");
}

// Analytic derivative with respect to x. Quotient rule for the rational
// families; abs and relu use the derivative-0-at-0 convention.
template <class T>
T activation_derivative(const ActivationKind& kind, int index, std::span<const T> params,
                        const T& x) {
  switch (kind.type) {
    case ActivationType::Pade: {
      const std::span<const double> dcoef(kind.fixed_denominator);
      const T num = detail::polyval<T, T>(params, x);
      const T nump = detail::polyder<T, T>(params, x);
      const T den = detail::polyval<T, double>(dcoef, x);
      const T denp = detail::polyder<T, double>(dcoef, x);
      return (nump * den - num * denp) / (den * den);
    }
    case ActivationType::Taylor:
      return index == 1 ? T{} + 1.0 : powi(x, index - 1) / detail::factorial(index - 1);
    case ActivationType::Pau: {
      const auto a = params.subspan(0, kind.num_degree + 1);
      const auto b = params.subspan(kind.num_degree + 1, kind.den_degree);
      const T num = detail::polyval<T, T>(a, x);
      const T nump = detail::polyder<T, T>(a, x);
      const T bx = detail::poly_noconst(b, x);
      const T bxp = detail::poly_noconst_derivative(b, x);
      const T den = 1.0 + abs(bx);
      return (nump * den - num * detail::sign_of(bx) * bxp) / (den * den);
    }
    case ActivationType::Relu:
      return value_of(x) > 0.0 ? T{} + 1.0 : T{};
  }
  throw std::logic_error("unreachable");
}

}  // namespace psym
