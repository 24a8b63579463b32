#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace psym {

// Small dense row-major matrix of doubles.
struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }
};

inline Mat transpose(const Mat& m) {
  Mat t(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) t.at(j, i) = m.at(i, j);
  return t;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dimensions differ");
  Mat c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) c.at(i, j) += aik * b.at(k, j);
    }
  return c;
}

inline double frobenius_norm(const Mat& m) {
  double s = 0.0;
  for (double x : m.data) s += x * x;
  return std::sqrt(s);
}

inline double max_abs(const Mat& m) {
  double s = 0.0;
  for (double x : m.data) s = std::max(s, std::fabs(x));
  return s;
}

template <class T>
T dot(std::span<const T> x, std::span<const T> y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: dimension mismatch");
  if (x.empty()) return T{};
  T s = x[0] * y[0];
  for (std::size_t i = 1; i < x.size(); ++i) s = s + x[i] * y[i];
  return s;
}

// y = A x with A given row-major (rows x cols).
template <class T>
std::vector<T> matvec(std::span<const T> a, std::size_t rows, std::size_t cols,
                      std::span<const T> x) {
  if (a.size() != rows * cols || x.size() != cols)
    throw std::invalid_argument("matvec: dimension mismatch");
  std::vector<T> y;
  y.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i)
    y.push_back(dot(a.subspan(i * cols, cols), x));
  return y;
}

// y = A^T x, same row-major A (rows x cols), x of length rows.
template <class T>
std::vector<T> matvec_transposed(std::span<const T> a, std::size_t rows, std::size_t cols,
                                 std::span<const T> x) {
  if (a.size() != rows * cols || x.size() != rows)
    throw std::invalid_argument("matvec_transposed: dimension mismatch");
  std::vector<T> y(cols, T{});
  for (std::size_t i = 0; i < rows; ++i) {
    const T& xi = x[i];
    for (std::size_t j = 0; j < cols; ++j) y[j] = y[j] + a[i * cols + j] * xi;
  }
  return y;
}

inline double norm2_squared(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

inline double max_norm_diff(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s = std::max(s, std::fabs(x[i] - y[i]));
  return s;
}

}  // namespace psym
