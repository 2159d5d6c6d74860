#include "ocimix/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace ocimix::linalg {

namespace {

inline void row_linear(const double* x, const double* w, const double* bias,
                       double* y, std::size_t n, std::size_t k) {
  for (std::size_t j = 0; j < n; ++j) {
    const double* wj = w + j * k;
    double sum = 0.0;
    for (std::size_t p = 0; p < k; ++p) sum += x[p] * wj[p];
    y[j] = bias ? sum + bias[j] : sum;
  }
}

inline void row_softmax(double* row, std::size_t cols) {
  double mx = row[0];
  for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, row[j]);
  double denom = 0.0;
  for (std::size_t j = 0; j < cols; ++j) {
    row[j] = std::exp(row[j] - mx);
    denom += row[j];
  }
  for (std::size_t j = 0; j < cols; ++j) row[j] /= denom;
}

}  // namespace

void linear_forward(const double* x, const double* w, const double* bias,
                    double* y, std::size_t m, std::size_t n, std::size_t k) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
    row_linear(x + i * k, w, bias, y + i * n, n, k);
  }
}

void relu(double* x, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    if (x[i] < 0.0) x[i] = 0.0;
  }
}

void relu_backward(const double* activated, double* delta, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    if (activated[i] <= 0.0) delta[i] = 0.0;
  }
}

void softmax_rows(double* x, std::size_t rows, std::size_t cols) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(rows); ++i) {
    row_softmax(x + i * cols, cols);
  }
}

void matmul_tn(const double* delta, const double* x, double* grad_w,
               std::size_t m, std::size_t n, std::size_t k) {
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < static_cast<std::int64_t>(n); ++j) {
    double* gw = grad_w + j * k;
    for (std::size_t p = 0; p < k; ++p) gw[p] = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = delta[i * n + j];
      const double* xi = x + i * k;
      for (std::size_t p = 0; p < k; ++p) gw[p] += d * xi[p];
    }
  }
}

void matmul_nn(const double* delta, const double* w, double* dx,
               std::size_t m, std::size_t n, std::size_t k) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
    double* dxi = dx + i * k;
    for (std::size_t p = 0; p < k; ++p) dxi[p] = 0.0;
    const double* di = delta + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = di[j];
      const double* wj = w + j * k;
      for (std::size_t p = 0; p < k; ++p) dxi[p] += d * wj[p];
    }
  }
}

void bias_grad(const double* delta, double* grad_b, std::size_t m, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < static_cast<std::int64_t>(n); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) sum += delta[i * n + j];
    grad_b[j] = sum;
  }
}

namespace serial {

void linear_forward(const double* x, const double* w, const double* bias,
                    double* y, std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) row_linear(x + i * k, w, bias, y + i * n, n, k);
}

void relu(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] < 0.0) x[i] = 0.0;
  }
}

void relu_backward(const double* activated, double* delta, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (activated[i] <= 0.0) delta[i] = 0.0;
  }
}

void softmax_rows(double* x, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) row_softmax(x + i * cols, cols);
}

void matmul_tn(const double* delta, const double* x, double* grad_w,
               std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t j = 0; j < n; ++j) {
    double* gw = grad_w + j * k;
    for (std::size_t p = 0; p < k; ++p) gw[p] = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = delta[i * n + j];
      const double* xi = x + i * k;
      for (std::size_t p = 0; p < k; ++p) gw[p] += d * xi[p];
    }
  }
}

void matmul_nn(const double* delta, const double* w, double* dx,
               std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    double* dxi = dx + i * k;
    for (std::size_t p = 0; p < k; ++p) dxi[p] = 0.0;
    const double* di = delta + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = di[j];
      const double* wj = w + j * k;
      for (std::size_t p = 0; p < k; ++p) dxi[p] += d * wj[p];
    }
  }
}

void bias_grad(const double* delta, double* grad_b, std::size_t m, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) sum += delta[i * n + j];
    grad_b[j] = sum;
  }
}

}  // namespace serial

}  // namespace ocimix::linalg
