#pragma once

#include <cstddef>

namespace ocimix::linalg {

// Dense kernels backing the network forward/backward passes. The default
// entry points are OpenMP-parallel over independent output rows; each output
// element is produced by the same fixed-order serial summation in every
// version, so the parallel kernels are bit-identical to the serial references
// below for any thread count.

// y[m x n] = x[m x k] * w[n x k]^T, plus bias[n] per row when bias != nullptr.
void linear_forward(const double* x, const double* w, const double* bias,
                    double* y, std::size_t m, std::size_t n, std::size_t k);

// In-place max(0, x) over n entries.
void relu(double* x, std::size_t n);

// delta[i] = 0 wherever activated[i] <= 0 (post-activation mask).
void relu_backward(const double* activated, double* delta, std::size_t n);

// Row-wise softmax in place, max-subtracted for stability.
void softmax_rows(double* x, std::size_t rows, std::size_t cols);

// grad_w[n x k] = delta[m x n]^T * x[m x k].
void matmul_tn(const double* delta, const double* x, double* grad_w,
               std::size_t m, std::size_t n, std::size_t k);

// dx[m x k] = delta[m x n] * w[n x k].
void matmul_nn(const double* delta, const double* w, double* dx,
               std::size_t m, std::size_t n, std::size_t k);

// grad_b[n] = column sums of delta[m x n].
void bias_grad(const double* delta, double* grad_b, std::size_t m, std::size_t n);

// Serial reference implementations, kept for equivalence tests and the
// kernel benchmark.
namespace serial {

void linear_forward(const double* x, const double* w, const double* bias,
                    double* y, std::size_t m, std::size_t n, std::size_t k);
void relu(double* x, std::size_t n);
void relu_backward(const double* activated, double* delta, std::size_t n);
void softmax_rows(double* x, std::size_t rows, std::size_t cols);
void matmul_tn(const double* delta, const double* x, double* grad_w,
               std::size_t m, std::size_t n, std::size_t k);
void matmul_nn(const double* delta, const double* w, double* dx,
               std::size_t m, std::size_t n, std::size_t k);
void bias_grad(const double* delta, double* grad_b, std::size_t m, std::size_t n);

}  // namespace serial

}  // namespace ocimix::linalg
