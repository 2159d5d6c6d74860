// Kernel benchmark: OpenMP versions against the serial references, with a
// bitwise equality check on every output.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ocimix/linalg.hpp"

using ocimix::linalg::serial::linear_forward;
namespace par = ocimix::linalg;

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

template <typename Fn>
double time_ms(std::size_t reps, Fn&& fn) {
  fn();  // warm-up
  const double t0 = now_ms();
  for (std::size_t r = 0; r < reps; ++r) fn();
  return (now_ms() - t0) / static_cast<double>(reps);
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t m = 512, n = 512, k = 512, reps = 20;
  if (argc > 1) m = n = k = static_cast<std::size_t>(std::atol(argv[1]));
  if (argc > 2) reps = static_cast<std::size_t>(std::atol(argv[2]));

#ifdef _OPENMP
  std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
  std::printf("openmp: disabled (serial build)\n");
#endif
  std::printf("shape: m=%zu n=%zu k=%zu, reps=%zu\n\n", m, n, k, reps);

  std::mt19937_64 rng(7);
  const auto x = random_vec(m * k, rng);
  const auto w = random_vec(n * k, rng);
  const auto bias = random_vec(n, rng);
  const auto delta = random_vec(m * n, rng);
  std::vector<double> out_s(m * n), out_p(m * n);
  std::vector<double> gw_s(n * k), gw_p(n * k);
  std::vector<double> dx_s(m * k), dx_p(m * k);

  int failures = 0;
  auto report = [&](const char* name, double serial_ms, double parallel_ms, bool equal) {
    std::printf("%-16s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   %s\n", name,
                serial_ms, parallel_ms, serial_ms / parallel_ms,
                equal ? "bitwise-equal" : "MISMATCH");
    if (!equal) ++failures;
  };

  report("linear_forward",
         time_ms(reps, [&] {
           ocimix::linalg::serial::linear_forward(x.data(), w.data(), bias.data(),
                                                  out_s.data(), m, n, k);
         }),
         time_ms(reps, [&] {
           par::linear_forward(x.data(), w.data(), bias.data(), out_p.data(), m, n, k);
         }),
         bitwise_equal(out_s, out_p));

  report("softmax_rows",
         time_ms(reps, [&] {
           out_s = delta;
           ocimix::linalg::serial::softmax_rows(out_s.data(), m, n);
         }),
         time_ms(reps, [&] {
           out_p = delta;
           par::softmax_rows(out_p.data(), m, n);
         }),
         bitwise_equal(out_s, out_p));

  report("matmul_tn",
         time_ms(reps, [&] {
           ocimix::linalg::serial::matmul_tn(delta.data(), x.data(), gw_s.data(), m, n, k);
         }),
         time_ms(reps, [&] { par::matmul_tn(delta.data(), x.data(), gw_p.data(), m, n, k); }),
         bitwise_equal(gw_s, gw_p));

  report("matmul_nn",
         time_ms(reps, [&] {
           ocimix::linalg::serial::matmul_nn(delta.data(), w.data(), dx_s.data(), m, n, k);
         }),
         time_ms(reps, [&] { par::matmul_nn(delta.data(), w.data(), dx_p.data(), m, n, k); }),
         bitwise_equal(dx_s, dx_p));

  if (failures > 0) {
    std::printf("\n%d kernel(s) diverged from the serial reference\n", failures);
    return 1;
  }
  return 0;
}
