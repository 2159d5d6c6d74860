#include "ocimix/tensor.hpp"

#include <cmath>

namespace ocimix {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return shape.empty() ? 0 : n;
}

Tensor::Tensor(std::vector<std::size_t> s, double fill)
    : shape(std::move(s)), data(shape_product(shape), fill) {
  for (std::size_t d : shape) {
    if (d == 0) throw std::invalid_argument("Tensor: zero extent in shape");
  }
}

Tensor Tensor::from(std::vector<std::size_t> s, std::vector<double> values) {
  Tensor t;
  t.shape = std::move(s);
  t.data = std::move(values);
  if (shape_product(t.shape) != t.data.size()) {
    throw std::invalid_argument("Tensor::from: shape does not match data length");
  }
  return t;
}

std::size_t Tensor::rows() const {
  if (shape.size() != 2) throw std::logic_error("Tensor::rows: not a matrix");
  return shape[0];
}

std::size_t Tensor::cols() const {
  if (shape.size() != 2) throw std::logic_error("Tensor::cols: not a matrix");
  return shape[1];
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

void check_finite(const Tensor& t, const std::string& what) {
  for (double v : t.data) {
    if (!std::isfinite(v)) {
      throw std::runtime_error("non-finite value in " + what);
    }
  }
}

}  // namespace ocimix
