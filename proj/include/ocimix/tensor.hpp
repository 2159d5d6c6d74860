#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ocimix {

// Dense row-major tensor of doubles. Shape is a list of extents; data length
// always equals the product of the extents.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s, double fill = 0.0);
  static Tensor from(std::vector<std::size_t> s, std::vector<double> values);

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  // 2-D accessors; only valid when shape.size() == 2.
  std::size_t rows() const;
  std::size_t cols() const;
  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
};

std::size_t shape_product(const std::vector<std::size_t>& shape);

bool same_shape(const Tensor& a, const Tensor& b);

// Throws std::runtime_error naming `what` if any entry is NaN or infinite.
void check_finite(const Tensor& t, const std::string& what);

}  // namespace ocimix
