#pragma once

#include <cstddef>
#include <vector>

namespace poissonkit {

/// Dense structure constants of a k-dimensional Lie algebra,
/// [e_i, e_j] = sum_h c(h, i, j) e_h.
class StructureConstants {
 public:
  StructureConstants() = default;
  explicit StructureConstants(std::size_t k) : k_(k), c_(k * k * k, 0.0) {}

  /// From a nested array indexed c[h][i][j]. Throws ArgumentError on a ragged
  /// array.
  static StructureConstants from_nested(const std::vector<std::vector<std::vector<double>>>& c);

  std::size_t dimension() const { return k_; }

  double operator()(std::size_t h, std::size_t i, std::size_t j) const {
    return c_[(h * k_ + i) * k_ + j];
  }
  double& operator()(std::size_t h, std::size_t i, std::size_t j) {
    return c_[(h * k_ + i) * k_ + j];
  }

  /// Sets c(h,i,j) = v and c(h,j,i) = -v.
  void set_bracket(std::size_t h, std::size_t i, std::size_t j, double v);

  std::vector<std::vector<std::vector<double>>> nested() const;

 private:
  std::size_t k_ = 0;
  std::vector<double> c_;
};

}  // namespace poissonkit
