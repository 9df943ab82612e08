#pragma once

#include "poissonkit/poisson.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace poissonkit {

/// Uniform rejection sampler over a chart's box, honouring the chart guard
/// and an optional extra guard. Deterministic for a given seed.
class PointSampler {
 public:
  PointSampler(const Chart& chart, std::uint64_t seed,
               std::optional<Predicate> extra_guard = std::nullopt);

  /// Draws `count` admissible points. Throws SamplingExhausted when more than
  /// max_draws_per_point * count candidates are rejected.
  std::vector<Eigen::VectorXd> draw(std::size_t count);

  std::size_t max_draws_per_point = 1000;

 private:
  const Chart& chart_;
  std::optional<Predicate> extra_guard_;
  std::mt19937_64 rng_;
};

std::vector<Eigen::VectorXd> sample_points(const Chart& chart, std::size_t count,
                                           std::uint64_t seed,
                                           std::optional<Predicate> extra_guard = std::nullopt);

}  // namespace poissonkit
