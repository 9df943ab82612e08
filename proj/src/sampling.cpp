#include "poissonkit/sampling.hpp"

#include "poissonkit/errors.hpp"

namespace poissonkit {

PointSampler::PointSampler(const Chart& chart, std::uint64_t seed,
                           std::optional<Predicate> extra_guard)
    : chart_(chart), extra_guard_(std::move(extra_guard)), rng_(seed) {
  if (extra_guard_ && extra_guard_->arity() != chart.dimension())
    throw ArgumentError("guard arity does not match chart dimension");
}

std::vector<Eigen::VectorXd> PointSampler::draw(std::size_t count) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  const std::size_t dim = chart_.dimension();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t budget = max_draws_per_point * std::max<std::size_t>(count, 1);
  std::size_t draws = 0;
  Eigen::VectorXd z(static_cast<Eigen::Index>(dim));
  while (out.size() < count) {
    if (draws++ >= budget)
      throw SamplingExhausted("guard rejected " + std::to_string(budget) + " candidate points while collecting " +
                              std::to_string(count));
    for (std::size_t i = 0; i < dim; ++i) {
      const Interval iv = chart_.box()[i];
      z[static_cast<Eigen::Index>(i)] = iv.lo + (iv.hi - iv.lo) * unit(rng_);
    }
    if (satisfies(chart_.guard(), z) && satisfies(extra_guard_, z)) out.push_back(z);
  }
  return out;
}

std::vector<Eigen::VectorXd> sample_points(const Chart& chart, std::size_t count, std::uint64_t seed,
                                           std::optional<Predicate> extra_guard) {
  PointSampler s(chart, seed, std::move(extra_guard));
  return s.draw(count);
}

}  // namespace poissonkit
