#pragma once

#include <cstddef>
#include <vector>

namespace srf {

/// Strictly increasing, finite sample times.
class TimeGrid {
 public:
  TimeGrid() = default;
  explicit TimeGrid(std::vector<double> times);

  static TimeGrid uniform(double first, double last, std::size_t intervals);

  std::size_t size() const { return times_.size(); }
  double operator[](std::size_t k) const { return times_[k]; }
  double front() const { return times_.front(); }
  double back() const { return times_.back(); }
  double span() const { return times_.back() - times_.front(); }
  const std::vector<double>& times() const { return times_; }

  // Index of the grid point equal to t up to tol; throws if there is none.
  std::size_t index_of(double t, double tol = 1e-12) const;

  // Largest k with times[k] <= t (clamped to the grid).
  std::size_t locate(double t) const;

 private:
  std::vector<double> times_;
};

}  // namespace srf
