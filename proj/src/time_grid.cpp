#include "srf/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "srf/error.hpp"

namespace srf {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.empty()) throw InvalidInput("time grid is empty");
  for (std::size_t k = 0; k < times_.size(); ++k) {
    if (!std::isfinite(times_[k])) throw InvalidInput("time grid has a non-finite entry");
    if (k > 0 && !(times_[k] > times_[k - 1]))
      throw InvalidInput("time grid is not strictly increasing at index " + std::to_string(k));
  }
}

TimeGrid TimeGrid::uniform(double first, double last, std::size_t intervals) {
  if (intervals == 0) return TimeGrid({first});
  std::vector<double> t(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k)
    t[k] = first + (last - first) * static_cast<double>(k) / static_cast<double>(intervals);
  t.back() = last;
  return TimeGrid(std::move(t));
}

std::size_t TimeGrid::index_of(double t, double tol) const {
  for (std::size_t k = 0; k < times_.size(); ++k)
    if (std::abs(times_[k] - t) <= tol) return k;
  throw InvalidInput("time " + std::to_string(t) + " is not a grid point");
}

std::size_t TimeGrid::locate(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return 0;
  return static_cast<std::size_t>(std::distance(times_.begin(), it)) - 1;
}

}  // namespace srf
