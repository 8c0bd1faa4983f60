#include "saaf/breakgrid.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "saaf/errors.hpp"

namespace saaf {

BreakGrid::BreakGrid(std::vector<double> breaks) : breaks_(std::move(breaks)) {
  if (breaks_.size() < 2) {
    throw UsageError("BreakGrid needs at least two break points");
  }
  for (std::size_t i = 0; i < breaks_.size(); ++i) {
    if (!std::isfinite(breaks_[i])) {
      throw UsageError("BreakGrid break points must be finite");
    }
    if (i > 0 && !(breaks_[i - 1] < breaks_[i])) {
      throw UsageError("BreakGrid break points must be strictly ascending at index " +
                       std::to_string(i));
    }
  }
}

BreakGrid BreakGrid::uniform(int n_segments, double lo, double hi) {
  if (n_segments < 1) {
    throw UsageError("uniform grid needs at least one segment");
  }
  if (!(lo < hi)) {
    throw UsageError("uniform grid needs lo < hi");
  }
  std::vector<double> breaks(static_cast<std::size_t>(n_segments) + 1);
  const double span = hi - lo;
  for (int i = 0; i <= n_segments; ++i) {
    breaks[static_cast<std::size_t>(i)] =
        lo + span * (static_cast<double>(i) / static_cast<double>(n_segments));
  }
  breaks.front() = lo;
  breaks.back() = hi;  // guard against round-off at the endpoints
  return BreakGrid(std::move(breaks));
}

int BreakGrid::locate(double x) const {
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
  return static_cast<int>(it - breaks_.begin()) - 1;
}

}  // namespace saaf
