#pragma once

// Deterministic random-instance generators shared by the property tests.

#include <vector>

#include "saaf/rng.hpp"
#include "saaf/saaf.hpp"

namespace generators {

inline saaf::BreakGrid random_grid(saaf::Rng& rng, int max_segments = 30) {
  const int n = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(max_segments)));
  const double lo = rng.uniform(-3.0, 0.5);
  const double width = rng.uniform(0.5, 4.0);
  return saaf::BreakGrid::uniform(n, lo, lo + width);
}

inline saaf::Saaf random_saaf(saaf::Rng& rng, int degree, int max_segments = 30) {
  saaf::BreakGrid grid = random_grid(rng, max_segments);
  std::vector<double> w(static_cast<std::size_t>(grid.segments()));
  for (double& x : w) x = rng.uniform(-3.0, 3.0);
  std::vector<double> v(static_cast<std::size_t>(degree));
  for (double& x : v) x = rng.uniform(-3.0, 3.0);
  return saaf::Saaf(degree, std::move(grid), std::move(w), std::move(v));
}

}  // namespace generators
