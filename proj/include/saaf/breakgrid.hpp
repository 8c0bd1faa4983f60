#pragma once

#include <span>
#include <vector>

namespace saaf {

// Default break-point layout: 22 segments spanning [-1.1, 1.1].
inline constexpr int kDefaultSegments = 22;
inline constexpr double kDefaultGridLo = -1.1;
inline constexpr double kDefaultGridHi = 1.1;

/// Strictly ascending break points a_0 < a_1 < ... < a_n delimiting the n
/// half-open segments [a_k, a_{k+1}) of a piecewise polynomial.
class BreakGrid {
 public:
  /// Takes ownership of the break list. Throws UsageError unless the list has
  /// at least two strictly ascending finite entries.
  explicit BreakGrid(std::vector<double> breaks);

  /// n_segments+1 evenly spaced breaks from lo to hi inclusive.
  static BreakGrid uniform(int n_segments, double lo, double hi);

  int segments() const { return static_cast<int>(breaks_.size()) - 1; }
  double lower() const { return breaks_.front(); }
  double upper() const { return breaks_.back(); }
  std::span<const double> breaks() const { return breaks_; }
  double break_at(int i) const { return breaks_[static_cast<std::size_t>(i)]; }

  /// Index k of the segment with a_k <= x < a_{k+1}, or -1 left of the grid
  /// and segments() at or right of the last break. Half-open on the right, so
  /// a break point belongs to the segment it starts.
  int locate(double x) const;

  bool operator==(const BreakGrid& other) const = default;

 private:
  std::vector<double> breaks_;
};

}  // namespace saaf
