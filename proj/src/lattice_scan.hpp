#ifndef REEBCONE_SRC_LATTICE_SCAN_HPP
#define REEBCONE_SRC_LATTICE_SCAN_HPP

// Box scan over the leading coordinates; the last coordinate's feasible
// range is solved from the constraints, so callers see whole columns.

#include "reebcone/numeric.hpp"

#include <cstdint>
#include <functional>

namespace reebcone::detail {

inline __int128 floor_div(__int128 a, __int128 b) {
  __int128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline __int128 ceil_div(__int128 a, __int128 b) { return -floor_div(-a, b); }

// Integer constraint <a, u> >= c.
struct IntConstraint {
  IntVec a;
  __int128 c = 0;
};

// Calls visit(prefix, lo, hi) for every prefix (first n-1 coordinates) in
// the box whose last-coordinate interval [lo, hi] is nonempty. The prefix
// vector has length n with the last entry unspecified.
inline void scan_columns(std::size_t n, const std::vector<IntConstraint>& constraints, const IntVec& box_lo,
                         const IntVec& box_hi,
                         const std::function<void(const IntVec&, std::int64_t, std::int64_t)>& visit) {
  IntVec u(n, 0);
  std::vector<__int128> partial(constraints.size(), 0);
  const std::size_t last = n - 1;

  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == last) {
      __int128 lo = box_lo[last], hi = box_hi[last];
      for (std::size_t r = 0; r < constraints.size(); ++r) {
        const __int128 a = constraints[r].a[last];
        const __int128 rhs = constraints[r].c - partial[r];
        if (a > 0) {
          lo = std::max(lo, ceil_div(rhs, a));
        } else if (a < 0) {
          hi = std::min(hi, floor_div(rhs, a));
        } else if (rhs > 0) {
          return;
        }
        if (lo > hi) return;
      }
      visit(u, static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi));
      return;
    }
    for (std::int64_t x = box_lo[k]; x <= box_hi[k]; ++x) {
      u[k] = x;
      for (std::size_t r = 0; r < constraints.size(); ++r)
        partial[r] += static_cast<__int128>(constraints[r].a[k]) * x;
      rec(k + 1);
      for (std::size_t r = 0; r < constraints.size(); ++r)
        partial[r] -= static_cast<__int128>(constraints[r].a[k]) * x;
    }
  };
  rec(0);
}

}  // namespace reebcone::detail

#endif  // REEBCONE_SRC_LATTICE_SCAN_HPP
