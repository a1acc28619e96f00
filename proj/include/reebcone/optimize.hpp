#ifndef REEBCONE_OPTIMIZE_HPP
#define REEBCONE_OPTIMIZE_HPP

// Minimization of a0(xi) = n vol(Q_xi) over the slice {<xi, l> = 1} of the
// Reeb cone. With dual rays u_j and the fixed triangulation of sigma^v,
//
//   vol(Q_xi) = (1/n!) sum_s |det U_s| prod_{j in s} 1 / <xi, u_j>,
//
// so value, gradient and Hessian are all closed-form rational functions of
// xi. The vertex set of Q_xi never changes inside the Reeb cone, so there
// are no chamber walls to cross.

#include "reebcone/geometry.hpp"
#include "reebcone/linalg.hpp"

#include <optional>

namespace reebcone::optimize {

// Affine chart xi = origin + sum_k y_k * basis[k] of the slice <xi, l> = 1.
// basis[k] = e_k' - (l_k' / l_p) e_p over the coordinates k' != p, where p is
// the pivot coordinate, so y is read off directly from xi.
struct SliceChart {
  Vec<Rational> origin;
  std::vector<Vec<Rational>> basis;
  std::size_t pivot = 0;
};

/// Chart centred at sum_i v_i rescaled onto the slice.
SliceChart make_chart(const geometry::ToricCone& cone, const geometry::GorensteinVector& l);

template <class T>
Vec<T> chart_point(const SliceChart& chart, const Vec<T>& y);

template <class T>
Vec<T> chart_coords(const SliceChart& chart, const Vec<T>& xi);

template <class T>
struct Objective {
  T value;  // a0 = n vol(Q_xi)
  Vec<T> gradient;
  linalg::Matrix<T> hessian;
};

/// Throws LeftReebCone when the chart point is not interior to sigma.
template <class T>
Objective<T> volume_objective(const geometry::ToricCone& cone, const SliceChart& chart, const Vec<T>& y);

struct RationalCandidate {
  Vec<Rational> xi;
  std::int64_t denominator_bound = 0;
  std::int64_t denominator = 0;
  Real distance;  // max |xi_k - p_k / q|
};

struct MinimizeOptions {
  double tol = 1e-10;
  int max_iter = 200;
  // Start point in the Reeb cone (rescaled onto the slice); default is the chart origin.
  std::optional<Vec<Rational>> start;
  // When positive, attach a rationality probe with this denominator bound.
  std::int64_t probe_denominator = 0;
};

struct MinimizeResult {
  geometry::ReebVector<Real> xi_star;
  Real a0_star;
  Real vol_star;
  Real gradient_norm;
  Real step_norm;
  int iterations = 0;
  Real kss_residual;
  Real delta_star;
  Real margin;  // min_j <xi*, u_j>
  std::optional<RationalCandidate> rational_candidate;
};

/// Damped Newton with backtracking kept inside int(sigma). Throws
/// NotQGorenstein, MaxIterations, NonConvergent.
MinimizeResult minimize_volume(const geometry::ToricCone& cone, const MinimizeOptions& opts = {});

struct GridResult {
  Vec<Real> xi;
  Vec<Real> y;
  Real value;
  Vec<Real> spacing;  // per chart axis
  std::size_t samples = 0;
};

/// Minimum of a0 over a cell-centred grid of at most `resolution` points
/// covering the slice polytope conv(v_i / <v_i, l>).
GridResult grid_search_oracle(const geometry::ToricCone& cone, std::size_t resolution, unsigned threads = 1);

/// Best simultaneous approximation p / q with q <= max_denominator.
std::optional<RationalCandidate> rationality_probe(const Vec<Real>& xi, std::int64_t max_denominator);

}  // namespace reebcone::optimize

#endif  // REEBCONE_OPTIMIZE_HPP
