#ifndef REEBCONE_CHARACTERS_HPP
#define REEBCONE_CHARACTERS_HPP

// Laurent expansions at t = 0 of the index character
//   F(xi, t)   = sum_{u in sigma^v cap Z^n} exp(-t <xi,u>)
// and the weight character
//   C_eta(xi, t) = sum_{u in sigma^v cap Z^n} exp(-t <xi,u>) <eta,u>.
// For a toric cone every weight space R_u with u in sigma^v cap M is one
// dimensional, which is why these are plain lattice sums.
//
// sigma^v is split into half-open simplicial cones, so each lattice point is
// counted exactly once and no signed inclusion-exclusion is needed.

#include "reebcone/geometry.hpp"

#include <optional>

namespace reebcone::characters {

struct SimplicialPiece {
  std::vector<IntVec> generators;
  // Lattice points of the half-open parallelepiped sum lambda_k u_k with
  // 0 <= lambda_k < 1 on closed facets and 0 < lambda_k <= 1 on open ones.
  std::vector<IntVec> box_points;
  // open[k]: the facet opposite generators[k] is excluded.
  std::vector<bool> open;
  int sign = 1;
};

struct DecomposeOptions {
  std::size_t max_box_points = 1'000'000;
};

std::vector<SimplicialPiece> decompose_dual(const geometry::ToricCone& cone, const DecomposeOptions& opts = {});

/// Lattice points of a piece with <xi, u> <= bound, by direct expansion of
/// box point + nonnegative generator combinations. Test helper.
std::vector<IntVec> piece_points(const SimplicialPiece& piece, const Vec<Rational>& xi, const Rational& bound);

template <class T>
struct LaurentSeries {
  int order_low = 0;
  Vec<T> coeffs;  // coeffs[j] multiplies t^(order_low + j)

  T coefficient(int exponent) const {
    int j = exponent - order_low;
    if (j < 0 || j >= static_cast<int>(coeffs.size())) return T(0);
    return coeffs[static_cast<std::size_t>(j)];
  }
  int order_high() const { return order_low + static_cast<int>(coeffs.size()) - 1; }
  long double evaluate(long double t) const;
};

struct ExpansionOptions {
  int max_order = 4;
  unsigned threads = 1;
};

/// Coefficients of F through t^(-n+order).
template <class T>
LaurentSeries<T> index_character(const std::vector<SimplicialPiece>& pieces, const geometry::ReebVector<T>& xi,
                                 int order, const ExpansionOptions& opts = {});

/// Coefficients of C_eta through t^(-(n+1)+order). Built as
/// C_eta = -(1/t) d/de F(xi + e*eta, t) on the closed-form piece sums.
template <class T>
LaurentSeries<T> weight_character(const std::vector<SimplicialPiece>& pieces, const geometry::ReebVector<T>& xi,
                                  const Vec<T>& eta, int order, const ExpansionOptions& opts = {});

/// B_0..B_count-1 with B_1 = -1/2.
const Vec<Rational>& bernoulli_numbers(std::size_t count);

struct OracleResult {
  long double value = 0;
  long double tail_estimate = 0;
  long double cutoff = 0;
};

/// Direct lattice sum of F (eta empty) or C_eta over <xi,u> <= cutoff, done
/// column by column with closed-form geometric sums in the last coordinate.
/// Throws CutoffTooSmall when the estimated tail exceeds tol * |value|.
template <class T>
OracleResult truncated_character_oracle(const geometry::ToricCone& cone, const geometry::ReebVector<T>& xi,
                                        const std::optional<Vec<T>>& eta, double t, double cutoff,
                                        double tol = 1e-12);

/// Smallest power-of-two multiple of 1/t for which the tail estimate is
/// below tol (relative to the leading-order size of the sum).
template <class T>
double choose_cutoff(const geometry::ToricCone& cone, const geometry::ReebVector<T>& xi,
                     const std::optional<Vec<T>>& eta, double t, double tol = 1e-12);

}  // namespace reebcone::characters

#endif  // REEBCONE_CHARACTERS_HPP
