#ifndef REEBCONE_STABILITY_HPP
#define REEBCONE_STABILITY_HPP

// Valuative invariants of a toric log Fano cone (X_sigma; xi).
//
// A torus-invariant valuation is a vector v in sigma; its log discrepancy is
// A(v) = <v, l> with l the Gorenstein vector. The expected vanishing order
// is S(v) = <v, bary(Q_xi)>, and S'(v) = A(xi) <v, bary(P_xi)>. After
// rescaling xi so that <xi, l> = 1,
//
//   delta = min_i 1 / <v_i, bary(P_xi)>  <= 1,
//
// with equality exactly when bary(P_xi) = l; that equality is the
// K-semistability certificate.

#include "reebcone/characters.hpp"
#include "reebcone/geometry.hpp"

#include <optional>
#include <utility>

namespace reebcone::stability {

template <class T>
class ToricValuation {
 public:
  /// Accepts any nonzero v in sigma. Interior vectors are flagged: they are
  /// centered at the vertex rather than on X_0.
  ToricValuation(const geometry::ToricCone& cone, Vec<T> v);

  const Vec<T>& v() const { return v_; }
  bool interior() const { return interior_; }

 private:
  Vec<T> v_;
  bool interior_ = false;
};

template <class T>
T log_discrepancy(const geometry::GorensteinVector& l, const Vec<T>& v);

template <class T>
struct SValues {
  T s;        // <v, bary_Q>
  T s_prime;  // A(xi) <v, bary_P>
};

template <class T>
SValues<T> s_value(const geometry::ToricCone& cone, const geometry::ReebVector<T>& xi,
                   const geometry::GorensteinVector& l, const ToricValuation<T>& v);

/// (1 / (m #(mQ cap M))) sum_{u in mQ cap M} <v, u>, exactly.
Rational s_m_oracle(const geometry::ToricCone& cone, const geometry::ReebVector<Rational>& xi,
                    const Vec<Rational>& v, std::int64_t m);
Rational s_m_oracle(const geometry::ToricCone& cone, const geometry::ReebVector<Real>& xi, const Vec<Rational>& v,
                    std::int64_t m);

template <class T>
struct StabilityReport {
  T delta;
  T delta_prime;
  // n / ((n+1) A(xi)) * min_i A(v_i) / S(v_i) at the caller's xi.
  T delta_definitional;
  T rescale;  // <xi, l> before normalization
  Vec<T> xi_normalized;
  Vec<T> bary_P;  // at the normalized xi
  Vec<T> bary_Q;
  Vec<Rational> gorenstein;
  Vec<T> ray_pairings;  // <v_i, bary_P>
  std::vector<std::size_t> minimizing_rays;
  bool kss = false;
  T residual;  // max |bary_P - l|
};

struct DeltaOptions {
  bool experimental_boundary = false;
  // Real xi: K-ss when residual <= kss_tolerance * (1 + max|l|).
  double kss_tolerance = 1e-9;
};

template <class T>
StabilityReport<T> delta(const geometry::ToricCone& cone, const geometry::ReebVector<T>& xi,
                         const geometry::GorensteinVector& l, const DeltaOptions& opts = {});

template <class T>
StabilityReport<T> delta(const geometry::ToricCone& cone, const geometry::ReebVector<T>& xi,
                         const DeltaOptions& opts = {});

template <class T>
struct CharacterCoefficients {
  T a0, a1, b0, b1;
};

/// a_i, b_i from the normalizations F = (n-1)! a0 t^-n + (n-2)! a1 t^-(n-1) + ...
/// and C = n! b0 t^-(n+1) + (n-1)! b1 t^-n + ... (requires n >= 2).
template <class T>
struct IndexCoefficients {
  T a0;
  std::optional<T> a1;  // present when n >= 2 and the series reaches order 1
};

template <class T>
IndexCoefficients<T> index_coefficients(const characters::LaurentSeries<T>& index, std::size_t n);

template <class T>
CharacterCoefficients<T> coefficients(const characters::LaurentSeries<T>& index,
                                      const characters::LaurentSeries<T>& weight, std::size_t n);

template <class T>
struct FutakiResult {
  CharacterCoefficients<T> coeffs;
  T fut;  // -2 (a0 b1 - a1 b0) / a0^2
};

template <class T>
FutakiResult<T> futaki_product(const std::vector<characters::SimplicialPiece>& pieces,
                               const geometry::ReebVector<T>& xi, const Vec<T>& eta,
                               const characters::ExpansionOptions& opts = {});

template <class T>
FutakiResult<T> futaki_product(const geometry::ToricCone& cone, const geometry::ReebVector<T>& xi,
                               const Vec<T>& eta, const characters::ExpansionOptions& opts = {});

/// f(t) = (A(v) + t A(xi)) / (S'(v) + t A(xi)) along w_t = v + t xi.
/// f is decreasing when S'(v) < A(v) and increasing when S'(v) > A(v).
template <class T>
std::vector<std::pair<T, T>> ratio_profile(const geometry::ToricCone& cone, const geometry::ReebVector<T>& xi,
                                           const geometry::GorensteinVector& l, const ToricValuation<T>& v,
                                           const Vec<T>& t_values);

}  // namespace reebcone::stability

#endif  // REEBCONE_STABILITY_HPP
