#include "reebcone/stability.hpp"

#include <algorithm>

namespace reebcone::stability {

using geometry::GorensteinVector;
using geometry::ReebVector;
using geometry::ToricCone;

template <class T>
ToricValuation<T>::ToricValuation(const ToricCone& cone, Vec<T> v) : v_(std::move(v)) {
  if (std::all_of(v_.begin(), v_.end(), [](const T& x) { return x == 0; })) {
    throw Error(ErrorCode::InvalidArgument, "valuation vector must be nonzero");
  }
  if (!geometry::in_sigma(cone, v_, &interior_)) {
    throw Error(ErrorCode::InvalidArgument, "valuation vector must lie in the cone");
  }
}

template <class T>
T log_discrepancy(const GorensteinVector& l, const Vec<T>& v) {
  return dot(v, l.l);
}

template <class T>
SValues<T> s_value(const ToricCone& cone, const ReebVector<T>& xi, const GorensteinVector& l,
                   const ToricValuation<T>& v) {
  auto slice = geometry::polytope_q(cone, xi);
  return SValues<T>{dot(v.v(), slice.bary_Q), xi.pairing(l) * dot(v.v(), slice.bary_P)};
}

Rational s_m_oracle(const ToricCone& cone, const ReebVector<Rational>& xi, const Vec<Rational>& v, std::int64_t m) {
  auto points = geometry::lattice_points(cone, xi, m);
  // Sum coordinates first; <v, sum u> needs one rational dot product.
  std::vector<__int128> total(cone.dim(), 0);
  for (const auto& u : points)
    for (std::size_t k = 0; k < u.size(); ++k) total[k] += u[k];
  Vec<Rational> sum_u;
  for (auto x : total) {
    const bool neg = x < 0;
    unsigned __int128 mag = neg ? -static_cast<unsigned __int128>(x) : static_cast<unsigned __int128>(x);
    Integer z = Integer(static_cast<std::uint64_t>(mag >> 64)) << 64;
    z += Integer(static_cast<std::uint64_t>(mag));
    sum_u.emplace_back(neg ? Integer(-z) : z);
  }
  return dot(v, sum_u) / (Rational(m) * Rational(static_cast<long>(points.size())));
}

Rational s_m_oracle(const ToricCone&, const ReebVector<Real>&, const Vec<Rational>&, std::int64_t) {
  throw Error(ErrorCode::IrrationalReeb, "S_m requires a rational Reeb vector");
}

template <class T>
StabilityReport<T> delta(const ToricCone& cone, const ReebVector<T>& xi, const GorensteinVector& l,
                         const DeltaOptions& opts) {
  if (!l.boundary_coeffs.empty() && !opts.experimental_boundary) {
    throw Error(ErrorCode::BoundaryRequiresExperimental,
                "delta with boundary coefficients requires the experimental flag");
  }
  const std::size_t n = cone.dim();
  const auto& rays = cone.rays();
  StabilityReport<T> r;
  r.gorenstein = l.l;
  r.rescale = xi.pairing(l);

  // Definitional form at the caller's xi.
  auto raw = geometry::polytope_q(cone, xi);
  T best_ratio;
  for (std::size_t i = 0; i < rays.size(); ++i) {
    T ratio = log_discrepancy(l, to_field<T>(rays[i])) / dot(raw.bary_Q, rays[i]);
    if (i == 0 || ratio < best_ratio) best_ratio = ratio;
  }
  r.delta_definitional = T(static_cast<long>(n)) / (T(static_cast<long>(n + 1)) * r.rescale) * best_ratio;

  auto normalized = xi.normalized_by(l);
  r.xi_normalized = normalized.xi();
  auto slice = geometry::polytope_q(cone, normalized);
  r.bary_P = slice.bary_P;
  r.bary_Q = slice.bary_Q;

  Vec<T> ratios;
  for (std::size_t i = 0; i < rays.size(); ++i) {
    T pairing = dot(r.bary_P, rays[i]);
    r.ray_pairings.push_back(pairing);
    T a = l.boundary_coeffs.empty() ? T(1) : T(1 - l.boundary_coeffs[i]);
    ratios.push_back(a / pairing);
  }
  r.delta = *std::min_element(ratios.begin(), ratios.end());
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (sign_of(T(ratios[i] - r.delta), r.delta) == 0) r.minimizing_rays.push_back(i);
  }
  r.delta_prime = r.delta < 1 ? r.delta : T(1);

  r.residual = T(0);
  for (std::size_t k = 0; k < n; ++k) {
    T d = abs_of(T(r.bary_P[k] - T(l.l[k])));
    if (d > r.residual) r.residual = d;
  }
  if constexpr (is_exact_v<T>) {
    r.kss = r.residual == 0;
  } else {
    Rational lmax = max_abs(l.l);
    r.kss = r.residual <= T(opts.kss_tolerance) * (T(1) + T(lmax));
  }
  return r;
}

template <class T>
StabilityReport<T> delta(const ToricCone& cone, const ReebVector<T>& xi, const DeltaOptions& opts) {
  return delta(cone, xi, geometry::gorenstein_vector(cone), opts);
}

namespace {
template <class T>
T factorial(std::size_t k) {
  T f(1);
  for (std::size_t i = 2; i <= k; ++i) f *= T(static_cast<long>(i));
  return f;
}
}  // namespace

template <class T>
IndexCoefficients<T> index_coefficients(const characters::LaurentSeries<T>& index, std::size_t n) {
  const int ni = static_cast<int>(n);
  if (n < 1 || index.order_low != -ni || index.coeffs.empty()) {
    throw Error(ErrorCode::InvalidArgument, "not an index character of this dimension");
  }
  IndexCoefficients<T> c;
  c.a0 = index.coefficient(-ni) / factorial<T>(n - 1);
  if (n >= 2 && index.coeffs.size() >= 2) c.a1 = index.coefficient(-ni + 1) / factorial<T>(n - 2);
  return c;
}

template <class T>
CharacterCoefficients<T> coefficients(const characters::LaurentSeries<T>& index,
                                      const characters::LaurentSeries<T>& weight, std::size_t n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "a1 and b1 need dimension at least 2");
  const int ni = static_cast<int>(n);
  if (index.order_low != -ni || weight.order_low != -ni - 1 || index.coeffs.size() < 2 || weight.coeffs.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "characters must be expanded to order >= 1");
  }
  auto fact = [](std::size_t k) {
    T f(1);
    for (std::size_t i = 2; i <= k; ++i) f *= T(static_cast<long>(i));
    return f;
  };
  CharacterCoefficients<T> c;
  c.a0 = index.coefficient(-ni) / fact(n - 1);
  c.a1 = index.coefficient(-ni + 1) / fact(n - 2);
  c.b0 = weight.coefficient(-ni - 1) / fact(n);
  c.b1 = weight.coefficient(-ni) / fact(n - 1);
  return c;
}

template <class T>
FutakiResult<T> futaki_product(const std::vector<characters::SimplicialPiece>& pieces, const ReebVector<T>& xi,
                               const Vec<T>& eta, const characters::ExpansionOptions& opts) {
  auto f = characters::index_character(pieces, xi, 1, opts);
  auto c = characters::weight_character(pieces, xi, eta, 1, opts);
  FutakiResult<T> out;
  out.coeffs = coefficients(f, c, xi.xi().size());
  const auto& k = out.coeffs;
  out.fut = T(-2) * (k.a0 * k.b1 - k.a1 * k.b0) / (k.a0 * k.a0);
  return out;
}

template <class T>
FutakiResult<T> futaki_product(const ToricCone& cone, const ReebVector<T>& xi, const Vec<T>& eta,
                               const characters::ExpansionOptions& opts) {
  return futaki_product(characters::decompose_dual(cone), xi, eta, opts);
}

template <class T>
std::vector<std::pair<T, T>> ratio_profile(const ToricCone& cone, const ReebVector<T>& xi, const GorensteinVector& l,
                                           const ToricValuation<T>& v, const Vec<T>& t_values) {
  const T a_xi = xi.pairing(l);
  const T a_v = log_discrepancy(l, v.v());
  const T s_prime = s_value(cone, xi, l, v).s_prime;
  std::vector<std::pair<T, T>> out;
  for (const auto& t : t_values) {
    if (t < 0) throw Error(ErrorCode::InvalidArgument, "ratio profile needs t >= 0");
    out.emplace_back(t, (a_v + t * a_xi) / (s_prime + t * a_xi));
  }
  return out;
}

#define REEBCONE_INSTANTIATE(T)                                                                                   \
  template class ToricValuation<T>;                                                                               \
  template T log_discrepancy(const GorensteinVector&, const Vec<T>&);                                             \
  template SValues<T> s_value(const ToricCone&, const ReebVector<T>&, const GorensteinVector&,                    \
                              const ToricValuation<T>&);                                                          \
  template StabilityReport<T> delta(const ToricCone&, const ReebVector<T>&, const GorensteinVector&,              \
                                    const DeltaOptions&);                                                         \
  template StabilityReport<T> delta(const ToricCone&, const ReebVector<T>&, const DeltaOptions&);                 \
  template IndexCoefficients<T> index_coefficients(const characters::LaurentSeries<T>&, std::size_t);            \
  template CharacterCoefficients<T> coefficients(const characters::LaurentSeries<T>&,                             \
                                                 const characters::LaurentSeries<T>&, std::size_t);               \
  template FutakiResult<T> futaki_product(const std::vector<characters::SimplicialPiece>&, const ReebVector<T>&, \
                                          const Vec<T>&, const characters::ExpansionOptions&);                    \
  template FutakiResult<T> futaki_product(const ToricCone&, const ReebVector<T>&, const Vec<T>&,                  \
                                          const characters::ExpansionOptions&);                                   \
  template std::vector<std::pair<T, T>> ratio_profile(const ToricCone&, const ReebVector<T>&,                     \
                                                      const GorensteinVector&, const ToricValuation<T>&,          \
                                                      const Vec<T>&);

REEBCONE_INSTANTIATE(Rational)
REEBCONE_INSTANTIATE(Real)

#undef REEBCONE_INSTANTIATE

}  // namespace reebcone::stability
