#include "reebcone/characters.hpp"

#include "lattice_scan.hpp"
#include "parallel.hpp"
#include "reebcone/linalg.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <mutex>

namespace reebcone::characters {

using geometry::ReebVector;
using geometry::ToricCone;

namespace {

// Sign of <w, q0 + eps*e_1 + eps^2*e_2 + ...> for infinitesimal eps.
int perturbed_sign(const std::vector<Integer>& w, const IntVec& q0) {
  Integer s = 0;
  for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * q0[k];
  if (s != 0) return s > 0 ? 1 : -1;
  for (const auto& x : w)
    if (x != 0) return x > 0 ? 1 : -1;
  return 0;
}

}  // namespace

std::vector<SimplicialPiece> decompose_dual(const ToricCone& cone, const DecomposeOptions& opts) {
  const std::size_t n = cone.dim();
  IntVec q0(n, 0);
  for (const auto& u : cone.dual_rays())
    for (std::size_t k = 0; k < n; ++k) q0[k] += u[k];

  std::vector<SimplicialPiece> pieces;
  const auto& simplices = cone.dual_triangulation();
  for (std::size_t s = 0; s < simplices.size(); ++s) {
    if (static_cast<std::size_t>(cone.dual_simplex_dets()[s]) > opts.max_box_points) {
      throw Error(ErrorCode::ExceedsSupportedSize, "simplicial piece has " +
                                                       std::to_string(cone.dual_simplex_dets()[s]) +
                                                       " box points, above the configured bound");
    }
    SimplicialPiece piece;
    for (auto j : simplices[s]) piece.generators.push_back(cone.dual_rays()[j]);

    // Rows of adj = D * U^{-1} (U has the generators as columns) are
    // positive multiples of the inward facet normals.
    linalg::Matrix<Rational> u(n, n);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t r = 0; r < n; ++r) u(r, k) = Rational(piece.generators[k][r]);
    auto inv = linalg::inverse(u);
    const Integer det = cone.dual_simplex_dets()[s];
    std::vector<std::vector<Integer>> adj(n, std::vector<Integer>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        Rational e = (*inv)(i, j) * Rational(det);
        adj[i][j] = numerator(e);
      }
    piece.open.resize(n);
    for (std::size_t k = 0; k < n; ++k) piece.open[k] = perturbed_sign(adj[k], q0) < 0;

    // Coset representatives of Z^n / lattice(U) from the Hermite basis, each
    // reduced into the half-open parallelepiped.
    auto hermite = linalg::lower_hermite_basis(piece.generators);
    IntVec diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = hermite[i][i].convert_to<std::int64_t>();
    IntVec rep(n, 0);
    auto emit = [&] {
      IntVec p = rep;
      for (std::size_t k = 0; k < n; ++k) {
        Integer c = 0;
        for (std::size_t j = 0; j < n; ++j) c += adj[k][j] * rep[j];
        // lambda_k = c / det
        Integer fl = c / det;
        if (c < 0 && fl * det != c) fl -= 1;
        Integer shift = fl;
        if (piece.open[k] && fl * det == c) shift -= 1;
        if (shift != 0) {
          auto sh = shift.convert_to<std::int64_t>();
          for (std::size_t r = 0; r < n; ++r) p[r] -= sh * piece.generators[k][r];
        }
      }
      piece.box_points.push_back(std::move(p));
    };
    auto rec = [&](auto&& self, std::size_t i) -> void {
      if (i == n) {
        emit();
        return;
      }
      for (std::int64_t x = 0; x < diag[i]; ++x) {
        rep[i] = x;
        self(self, i + 1);
      }
    };
    rec(rec, 0);
    pieces.push_back(std::move(piece));
  }
  return pieces;
}

std::vector<IntVec> piece_points(const SimplicialPiece& piece, const Vec<Rational>& xi, const Rational& bound) {
  const std::size_t n = piece.generators.size();
  std::vector<IntVec> out;
  for (const auto& p : piece.box_points) {
    IntVec cur = p;
    Rational level = dot(xi, p);
    auto rec = [&](auto&& self, std::size_t k, const Rational& lvl) -> void {
      if (k == n) {
        out.push_back(cur);
        return;
      }
      Rational step = dot(xi, piece.generators[k]);
      Rational l = lvl;
      IntVec saved = cur;
      while (l <= bound) {
        self(self, k + 1, l);
        for (std::size_t r = 0; r < n; ++r) cur[r] += piece.generators[k][r];
        l += step;
      }
      cur = saved;
    };
    if (level <= bound) rec(rec, 0, level);
  }
  return out;
}

const Vec<Rational>& bernoulli_numbers(std::size_t count) {
  static std::mutex mu;
  static Vec<Rational> cache{Rational(1)};
  std::lock_guard lock(mu);
  // sum_{k=0}^{m} C(m+1, k) B_k = 0
  while (cache.size() < count) {
    const std::size_t m = cache.size();
    Rational s = 0;
    Integer binom = 1;
    for (std::size_t k = 0; k < m; ++k) {
      s += Rational(binom) * cache[k];
      binom = binom * (m + 1 - k) / (k + 1);
    }
    cache.push_back(-s / Rational(Integer(m + 1)));
  }
  return cache;
}

template <class T>
long double LaurentSeries<T>::evaluate(long double t) const {
  long double s = 0;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    s += static_cast<long double>(coeffs[j]) * std::pow(t, static_cast<long double>(order_low + static_cast<int>(j)));
  }
  return s;
}

namespace {

template <class T>
using Series = Vec<T>;

template <class T>
Series<T> mul_trunc(const Series<T>& a, const Series<T>& b) {
  Series<T> c(a.size(), T(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; i + j < c.size(); ++j) c[i + j] += a[i] * b[j];
  }
  return c;
}

// Coefficients of x/(1 - e^{-x}) (plus = true) or x/(e^x - 1) at x = a*t.
template <class T>
Series<T> bernoulli_series(const T& a, std::size_t len, bool plus) {
  const auto& b = bernoulli_numbers(len);
  Series<T> s(len);
  T apow(1);
  Rational fact = 1;
  for (std::size_t j = 0; j < len; ++j) {
    if (j > 0) fact *= Rational(static_cast<long>(j));
    Rational c = b[j] / fact;
    if (plus && j % 2 == 1) c = -c;
    if constexpr (is_exact_v<T>) {
      s[j] = c * apow;
    } else {
      s[j] = T(c) * apow;
    }
    apow *= a;
  }
  return s;
}

template <class T>
T from_rational(const Rational& q) {
  if constexpr (is_exact_v<T>) {
    return q;
  } else {
    return T(q);
  }
}

template <class T>
struct PieceData {
  Vec<T> heights;       // <xi, u_k>
  T inv_height_product;
  Series<T> g_product;  // prod_k x/(1-e^{-x}) at x = <xi,u_k> t
};

template <class T>
PieceData<T> piece_data(const SimplicialPiece& piece, const Vec<T>& xi, std::size_t len) {
  PieceData<T> d;
  d.inv_height_product = T(1);
  d.g_product = Series<T>(len, T(0));
  d.g_product[0] = T(1);
  for (const auto& u : piece.generators) {
    T h = dot(xi, u);
    if (!(h > 0)) throw Error(ErrorCode::NotInReebCone, "xi pairs non-positively with a dual ray");
    d.inv_height_product /= h;
    d.g_product = mul_trunc(d.g_product, bernoulli_series(h, len, true));
    d.heights.push_back(std::move(h));
  }
  return d;
}

// sum_p w_p exp(-t <xi,p>) as a series, with w_p = 1 or <eta,p>.
template <class T>
Series<T> box_exponential(const SimplicialPiece& piece, const Vec<T>& xi, const Vec<T>* eta, std::size_t len) {
  Series<T> power_sums(len, T(0));
  for (const auto& p : piece.box_points) {
    T b = dot(xi, p);
    T w = eta ? dot(*eta, p) : T(1);
    if (w == 0) continue;
    T pw = w;
    for (std::size_t j = 0; j < len; ++j) {
      power_sums[j] += pw;
      pw *= b;
    }
  }
  Rational fact = 1;
  for (std::size_t j = 0; j < len; ++j) {
    if (j > 0) fact *= Rational(static_cast<long>(j));
    Rational c = Rational(j % 2 ? -1 : 1) / fact;
    power_sums[j] *= from_rational<T>(c);
  }
  return power_sums;
}

void check_order(int order, const ExpansionOptions& opts) {
  if (order < 0) throw Error(ErrorCode::InvalidArgument, "expansion order must be nonnegative");
  if (order > opts.max_order) {
    throw Error(ErrorCode::OrderTooLarge, "order " + std::to_string(order) + " exceeds the expansion depth " +
                                              std::to_string(opts.max_order));
  }
}

template <class T>
Series<T> reduce(std::vector<Series<T>>& parts, std::size_t len) {
  Series<T> total(len, T(0));
  for (const auto& p : parts)
    for (std::size_t j = 0; j < len; ++j) total[j] += p[j];
  return total;
}

}  // namespace

template <class T>
LaurentSeries<T> index_character(const std::vector<SimplicialPiece>& pieces, const ReebVector<T>& reeb, int order,
                                 const ExpansionOptions& opts) {
  check_order(order, opts);
  if (pieces.empty()) throw Error(ErrorCode::InvalidArgument, "no simplicial pieces");
  const std::size_t n = pieces.front().generators.size();
  const std::size_t len = static_cast<std::size_t>(order) + 1;
  bernoulli_numbers(len + 1);

  std::vector<Series<T>> parts(pieces.size());
  detail::parallel_for_index(pieces.size(), opts.threads, [&](std::size_t i) {
    auto d = piece_data(pieces[i], reeb.xi(), len);
    Series<T> s = mul_trunc(d.g_product, box_exponential<T>(pieces[i], reeb.xi(), nullptr, len));
    for (auto& c : s) c *= d.inv_height_product;
    parts[i] = std::move(s);
  });
  return LaurentSeries<T>{-static_cast<int>(n), reduce(parts, len)};
}

template <class T>
LaurentSeries<T> weight_character(const std::vector<SimplicialPiece>& pieces, const ReebVector<T>& reeb,
                                  const Vec<T>& eta, int order, const ExpansionOptions& opts) {
  check_order(order, opts);
  if (pieces.empty()) throw Error(ErrorCode::InvalidArgument, "no simplicial pieces");
  const std::size_t n = pieces.front().generators.size();
  if (eta.size() != n) throw Error(ErrorCode::DimensionMismatch, "eta length differs from cone dimension");
  const std::size_t len = static_cast<std::size_t>(order) + 1;
  bernoulli_numbers(len + 1);

  std::vector<Series<T>> parts(pieces.size());
  detail::parallel_for_index(pieces.size(), opts.threads, [&](std::size_t i) {
    const auto& piece = pieces[i];
    auto d = piece_data(piece, reeb.xi(), len);
    // sum_k <eta,u_k>/<xi,u_k> * x/(e^x - 1) at x = <xi,u_k> t
    Series<T> drift(len, T(0));
    for (std::size_t k = 0; k < piece.generators.size(); ++k) {
      T alpha = dot(eta, piece.generators[k]);
      if (alpha == 0) continue;
      T ratio = alpha / d.heights[k];
      auto h = bernoulli_series(d.heights[k], len, false);
      for (std::size_t j = 0; j < len; ++j) drift[j] += ratio * h[j];
    }
    Series<T> inner = mul_trunc(box_exponential<T>(piece, reeb.xi(), nullptr, len), drift);
    Series<T> weighted = box_exponential<T>(piece, reeb.xi(), &eta, len);
    for (std::size_t j = 1; j < len; ++j) inner[j] += weighted[j - 1];
    Series<T> s = mul_trunc(d.g_product, inner);
    for (auto& c : s) c *= d.inv_height_product;
    parts[i] = std::move(s);
  });
  return LaurentSeries<T>{-static_cast<int>(n) - 1, reduce(parts, len)};
}

namespace {

struct OracleSetup {
  Vec<long double> xi;
  Vec<long double> eta;
  bool weighted = false;
  long double volume = 0;   // vol(Q_xi)
  long double rho = 0;      // xi-extent of a unit cube
  long double eta_ratio = 0;  // max_j |<eta,u_j>| / <xi,u_j>
};

template <class T>
OracleSetup oracle_setup(const ToricCone& cone, const ReebVector<T>& reeb, const std::optional<Vec<T>>& eta) {
  const std::size_t n = cone.dim();
  OracleSetup s;
  for (const auto& x : reeb.xi()) s.xi.push_back(static_cast<long double>(x));
  if (eta) {
    if (eta->size() != n) throw Error(ErrorCode::DimensionMismatch, "eta length differs from cone dimension");
    s.weighted = true;
    for (const auto& x : *eta) s.eta.push_back(static_cast<long double>(x));
  } else {
    s.eta.assign(n, 0.0L);
  }
  s.volume = static_cast<long double>(geometry::volume_q(cone, reeb.xi()));
  for (auto x : s.xi) s.rho += std::fabs(x);
  for (const auto& u : cone.dual_rays()) {
    long double h = 0, e = 0;
    for (std::size_t k = 0; k < n; ++k) {
      h += s.xi[k] * u[k];
      e += s.eta[k] * u[k];
    }
    s.eta_ratio = std::max(s.eta_ratio, std::fabs(e) / h);
  }
  return s;
}

// Upper estimate of the absolute tail beyond `cutoff`, assuming at most
// 4 * vol * (s + rho)^n lattice points with <xi,u> <= s.
long double tail_estimate(const OracleSetup& s, std::size_t n, long double t, long double cutoff) {
  const long double safety = 4.0L;
  const long double x = t * (cutoff + s.rho);
  const long double shift = std::exp(t * s.rho);
  // d/ds [vol (s+rho)^n] = n vol (s+rho)^{n-1}
  long double base = safety * static_cast<long double>(n) * s.volume * shift *
                     boost::math::tgamma(static_cast<long double>(n), x) / std::pow(t, static_cast<long double>(n));
  if (!s.weighted) return base;
  return safety * static_cast<long double>(n) * s.volume * shift * s.eta_ratio *
         boost::math::tgamma(static_cast<long double>(n + 1), x) / std::pow(t, static_cast<long double>(n + 1));
}

// Leading-order magnitude of the (absolute) sum, used as the tail scale.
long double sum_scale(const OracleSetup& s, std::size_t n, long double t) {
  long double f = std::tgamma(static_cast<long double>(n + 1)) * s.volume / std::pow(t, static_cast<long double>(n));
  if (!s.weighted) return f;
  return std::max(f * s.eta_ratio * static_cast<long double>(n) / t, std::numeric_limits<long double>::min());
}

}  // namespace

template <class T>
OracleResult truncated_character_oracle(const ToricCone& cone, const ReebVector<T>& reeb,
                                        const std::optional<Vec<T>>& eta, double t_in, double cutoff_in, double tol) {
  if (!(t_in > 0)) throw Error(ErrorCode::InvalidArgument, "t must be positive");
  if (!(cutoff_in > 0)) throw Error(ErrorCode::InvalidArgument, "cutoff must be positive");
  const std::size_t n = cone.dim();
  const long double t = t_in, cutoff = cutoff_in;
  OracleSetup s = oracle_setup(cone, reeb, eta);

  OracleResult result;
  result.cutoff = cutoff;
  result.tail_estimate = tail_estimate(s, n, t, cutoff);
  if (result.tail_estimate > tol * sum_scale(s, n, t)) {
    throw Error(ErrorCode::CutoffTooSmall, "estimated tail above tolerance; raise the cutoff");
  }

  IntVec lo(n, 0), hi(n, 0);
  for (const auto& u : cone.dual_rays()) {
    long double h = 0;
    for (std::size_t k = 0; k < n; ++k) h += s.xi[k] * u[k];
    for (std::size_t k = 0; k < n; ++k) {
      long double c = cutoff * u[k] / h;
      lo[k] = std::min<std::int64_t>(lo[k], static_cast<std::int64_t>(std::floor(c)) - 1);
      hi[k] = std::max<std::int64_t>(hi[k], static_cast<std::int64_t>(std::ceil(c)) + 1);
    }
  }
  std::vector<detail::IntConstraint> constraints;
  for (const auto& v : cone.rays()) constraints.push_back({v, 0});

  const std::size_t last = n - 1;
  const long double xl = s.xi[last], el = s.eta[last];
  long double total = 0, comp = 0;  // Kahan
  detail::scan_columns(n, constraints, lo, hi, [&](const IntVec& prefix, std::int64_t a, std::int64_t b) {
    long double s0 = 0, e0 = 0;
    for (std::size_t k = 0; k < last; ++k) {
      s0 += s.xi[k] * prefix[k];
      e0 += s.eta[k] * prefix[k];
    }
    long double fa = a, fb = b;
    if (xl > 0) {
      fb = std::min(fb, std::floor((cutoff - s0) / xl));
    } else if (xl < 0) {
      fa = std::max(fa, std::ceil((cutoff - s0) / xl));
    } else if (s0 > cutoff) {
      return;
    }
    if (fa > fb) return;
    // sum_{x=fa}^{fb} r^x (e0 + el x), r = exp(-t xl), done relative to x = fa.
    const long double count = fb - fa + 1;
    const long double base = std::exp(-t * (s0 + xl * fa));
    long double s_0, s_1;
    if (xl == 0) {
      s_0 = count;
      s_1 = count * (count - 1) / 2;
    } else {
      const long double r = std::exp(-t * xl);
      const long double one_minus_r = -std::expm1(-t * xl);
      const long double rn = std::exp(-t * xl * count);
      s_0 = -std::expm1(-t * xl * count) / one_minus_r;
      s_1 = (r - count * rn + (count - 1) * rn * r) / (one_minus_r * one_minus_r);
    }
    long double term = s.weighted ? base * ((e0 + el * fa) * s_0 + el * s_1) : base * s_0;
    long double y = term - comp;
    long double z = total + y;
    comp = (z - total) - y;
    total = z;
  });
  result.value = total;
  return result;
}

template <class T>
double choose_cutoff(const ToricCone& cone, const ReebVector<T>& reeb, const std::optional<Vec<T>>& eta, double t,
                     double tol) {
  if (!(t > 0)) throw Error(ErrorCode::InvalidArgument, "t must be positive");
  const std::size_t n = cone.dim();
  OracleSetup s = oracle_setup(cone, reeb, eta);
  const long double scale = sum_scale(s, n, t);
  long double cutoff = 1.0L / t;
  for (int i = 0; i < 200; ++i) {
    if (tail_estimate(s, n, t, cutoff) <= tol * scale) return static_cast<double>(cutoff);
    cutoff *= 1.25L;
  }
  throw Error(ErrorCode::CutoffTooSmall, "could not find a cutoff meeting the tolerance");
}

template struct LaurentSeries<Rational>;
template struct LaurentSeries<Real>;
template LaurentSeries<Rational> index_character(const std::vector<SimplicialPiece>&, const ReebVector<Rational>&, int,
                                                 const ExpansionOptions&);
template LaurentSeries<Real> index_character(const std::vector<SimplicialPiece>&, const ReebVector<Real>&, int,
                                             const ExpansionOptions&);
template LaurentSeries<Rational> weight_character(const std::vector<SimplicialPiece>&, const ReebVector<Rational>&,
                                                  const Vec<Rational>&, int, const ExpansionOptions&);
template LaurentSeries<Real> weight_character(const std::vector<SimplicialPiece>&, const ReebVector<Real>&,
                                              const Vec<Real>&, int, const ExpansionOptions&);
template OracleResult truncated_character_oracle(const ToricCone&, const ReebVector<Rational>&,
                                                 const std::optional<Vec<Rational>>&, double, double, double);
template OracleResult truncated_character_oracle(const ToricCone&, const ReebVector<Real>&,
                                                 const std::optional<Vec<Real>>&, double, double, double);
template double choose_cutoff(const ToricCone&, const ReebVector<Rational>&, const std::optional<Vec<Rational>>&,
                              double, double);
template double choose_cutoff(const ToricCone&, const ReebVector<Real>&, const std::optional<Vec<Real>>&, double,
                              double);

}  // namespace reebcone::characters
