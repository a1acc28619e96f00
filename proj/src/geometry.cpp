#include "reebcone/geometry.hpp"

#include "lattice_scan.hpp"
#include "reebcone/linalg.hpp"

#include <algorithm>
#include <bitset>
#include <set>

namespace reebcone::geometry {

namespace {

using ZeroSet = std::bitset<kMaxRays>;

struct DdRay {
  std::vector<Integer> u;
  ZeroSet zeros;
};

Integer pair(const IntVec& a, const std::vector<Integer>& u) {
  Integer s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * u[k];
  return s;
}

void make_primitive(std::vector<Integer>& u) {
  Integer g = 0;
  for (const auto& x : u) g = gcd(g, x);
  if (g > 1)
    for (auto& x : u) x /= g;
}

IntVec to_int64(const std::vector<Integer>& u) {
  IntVec out;
  out.reserve(u.size());
  for (const auto& x : u) {
    if (x > INT64_MAX || x < INT64_MIN) throw Error(ErrorCode::Overflow, "dual ray entry exceeds 64 bits");
    out.push_back(x.convert_to<std::int64_t>());
  }
  return out;
}

}  // namespace

std::vector<IntVec> double_description(const std::vector<IntVec>& constraints, std::size_t dim) {
  if (constraints.size() > kMaxRays) {
    throw Error(ErrorCode::ExceedsSupportedSize, "at most " + std::to_string(kMaxRays) + " constraints supported");
  }
  // Initial basis: the first dim linearly independent constraints.
  std::vector<std::size_t> basis;
  std::vector<IntVec> basis_rows;
  for (std::size_t i = 0; i < constraints.size() && basis.size() < dim; ++i) {
    auto trial = basis_rows;
    trial.push_back(constraints[i]);
    if (linalg::rank_of_rows<Rational>(trial, dim) == trial.size()) {
      basis.push_back(i);
      basis_rows = std::move(trial);
    }
  }
  if (basis.size() < dim) throw Error(ErrorCode::NotFullDimensional, "constraints do not span");

  auto inv = linalg::inverse(linalg::Matrix<Rational>::from_rows(basis_rows, dim));
  std::vector<DdRay> rays;
  for (std::size_t k = 0; k < dim; ++k) {
    // Column k of the inverse is the ray tight on every basis row except k.
    Integer lcm = 1;
    for (std::size_t r = 0; r < dim; ++r) lcm = boost::multiprecision::lcm(lcm, denominator((*inv)(r, k)));
    DdRay ray;
    ray.u.resize(dim);
    for (std::size_t r = 0; r < dim; ++r) ray.u[r] = numerator((*inv)(r, k)) * (lcm / denominator((*inv)(r, k)));
    make_primitive(ray.u);
    for (std::size_t b = 0; b < dim; ++b)
      if (b != k) ray.zeros.set(basis[b]);
    rays.push_back(std::move(ray));
  }

  for (std::size_t i = 0; i < constraints.size(); ++i) {
    if (std::find(basis.begin(), basis.end(), i) != basis.end()) continue;
    const IntVec& a = constraints[i];
    std::vector<std::size_t> plus, minus;
    std::vector<Integer> value(rays.size());
    std::vector<DdRay> next;
    for (std::size_t r = 0; r < rays.size(); ++r) {
      value[r] = pair(a, rays[r].u);
      if (value[r] > 0) {
        plus.push_back(r);
        next.push_back(rays[r]);
      } else if (value[r] < 0) {
        minus.push_back(r);
      } else {
        next.push_back(rays[r]);
        next.back().zeros.set(i);
      }
    }
    for (std::size_t p : plus) {
      for (std::size_t q : minus) {
        ZeroSet common = rays[p].zeros & rays[q].zeros;
        if (dim >= 2 && common.count() + 2 < dim) continue;
        bool adjacent = true;
        for (std::size_t r = 0; r < rays.size() && adjacent; ++r) {
          if (r == p || r == q) continue;
          if ((rays[r].zeros & common) == common) adjacent = false;
        }
        if (!adjacent) continue;
        DdRay ray;
        ray.u.resize(dim);
        for (std::size_t k = 0; k < dim; ++k) ray.u[k] = value[p] * rays[q].u[k] - value[q] * rays[p].u[k];
        make_primitive(ray.u);
        ray.zeros = common;
        ray.zeros.set(i);
        next.push_back(std::move(ray));
      }
    }
    rays = std::move(next);
  }

  std::vector<IntVec> out;
  out.reserve(rays.size());
  for (const auto& r : rays) out.push_back(to_int64(r.u));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (linalg::rank_of_rows<Rational>(out, dim) < dim) {
    throw Error(ErrorCode::NotPointed, "cone contains a line (dual cone is not full-dimensional)");
  }
  return out;
}

std::vector<SimplexIndices> triangulate_cone(const std::vector<IntVec>& generators,
                                             const std::vector<IntVec>& facet_normals, std::size_t dim) {
  auto rank_of = [&](const SimplexIndices& face) {
    std::vector<IntVec> rows;
    for (auto g : face) rows.push_back(generators[g]);
    return linalg::rank_of_rows<Rational>(rows, dim);
  };

  std::vector<SimplexIndices> out;
  auto rec = [&](auto&& self, const SimplexIndices& face, std::size_t face_rank, const SimplexIndices& apexes) -> void {
    if (face.size() == face_rank) {
      SimplexIndices simplex = apexes;
      simplex.insert(simplex.end(), face.begin(), face.end());
      std::sort(simplex.begin(), simplex.end());
      out.push_back(std::move(simplex));
      return;
    }
    const std::size_t pulled = face.front();
    std::set<SimplexIndices> facets;
    for (const auto& w : facet_normals) {
      SimplexIndices sub;
      for (auto g : face)
        if (dot(w, generators[g]) == 0) sub.push_back(g);
      if (sub.empty() || std::find(sub.begin(), sub.end(), pulled) != sub.end()) continue;
      if (rank_of(sub) + 1 == face_rank) facets.insert(std::move(sub));
    }
    SimplexIndices next_apexes = apexes;
    next_apexes.push_back(pulled);
    for (const auto& f : facets) self(self, f, face_rank - 1, next_apexes);
  };

  SimplexIndices all(generators.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  rec(rec, all, dim, {});
  return out;
}

ToricCone dual_cone(const std::vector<IntVec>& cone_rays, std::size_t dim) {
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  if (dim > kMaxDim) {
    throw Error(ErrorCode::ExceedsSupportedSize, "dimension above " + std::to_string(kMaxDim) + " not supported");
  }
  if (cone_rays.size() > kMaxRays) {
    throw Error(ErrorCode::ExceedsSupportedSize, "more than " + std::to_string(kMaxRays) + " rays not supported");
  }
  ToricCone cone;
  cone.dim_ = dim;
  for (std::size_t i = 0; i < cone_rays.size(); ++i) {
    const IntVec& v = cone_rays[i];
    if (v.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch,
                  "ray " + std::to_string(i) + " has length " + std::to_string(v.size()) + ", expected " +
                      std::to_string(dim));
    }
    if (std::all_of(v.begin(), v.end(), [](auto x) { return x == 0; })) {
      throw Error(ErrorCode::InvalidRay, "ray " + std::to_string(i) + " is zero");
    }
    IntVec p = primitive(v);
    if (p != v) cone.warnings_.push_back("ray " + std::to_string(i) + " re-primitivized to " + to_string(p));
    if (auto it = std::find(cone.rays_.begin(), cone.rays_.end(), p); it != cone.rays_.end()) {
      cone.warnings_.push_back("ray " + std::to_string(i) + " duplicates an earlier ray and was dropped");
      continue;
    }
    cone.rays_.push_back(std::move(p));
  }
  if (linalg::rank_of_rows<Rational>(cone.rays_, dim) < dim) {
    throw Error(ErrorCode::NotFullDimensional, "rays do not span R^" + std::to_string(dim));
  }
  cone.dual_rays_ = double_description(cone.rays_, dim);

  // Every generator must cut out a facet of the dual cone.
  for (std::size_t i = 0; i < cone.rays_.size(); ++i) {
    std::vector<IntVec> tight;
    for (const auto& u : cone.dual_rays_)
      if (dot(cone.rays_[i], u) == 0) tight.push_back(u);
    if (linalg::rank_of_rows<Rational>(tight, dim) + 1 != dim) {
      throw Error(ErrorCode::RedundantRay,
                  "ray " + to_string(cone.rays_[i]) + " is not an extreme ray of the cone");
    }
  }

  cone.triangulation_ = triangulate_cone(cone.dual_rays_, cone.rays_, dim);
  for (const auto& s : cone.triangulation_) {
    std::vector<IntVec> rows;
    for (auto j : s) rows.push_back(cone.dual_rays_[j]);
    Integer det = abs(linalg::integer_determinant(rows));
    if (det > INT64_MAX) throw Error(ErrorCode::Overflow, "simplicial cone determinant exceeds 64 bits");
    cone.simplex_dets_.push_back(det.convert_to<std::int64_t>());
  }
  return cone;
}

GorensteinVector gorenstein_vector(const ToricCone& cone, const Vec<Rational>& boundary_coeffs) {
  const std::size_t n = cone.dim();
  const auto& rays = cone.rays();
  if (!boundary_coeffs.empty() && boundary_coeffs.size() != rays.size()) {
    throw Error(ErrorCode::DimensionMismatch, "need one boundary coefficient per ray");
  }
  for (const auto& c : boundary_coeffs) {
    if (c < 0 || c >= 1) throw Error(ErrorCode::InvalidArgument, "boundary coefficients must lie in [0,1)");
  }
  auto a = linalg::Matrix<Rational>::from_rows(rays, n);
  Vec<Rational> rhs(rays.size(), Rational(1));
  for (std::size_t i = 0; i < boundary_coeffs.size(); ++i) rhs[i] -= boundary_coeffs[i];
  auto [status, l] = linalg::solve(a, rhs);
  if (status == linalg::SolveStatus::Inconsistent) {
    throw Error(ErrorCode::NotQGorenstein, "no l with <v_i, l> = 1 for all rays");
  }
  if (status == linalg::SolveStatus::Underdetermined) {
    throw Error(ErrorCode::DegenerateSolutionSet, "Gorenstein system has a positive-dimensional solution set");
  }
  // Interior of sigma^v means strictly positive on every facet normal v_i.
  for (const auto& v : rays) {
    if (dot(l, v) <= 0) throw Error(ErrorCode::NotQGorenstein, "solution l is not interior to the dual cone");
  }
  return GorensteinVector{std::move(l), boundary_coeffs};
}

template <class T>
bool in_sigma(const ToricCone& cone, const Vec<T>& v, bool* interior) {
  if (v.size() != cone.dim()) throw Error(ErrorCode::DimensionMismatch, "vector length differs from cone dimension");
  bool strict = true;
  const T scale = max_abs(v);
  for (const auto& u : cone.dual_rays()) {
    int s = sign_of(dot(v, u), T(scale * T(max_abs(to_field<T>(u)))));
    if (s < 0) {
      if (interior) *interior = false;
      return false;
    }
    if (s == 0) strict = false;
  }
  if (interior) *interior = strict;
  return true;
}

template <class T>
ReebVector<T>::ReebVector(const ToricCone& cone, Vec<T> xi) : xi_(std::move(xi)) {
  bool interior = false;
  if (!in_sigma(cone, xi_, &interior) || !interior) {
    throw Error(ErrorCode::NotInReebCone, "xi is not in the interior of the cone");
  }
}

template <class T>
T ReebVector<T>::pairing(const GorensteinVector& l) const {
  T s(0);
  for (std::size_t k = 0; k < xi_.size(); ++k) s += xi_[k] * T(l.l[k]);
  return s;
}

template <class T>
ReebVector<T> ReebVector<T>::normalized_by(const GorensteinVector& l) const {
  T a = pairing(l);
  if (!(a > 0)) throw Error(ErrorCode::NotInReebCone, "<xi, l> must be positive");
  Vec<T> out = xi_;
  for (auto& x : out) x /= a;
  return ReebVector(std::move(out), true);
}

template <class T>
T volume_q(const ToricCone& cone, const Vec<T>& xi) {
  const std::size_t n = cone.dim();
  Vec<T> heights;
  heights.reserve(cone.dual_rays().size());
  for (const auto& u : cone.dual_rays()) {
    T h = dot(xi, u);
    if (!(h > 0)) throw Error(ErrorCode::UnboundedSlice, "xi pairs non-positively with a dual ray");
    heights.push_back(std::move(h));
  }
  T factorial(1);
  for (std::size_t k = 2; k <= n; ++k) factorial *= T(static_cast<long>(k));
  T total(0);
  const auto& simplices = cone.dual_triangulation();
  for (std::size_t s = 0; s < simplices.size(); ++s) {
    T denom = factorial;
    for (auto j : simplices[s]) denom *= heights[j];
    total += T(cone.dual_simplex_dets()[s]) / denom;
  }
  return total;
}

template <class T>
PolytopeSlice<T> polytope_q(const ToricCone& cone, const ReebVector<T>& reeb) {
  const std::size_t n = cone.dim();
  const Vec<T>& xi = reeb.xi();
  PolytopeSlice<T> out;

  out.vertices_Q.push_back(Vec<T>(n, T(0)));
  for (const auto& u : cone.dual_rays()) {
    T h = dot(xi, u);
    if (!(h > 0)) throw Error(ErrorCode::UnboundedSlice, "xi pairs non-positively with a dual ray");
    Vec<T> w = to_field<T>(u);
    for (auto& x : w) x /= h;
    out.vertices_Q.push_back(std::move(w));
  }
  for (const auto& v : cone.rays()) {
    Vec<T> a = to_field<T>(v);
    for (auto& x : a) x = -x;
    out.hrep_Q.push_back({std::move(a), T(0)});
  }
  out.hrep_Q.push_back({xi, T(1)});

  // Drop the coordinate where xi is largest: P_xi projects injectively.
  std::size_t drop = 0;
  for (std::size_t k = 1; k < n; ++k)
    if (abs_of(xi[k]) > abs_of(xi[drop])) drop = k;

  T factorial(1);
  for (std::size_t k = 2; k <= n; ++k) factorial *= T(static_cast<long>(k));

  T volume(0), p_weight(0);
  Vec<T> q_moment(n, T(0)), p_moment(n, T(0));
  const auto& simplices = cone.dual_triangulation();
  for (std::size_t s = 0; s < simplices.size(); ++s) {
    const auto& idx = simplices[s];
    Vec<T> vertex_sum(n, T(0));
    T denom = factorial;
    for (auto j : idx) {
      const auto& w = out.vertices_Q[j + 1];
      for (std::size_t k = 0; k < n; ++k) vertex_sum[k] += w[k];
      denom *= dot(xi, cone.dual_rays()[j]);
    }
    T vol = T(cone.dual_simplex_dets()[s]) / denom;
    volume += vol;
    for (std::size_t k = 0; k < n; ++k) q_moment[k] += vol * vertex_sum[k];

    T pw(1);
    if (n > 1) {
      linalg::Matrix<T> edges(n - 1, n - 1);
      const auto& base = out.vertices_Q[idx[0] + 1];
      for (std::size_t e = 1; e < n; ++e) {
        const auto& w = out.vertices_Q[idx[e] + 1];
        for (std::size_t k = 0, c = 0; k < n; ++k) {
          if (k == drop) continue;
          edges(e - 1, c++) = w[k] - base[k];
        }
      }
      pw = abs_of(linalg::determinant(edges));
    }
    p_weight += pw;
    for (std::size_t k = 0; k < n; ++k) p_moment[k] += pw * vertex_sum[k];
  }
  if (!(volume > 0)) throw Error(ErrorCode::UnboundedSlice, "Q_xi has zero volume");

  out.volume_Q = volume;
  out.bary_Q.resize(n);
  out.bary_P.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.bary_Q[k] = q_moment[k] / (volume * T(static_cast<long>(n + 1)));
    out.bary_P[k] = p_moment[k] / (p_weight * T(static_cast<long>(n)));
  }
  return out;
}

std::vector<IntVec> lattice_points(const ToricCone& cone, const ReebVector<Rational>& reeb, std::int64_t m) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "m must be positive");
  const std::size_t n = cone.dim();
  const auto& xi = reeb.xi();

  // Clear denominators: <xi', u> <= m * D.
  Integer den = 1;
  for (const auto& x : xi) den = boost::multiprecision::lcm(den, denominator(x));
  IntVec xi_int(n);
  for (std::size_t k = 0; k < n; ++k) {
    Integer v = numerator(xi[k]) * (den / denominator(xi[k]));
    if (v > INT64_MAX || v < INT64_MIN) throw Error(ErrorCode::Overflow, "xi denominators too large");
    xi_int[k] = v.convert_to<std::int64_t>();
  }
  Integer bound = den * m;
  if (bound > INT64_MAX) throw Error(ErrorCode::Overflow, "m * denominator exceeds 64 bits");

  std::vector<detail::IntConstraint> constraints;
  for (const auto& v : cone.rays()) constraints.push_back({v, 0});
  IntVec neg_xi(xi_int);
  for (auto& x : neg_xi) x = -x;
  constraints.push_back({neg_xi, -static_cast<__int128>(bound.convert_to<std::int64_t>())});

  IntVec lo(n, 0), hi(n, 0);
  for (const auto& u : cone.dual_rays()) {
    Rational h = dot(xi, u);
    for (std::size_t k = 0; k < n; ++k) {
      Rational c = Rational(m) * Rational(u[k]) / h;
      Integer f = numerator(c) / denominator(c);  // truncation toward zero
      if (c < 0 && Rational(f) != c) f -= 1;
      Integer ce = (Rational(f) == c) ? f : Integer(f + 1);
      lo[k] = std::min<std::int64_t>(lo[k], f.convert_to<std::int64_t>());
      hi[k] = std::max<std::int64_t>(hi[k], ce.convert_to<std::int64_t>());
    }
  }

  std::vector<IntVec> points;
  detail::scan_columns(n, constraints, lo, hi, [&](const IntVec& prefix, std::int64_t a, std::int64_t b) {
    IntVec u = prefix;
    for (std::int64_t x = a; x <= b; ++x) {
      u[n - 1] = x;
      points.push_back(u);
    }
  });
  return points;
}

std::vector<IntVec> lattice_points(const ToricCone&, const ReebVector<Real>&, std::int64_t) {
  throw Error(ErrorCode::IrrationalReeb, "lattice enumeration requires a rational Reeb vector");
}

template class ReebVector<Rational>;
template class ReebVector<Real>;
template bool in_sigma(const ToricCone&, const Vec<Rational>&, bool*);
template bool in_sigma(const ToricCone&, const Vec<Real>&, bool*);
template PolytopeSlice<Rational> polytope_q(const ToricCone&, const ReebVector<Rational>&);
template PolytopeSlice<Real> polytope_q(const ToricCone&, const ReebVector<Real>&);
template Rational volume_q(const ToricCone&, const Vec<Rational>&);
template Real volume_q(const ToricCone&, const Vec<Real>&);

}  // namespace reebcone::geometry
