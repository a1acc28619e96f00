#include "reebcone/optimize.hpp"

#include "parallel.hpp"
#include "reebcone/stability.hpp"

#include <cmath>
#include <limits>

namespace reebcone::optimize {

using geometry::GorensteinVector;
using geometry::ReebVector;
using geometry::ToricCone;

SliceChart make_chart(const ToricCone& cone, const GorensteinVector& l) {
  const std::size_t n = cone.dim();
  SliceChart chart;
  Vec<Rational> sum(n, Rational(0));
  for (const auto& v : cone.rays())
    for (std::size_t k = 0; k < n; ++k) sum[k] += v[k];
  Rational a = dot(sum, l.l);
  for (auto& x : sum) x /= a;
  chart.origin = std::move(sum);

  for (std::size_t k = 1; k < n; ++k)
    if (abs(l.l[k]) > abs(l.l[chart.pivot])) chart.pivot = k;
  const std::size_t p = chart.pivot;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == p) continue;
    Vec<Rational> b(n, Rational(0));
    b[k] = 1;
    b[p] = -l.l[k] / l.l[p];
    chart.basis.push_back(std::move(b));
  }
  return chart;
}

template <class T>
Vec<T> chart_point(const SliceChart& chart, const Vec<T>& y) {
  if (y.size() != chart.basis.size()) throw Error(ErrorCode::DimensionMismatch, "chart coordinate length");
  Vec<T> xi;
  for (const auto& o : chart.origin) xi.emplace_back(o);
  for (std::size_t k = 0; k < y.size(); ++k)
    for (std::size_t i = 0; i < xi.size(); ++i) xi[i] += y[k] * T(chart.basis[k][i]);
  return xi;
}

template <class T>
Vec<T> chart_coords(const SliceChart& chart, const Vec<T>& xi) {
  Vec<T> y;
  for (std::size_t k = 0; k < xi.size(); ++k)
    if (k != chart.pivot) y.push_back(xi[k] - T(chart.origin[k]));
  return y;
}

template <class T>
Objective<T> volume_objective(const ToricCone& cone, const SliceChart& chart, const Vec<T>& y) {
  const std::size_t n = cone.dim();
  const std::size_t m = chart.basis.size();
  const Vec<T> xi = chart_point(chart, y);
  const auto& dual = cone.dual_rays();

  Vec<T> h;
  const T scale = max_abs(xi);
  for (const auto& u : dual) {
    T v = dot(xi, u);
    if (sign_of(v, scale) <= 0) throw Error(ErrorCode::LeftReebCone, "chart point left the Reeb cone");
    h.push_back(std::move(v));
  }

  T factorial(1);
  for (std::size_t k = 2; k <= n; ++k) factorial *= T(static_cast<long>(k));

  // Derivatives in xi, then pulled back through the chart.
  T value(0);
  Vec<T> grad(n, T(0));
  linalg::Matrix<T> hess(n, n);
  const auto& simplices = cone.dual_triangulation();
  for (std::size_t s = 0; s < simplices.size(); ++s) {
    T term = T(cone.dual_simplex_dets()[s]) / factorial;
    Vec<T> w(n, T(0));
    for (auto j : simplices[s]) {
      term /= h[j];
      for (std::size_t i = 0; i < n; ++i) w[i] += T(dual[j][i]) / h[j];
    }
    value += term;
    for (std::size_t i = 0; i < n; ++i) grad[i] -= term * w[i];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        T sq(0);
        for (auto j : simplices[s]) sq += T(dual[j][i]) * T(dual[j][k]) / (h[j] * h[j]);
        hess(i, k) += term * (w[i] * w[k] + sq);
      }
  }

  const T nn(static_cast<long>(n));
  Objective<T> out;
  out.value = nn * value;
  out.gradient.assign(m, T(0));
  out.hessian = linalg::Matrix<T>(m, m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t i = 0; i < n; ++i) out.gradient[a] += nn * grad[i] * T(chart.basis[a][i]);
    for (std::size_t b = 0; b < m; ++b) {
      T acc(0);
      for (std::size_t i = 0; i < n; ++i) {
        if (chart.basis[a][i] == 0) continue;
        for (std::size_t k = 0; k < n; ++k) {
          if (chart.basis[b][k] == 0) continue;
          acc += T(chart.basis[a][i]) * hess(i, k) * T(chart.basis[b][k]);
        }
      }
      out.hessian(a, b) = nn * acc;
    }
  }
  return out;
}

namespace {

Real norm2(const Vec<Real>& v) {
  Real s = 0;
  for (const auto& x : v) s += x * x;
  return sqrt(s);
}

}  // namespace

MinimizeResult minimize_volume(const ToricCone& cone, const MinimizeOptions& opts) {
  const auto l = geometry::gorenstein_vector(cone);
  const SliceChart chart = make_chart(cone, l);
  const std::size_t m = chart.basis.size();
  const Real tol(opts.tol);

  Vec<Real> y(m, Real(0));
  if (opts.start) {
    ReebVector<Rational> start(cone, *opts.start);
    y = chart_coords(chart, to_real(start.normalized_by(l).xi()));
  }

  Real step_norm = std::numeric_limits<double>::infinity();
  int iter = 0;
  bool converged = false;
  Objective<Real> obj = volume_objective(cone, chart, y);
  for (; iter <= opts.max_iter; ++iter) {
    Real gnorm = norm2(obj.gradient);
    if (gnorm <= tol && step_norm <= tol) {
      converged = true;
      break;
    }
    if (iter == opts.max_iter) break;

    auto factor = linalg::cholesky(obj.hessian);
    if (!factor) {
      for (Real lambda = 1e-12; lambda <= Real(1e-4) * Real(1.000001); lambda *= 10) {
        auto shifted = obj.hessian;
        for (std::size_t a = 0; a < m; ++a) shifted(a, a) += lambda;
        factor = linalg::cholesky(shifted);
        if (factor) break;
      }
      if (!factor) throw Error(ErrorCode::NonConvergent, "Hessian not positive definite after regularization");
    }
    Vec<Real> dir = linalg::cholesky_solve(*factor, obj.gradient);
    for (auto& d : dir) d = -d;
    Real slope = 0;
    for (std::size_t a = 0; a < m; ++a) slope += obj.gradient[a] * dir[a];

    Real alpha = 1;
    bool accepted = false;
    for (int bt = 0; bt < 200; ++bt, alpha /= 2) {
      Vec<Real> trial = y;
      for (std::size_t a = 0; a < m; ++a) trial[a] += alpha * dir[a];
      try {
        auto next = volume_objective(cone, chart, trial);
        if (next.value <= obj.value + Real(1e-4) * alpha * slope) {
          y = std::move(trial);
          obj = std::move(next);
          accepted = true;
          break;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::LeftReebCone) throw;
      }
    }
    if (!accepted) {
      // No decrease left at working precision.
      if (norm2(obj.gradient) <= tol) {
        step_norm = 0;
        continue;
      }
      throw Error(ErrorCode::NonConvergent, "line search failed to decrease the volume");
    }
    step_norm = alpha * norm2(dir);
  }
  if (!converged) {
    throw Error(ErrorCode::MaxIterations, "no convergence within " + std::to_string(opts.max_iter) + " iterations");
  }

  Vec<Real> xi = chart_point(chart, y);
  ReebVector<Real> reeb(cone, xi);
  auto report = stability::delta(cone, reeb, l);
  Real margin = -1;
  for (const auto& u : cone.dual_rays()) {
    Real h = dot(xi, u);
    if (margin < 0 || h < margin) margin = h;
  }
  MinimizeResult result{reeb,
                        obj.value,
                        obj.value / Real(static_cast<long>(cone.dim())),
                        norm2(obj.gradient),
                        step_norm,
                        iter,
                        report.residual,
                        report.delta,
                        margin,
                        std::nullopt};
  if (opts.probe_denominator > 0) result.rational_candidate = rationality_probe(xi, opts.probe_denominator);
  return result;
}

GridResult grid_search_oracle(const ToricCone& cone, std::size_t resolution, unsigned threads) {
  if (resolution < 1 || resolution > 10000) {
    throw Error(ErrorCode::InvalidArgument, "grid resolution must be between 1 and 10^4");
  }
  const auto l = geometry::gorenstein_vector(cone);
  const SliceChart chart = make_chart(cone, l);
  const std::size_t m = chart.basis.size();

  // Bounding box of the slice polytope in chart coordinates.
  Vec<Real> lo(m), hi(m);
  bool first = true;
  for (const auto& v : cone.rays()) {
    Vec<Rational> p = to_field<Rational>(v);
    Rational a = dot(p, l.l);
    for (auto& x : p) x /= a;
    auto c = chart_coords(chart, to_real(p));
    for (std::size_t k = 0; k < m; ++k) {
      if (first || c[k] < lo[k]) lo[k] = c[k];
      if (first || c[k] > hi[k]) hi[k] = c[k];
    }
    first = false;
  }

  std::size_t per_axis = 1;
  if (m > 0) {
    per_axis = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(resolution), 1.0 / m) + 1e-9));
    while (per_axis > 1 && std::pow(static_cast<double>(per_axis), static_cast<double>(m)) > resolution) --per_axis;
  }
  std::size_t total = 1;
  for (std::size_t k = 0; k < m; ++k) total *= per_axis;

  GridResult out;
  out.samples = total;
  out.spacing.resize(m);
  for (std::size_t k = 0; k < m; ++k) out.spacing[k] = (hi[k] - lo[k]) / Real(static_cast<long>(per_axis));

  std::vector<std::optional<Real>> values(total);
  std::vector<Vec<Real>> coords(total);
  detail::parallel_for_index(total, threads, [&](std::size_t idx) {
    Vec<Real> y(m);
    std::size_t rem = idx;
    for (std::size_t k = 0; k < m; ++k) {
      std::size_t i = rem % per_axis;
      rem /= per_axis;
      y[k] = lo[k] + (Real(static_cast<long>(i)) + Real(0.5)) * out.spacing[k];
    }
    try {
      values[idx] = volume_objective(cone, chart, y).value;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::LeftReebCone) throw;
    }
    coords[idx] = std::move(y);
  });

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < total; ++i)
    if (values[i] && (!best || *values[i] < *values[*best])) best = i;
  if (!best) throw Error(ErrorCode::InvalidArgument, "grid has no interior sample; raise the resolution");
  out.y = coords[*best];
  out.xi = chart_point(chart, out.y);
  out.value = *values[*best];
  return out;
}

std::optional<RationalCandidate> rationality_probe(const Vec<Real>& xi, std::int64_t max_denominator) {
  if (max_denominator < 1) return std::nullopt;
  RationalCandidate best;
  best.denominator_bound = max_denominator;
  bool have = false;
  for (std::int64_t q = 1; q <= max_denominator; ++q) {
    Real dist = 0;
    Vec<Rational> approx;
    for (const auto& x : xi) {
      Real scaled = x * Real(q);
      Real r = floor(scaled + Real(0.5));
      Integer p = r.convert_to<Integer>();
      Real d = abs(x - Real(Rational(p, Integer(q))));
      if (d > dist) dist = d;
      approx.emplace_back(p, Integer(q));
    }
    if (!have || dist < best.distance) {
      best.xi = std::move(approx);
      best.denominator = q;
      best.distance = dist;
      have = true;
    }
  }
  return best;
}

template Vec<Rational> chart_point(const SliceChart&, const Vec<Rational>&);
template Vec<Real> chart_point(const SliceChart&, const Vec<Real>&);
template Vec<Rational> chart_coords(const SliceChart&, const Vec<Rational>&);
template Vec<Real> chart_coords(const SliceChart&, const Vec<Real>&);
template Objective<Rational> volume_objective(const ToricCone&, const SliceChart&, const Vec<Rational>&);
template Objective<Real> volume_objective(const ToricCone&, const SliceChart&, const Vec<Real>&);

}  // namespace reebcone::optimize
