#ifndef REEBCONE_GEOMETRY_HPP
#define REEBCONE_GEOMETRY_HPP

// Rational polyhedral geometry of an affine toric cone sigma and its dual.
//
// sigma is generated by primitive rays v_1..v_d in Z^n. The dual cone
// sigma^v = {u : <v_i, u> >= 0} is computed by double description; its
// extreme rays u_1..u_k are also the inward facet normals of sigma. For a
// Reeb vector xi in int(sigma) the slice Q_xi = {u in sigma^v : <xi,u> <= 1}
// is the pyramid over P_xi = {<xi,u> = 1} with apex 0, whose vertices are
// u_j / <xi, u_j>. The combinatorial type of Q_xi is therefore the same for
// every xi, and one fixed triangulation of sigma^v serves all of them.

#include "reebcone/numeric.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace reebcone::geometry {

inline constexpr std::size_t kMaxDim = 8;
inline constexpr std::size_t kMaxRays = 64;

// Indices into ToricCone::dual_rays() spanning one simplicial cone.
using SimplexIndices = std::vector<std::size_t>;

class ToricCone {
 public:
  std::size_t dim() const { return dim_; }
  const std::vector<IntVec>& rays() const { return rays_; }
  const std::vector<IntVec>& dual_rays() const { return dual_rays_; }
  // Inward facet normals of sigma; identical to the dual rays.
  const std::vector<IntVec>& facets_sigma() const { return dual_rays_; }
  // Triangulation of sigma^v by its own rays (pulling order).
  const std::vector<SimplexIndices>& dual_triangulation() const { return triangulation_; }
  // |det| of each simplicial cone of dual_triangulation().
  const std::vector<std::int64_t>& dual_simplex_dets() const { return simplex_dets_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  // <v_i, u_j>
  std::int64_t pairing(std::size_t ray, std::size_t dual_ray) const { return dot(rays_[ray], dual_rays_[dual_ray]); }

 private:
  friend ToricCone dual_cone(const std::vector<IntVec>& cone_rays, std::size_t dim);

  std::size_t dim_ = 0;
  std::vector<IntVec> rays_;
  std::vector<IntVec> dual_rays_;
  std::vector<SimplexIndices> triangulation_;
  std::vector<std::int64_t> simplex_dets_;
  std::vector<std::string> warnings_;
};

/// Builds the cone generated by `cone_rays` and computes its dual.
///
/// Rays are re-primitivized (with a warning) and exact duplicates dropped.
/// Throws NotFullDimensional, NotPointed, RedundantRay (a generator that is
/// not an extreme ray), InvalidRay, DimensionMismatch, ExceedsSupportedSize.
ToricCone dual_cone(const std::vector<IntVec>& cone_rays, std::size_t dim);

/// Extreme rays of {u : <a_i, u> >= 0} for a full-rank constraint list,
/// sorted lexicographically. Throws NotPointed when the result is not
/// full-dimensional.
std::vector<IntVec> double_description(const std::vector<IntVec>& constraints, std::size_t dim);

/// Pulling triangulation of the pointed cone generated by `generators`,
/// whose facets have inward normals `facet_normals`.
std::vector<SimplexIndices> triangulate_cone(const std::vector<IntVec>& generators,
                                             const std::vector<IntVec>& facet_normals, std::size_t dim);

struct GorensteinVector {
  Vec<Rational> l;
  // Per-ray boundary coefficients c_i; empty means B = 0.
  Vec<Rational> boundary_coeffs;
};

/// The rational l with <v_i, l> = 1 - c_i for all rays (c = 0 unless given).
/// Throws NotQGorenstein when inconsistent, DegenerateSolutionSet when the
/// solution is not unique, InvalidArgument for coefficients outside [0,1).
GorensteinVector gorenstein_vector(const ToricCone& cone, const Vec<Rational>& boundary_coeffs = {});

template <class T>
class ReebVector {
 public:
  /// Throws NotInReebCone unless <xi, u> > 0 for every dual ray u.
  ReebVector(const ToricCone& cone, Vec<T> xi);

  const Vec<T>& xi() const { return xi_; }
  bool normalized() const { return normalized_; }

  /// <xi, l>
  T pairing(const GorensteinVector& l) const;
  /// xi / <xi, l>, flagged as normalized.
  ReebVector normalized_by(const GorensteinVector& l) const;

 private:
  ReebVector(Vec<T> xi, bool normalized) : xi_(std::move(xi)), normalized_(normalized) {}

  Vec<T> xi_;
  bool normalized_ = false;
};

/// <a, u> <= b
template <class T>
struct Inequality {
  Vec<T> a;
  T b;
};

template <class T>
struct PolytopeSlice {
  // The origin first, then u_j / <xi, u_j> in dual-ray order.
  std::vector<Vec<T>> vertices_Q;
  std::vector<Inequality<T>> hrep_Q;
  T volume_Q;
  Vec<T> bary_Q;
  Vec<T> bary_P;
};

/// Q_xi with exact (Rational) or working-precision (Real) volume and
/// barycenters. bary_Q comes from the cone-over-P triangulation; bary_P is
/// computed separately from the (n-1)-dimensional simplices of P_xi.
template <class T>
PolytopeSlice<T> polytope_q(const ToricCone& cone, const ReebVector<T>& xi);

/// Euclidean volume of Q_xi only (cheap path used by the optimizer).
template <class T>
T volume_q(const ToricCone& cone, const Vec<T>& xi);

/// All integer points of m*Q_xi. Requires rational xi (IrrationalReeb otherwise).
std::vector<IntVec> lattice_points(const ToricCone& cone, const ReebVector<Rational>& xi, std::int64_t m);
std::vector<IntVec> lattice_points(const ToricCone& cone, const ReebVector<Real>& xi, std::int64_t m);

/// True when v is in sigma (all <v, u_j> >= 0); `interior` set when strict.
template <class T>
bool in_sigma(const ToricCone& cone, const Vec<T>& v, bool* interior = nullptr);

extern template class ReebVector<Rational>;
extern template class ReebVector<Real>;

}  // namespace reebcone::geometry

#endif  // REEBCONE_GEOMETRY_HPP
