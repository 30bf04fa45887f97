#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "manivar/errors.hpp"
#include "manivar/tag.hpp"

namespace manivar {

using Vec = Eigen::VectorXd;

/// A location on a manifold, stored in the manifold's canonical chart:
///   R(m): m reals          S1: one angle in [-pi, pi)
///   S2: unit 3-vector      SPD(d): full d x d symmetric matrix, row-major
///   SO3: 3 x 3 rotation matrix, row-major
///   Product / Power: concatenation of the factors' charts
struct Point {
  Vec coords;
};

/// A tangent vector together with the point it is attached to.
///
/// Coordinates: R(m) and S1 as the chart; S2 as an ambient 3-vector orthogonal
/// to the base; SPD as a full symmetric matrix; SO3 as the body angular
/// velocity w (the tangent matrix is R [w]_x); products concatenate.
struct TangentVector {
  Point base;
  Vec coords;
};

enum class CurvatureSign { Flat, NonPositive, NonNegative, Mixed };

/// Orthonormal eigenbasis at x of the curvature operator R(., v) v, with the
/// eigenvalues of that operator. Eigenvalues carry the scale of v, i.e. they
/// are the curvature values seen along the unit-interval geodesic t -> exp_x(t v).
struct CurvatureFrame {
  std::vector<Vec> vectors;
  std::vector<double> kappa;
};

/// Abstract Riemannian manifold with exact exponential and logarithmic maps.
///
/// The coordinate-level methods below do no argument checking beyond what is
/// needed to report cut-locus failures; the free functions further down are
/// the checked public interface.
class Manifold {
 public:
  explicit Manifold(ManifoldTag tag) : tag_(std::move(tag)) {}
  virtual ~Manifold() = default;

  const ManifoldTag& tag() const { return tag_; }

  /// Intrinsic dimension.
  virtual int dimension() const = 0;
  virtual int chart_size() const = 0;
  virtual int tangent_size() const = 0;
  virtual double injectivity_radius() const = 0;
  virtual CurvatureSign curvature_sign() const = 0;
  bool is_flat() const { return curvature_sign() == CurvatureSign::Flat; }
  bool is_hadamard() const {
    auto s = curvature_sign();
    return s == CurvatureSign::Flat || s == CurvatureSign::NonPositive;
  }

  /// Throws std::invalid_argument when x is not a valid chart point.
  virtual void check_point(const Vec& x) const = 0;
  /// Throws std::invalid_argument when v is not a tangent vector at x.
  virtual void check_tangent(const Vec& x, const Vec& v) const;

  virtual Vec exp_map(const Vec& x, const Vec& v) const = 0;
  /// Throws CutLocusError when y is in the cut locus of x.
  virtual Vec log_map(const Vec& x, const Vec& y) const = 0;
  /// Velocity of some minimizing geodesic from x to y. Equals log_map off the
  /// cut locus; on it, one geodesic is picked deterministically.
  virtual Vec log_any(const Vec& x, const Vec& y) const { return log_map(x, y); }
  virtual double dist(const Vec& x, const Vec& y) const = 0;
  virtual double metric(const Vec& x, const Vec& v, const Vec& w) const = 0;
  /// Parallel transport of xi from x to exp_x(t v) along s -> exp_x(s v).
  virtual Vec transport_along(const Vec& x, const Vec& v, double t, const Vec& xi) const = 0;
  /// Orthonormal basis of the tangent space at x (deterministic).
  virtual std::vector<Vec> tangent_basis(const Vec& x) const = 0;
  /// Jacobi frame data for the geodesic t -> exp_x(t v). When v is non-zero the
  /// first vector is v / |v| with eigenvalue 0.
  virtual CurvatureFrame curvature_frame(const Vec& x, const Vec& v) const = 0;

  Vec zero_tangent() const { return Vec::Zero(tangent_size()); }
  double norm(const Vec& x, const Vec& v) const { return std::sqrt(std::max(0.0, metric(x, v, v))); }

 private:
  ManifoldTag tag_;
};

using ManifoldPtr = std::shared_ptr<const Manifold>;

/// Maps an angle to its representative in [-pi, pi).
double wrap_angle(double a);

/// Builds the concrete manifold for a tag.
ManifoldPtr make_manifold(const ManifoldTag& tag);

// Checked point-level interface ------------------------------------------------

void check_point(const Manifold& m, const Point& x);
void check_tangent(const Manifold& m, const TangentVector& v);

double distance(const Manifold& m, const Point& x, const Point& y);
Point exp(const Manifold& m, const Point& x, const TangentVector& v);
TangentVector log(const Manifold& m, const Point& x, const Point& y);
/// gamma(x, y; t) on the principal shortest geodesic; any real t.
Point geodesic_point(const Manifold& m, const Point& x, const Point& y, double t);
double inner(const Manifold& m, const Point& x, const TangentVector& v, const TangentVector& w);
double norm(const Manifold& m, const TangentVector& v);
/// Geodesic reflection of x at p: exp_p(-log_p x).
Point reflect(const Manifold& m, const Point& p, const Point& x);

TangentVector zero_vector(const Manifold& m, const Point& x);

/// True when the coordinates agree up to a relative 1e-12.
bool same_point(const Point& a, const Point& b);

// Tangent arithmetic (operands must share a base point).
TangentVector operator+(const TangentVector& a, const TangentVector& b);
TangentVector operator-(const TangentVector& a, const TangentVector& b);
TangentVector operator-(const TangentVector& a);
TangentVector operator*(double s, const TangentVector& a);

}  // namespace manivar
