#pragma once

#include <vector>

#include "manivar/manifold.hpp"

namespace manivar {

/// Parallel orthonormal frame along the geodesic from x with initial
/// velocity `direction`, diagonalizing the curvature operator.
///
/// `kappa` are the eigenvalues of R(., g') g' for the unit-interval
/// parameterization, i.e. already multiplied by the squared geodesic length.
struct JacobiFrame {
  Point x;
  TangentVector direction;
  std::vector<TangentVector> frame;
  std::vector<double> kappa;

  /// The frame vector k carried to gamma(t).
  TangentVector transported(const Manifold& m, std::size_t k, double t) const;
};

/// Frame along the geodesic from x to y. Throws DegenerateGeodesicError when
/// x == y and CutLocusError when y is in the cut locus of x.
JacobiFrame jacobi_frame(const Manifold& m, const Point& x, const Point& y);
/// Frame along t -> exp_x(t u); u may be zero, in which case all kappa are 0.
JacobiFrame jacobi_frame_along(const Manifold& m, const TangentVector& u);

/// Which map the differential is taken of.
enum class CoefficientKind {
  ExpBase,    // x -> exp_x(u), u carried parallel
  LogBase,    // x -> log_x(y)
  LogArg,     // x -> log_y(x)
  GeoFirst,   // x -> gamma(x, y; tau)
  GeoSecond,  // x -> gamma(y, x; tau)
  ExpArg,     // u -> exp_x(u)
};

struct CoefficientCase {
  CoefficientKind kind;
  /// Geodesic parameter for GeoFirst / GeoSecond. Values outside [0, 1]
  /// extend the geodesic (the pole ladder uses tau = 2).
  double tau = 0.0;

  /// Where along the geodesic the output of the differential lives.
  double output_time() const;
};

/// Jacobi coefficient for curvature eigenvalue kappa. Continuous at kappa = 0.
/// Throws SingularCoefficientError at poles of the trigonometric quotients.
double alpha(const CoefficientCase& c, double kappa);

/// Differential of the map selected by `c` at x applied to xi.
/// For LogBase, LogArg, GeoFirst, GeoSecond the second argument is the point y.
TangentVector differential(const Manifold& m, const CoefficientCase& c, const Point& x,
                           const Point& y, const TangentVector& xi);
/// For ExpBase and ExpArg the second argument is the tangent vector u at x.
TangentVector differential(const Manifold& m, const CoefficientCase& c, const Point& x,
                           const TangentVector& u, const TangentVector& xi);

/// Adjoint of the differential; w lives at F(x) (the point gamma(T)).
TangentVector adjoint_differential(const Manifold& m, const CoefficientCase& c, const Point& x,
                                   const Point& y, const TangentVector& w);
TangentVector adjoint_differential(const Manifold& m, const CoefficientCase& c, const Point& x,
                                   const TangentVector& u, const TangentVector& w);

/// Parallel transport along the shortest geodesic using the closed forms.
TangentVector transport_closed(const Manifold& m, const Point& x, const Point& y,
                               const TangentVector& xi);
/// Pole ladder: -log_y(gamma(exp_x(xi), gamma(x, y; 1/2); 2)).
TangentVector transport_pole(const Manifold& m, const Point& x, const Point& y,
                             const TangentVector& xi);
/// Schild's ladder: log_y(gamma(x, gamma(y, exp_x(xi); 1/2); 2)).
TangentVector transport_schild(const Manifold& m, const Point& x, const Point& y,
                               const TangentVector& xi);

}  // namespace manivar
