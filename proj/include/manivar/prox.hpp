#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "manivar/differences.hpp"
#include "manivar/manifold.hpp"

namespace manivar {

/// Output of a proximal map. Multi-point terms return one point per argument.
struct ProxResult {
  std::vector<Point> points;
  /// Set for the two-fold S1 branches; `alternatives` then holds the "-" branch.
  bool multivalued = false;
  std::optional<std::vector<Point>> alternatives;
  /// Numerical proxes only: false when the iteration budget ran out.
  bool converged = true;
  int iterations = 0;
};

/// prox of lambda * (1/p) dist(., y)^p at x, p in {1, 2}.
ProxResult prox_dist_to_point(const Manifold& m, const Point& x, const Point& y, double lambda,
                              int p);

/// prox of lambda * c_p dist(., .)^p at (x, y), with c_1 = 1 and c_2 = 1/2.
/// Both points move toward each other by the same geodesic fraction.
ProxResult prox_dist_pair(const Manifold& m, const Point& x, const Point& y, double lambda, int p);

/// prox on angles of lambda * (1/p) |(<x, w>)_{2pi}|^p with w = (-1, 1) for
/// order 1, w = (1, -2, 1) for order 2 and w = (1, -1, 1, -1) for the mixed
/// difference (order 11).
ProxResult prox_circle_diff(const std::vector<double>& x, double lambda, int order, int power);

/// prox on S1 of lambda * (1/2) dist(., y)^2 at x.
ProxResult prox_circle_data(double x, double y, double lambda);

using ResidualFn = std::function<DifferenceResidual(const std::vector<Point>&)>;

struct NumericalProxOptions {
  /// Stop when the linearized prox step is shorter than this.
  double step_tolerance = 1e-8;
  int max_iterations = 200;
  double backtrack = 0.5;
};

/// Approximates argmin_q 1/2 sum_k dist(x_k, q_k)^2 + lambda |r(q)|^p.
///
/// Each iteration solves the prox exactly for the linearization of r and of
/// the squared distances at the current q (exact when r is affine on a flat
/// space, so a single step suffices there) and backtracks along that step
/// until the true objective decreases.
ProxResult prox_numerical(const Manifold& m, const std::vector<Point>& x, double lambda, int p,
                          const ResidualFn& r, const NumericalProxOptions& options = {});

/// prox of lambda * d2(x, y, z)^p. Routed to the closed form on S1.
ProxResult prox_second_order(const Manifold& m, const Point& x, const Point& y, const Point& z,
                             double lambda, int p);

/// prox of lambda * d11(x, y, z, w)^p. Routed to the closed form on S1.
ProxResult prox_mixed_second_order(const Manifold& m, const Point& x, const Point& y,
                                   const Point& z, const Point& w, double lambda, int p);

}  // namespace manivar
