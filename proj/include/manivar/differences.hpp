#pragma once

#include <array>
#include <vector>

#include "manivar/manifold.hpp"

namespace manivar {

/// Value of a second-order difference. `tie` is set when a midpoint set had
/// more than one element and the principal midpoint was used.
struct DifferenceValue {
  double value = 0.0;
  bool tie = false;
};

/// gamma(x, z; 1/2) on the principal geodesic; on the cut locus a geodesic is
/// picked deterministically and *tie is set.
Point principal_midpoint(const Manifold& m, const Point& x, const Point& z, bool* tie = nullptr);

/// d2(x, y, z) = dist(mid(x, z), y).
DifferenceValue second_diff(const Manifold& m, const Point& x, const Point& y, const Point& z);
/// d11(x, y, z, w) = dist(mid(x, z), mid(y, w)).
DifferenceValue mixed_second_diff(const Manifold& m, const Point& x, const Point& y,
                                  const Point& z, const Point& w);

// Riemannian gradients with respect to each argument, in tangent coordinates
// at that argument. At the kink (value 0) and at ties the gradient is zero.
std::array<Vec, 2> dist_gradient(const Manifold& m, const Point& x, const Point& y);
std::array<Vec, 3> second_diff_gradient(const Manifold& m, const Point& x, const Point& y,
                                        const Point& z);
std::array<Vec, 4> mixed_second_diff_gradient(const Manifold& m, const Point& x, const Point& y,
                                              const Point& z, const Point& w);

/// A difference term written as h = |r|: the residual r in an orthonormal
/// basis of one tangent space, and its Jacobian with respect to the
/// tangent_basis coordinates of the arguments (column blocks in argument order,
/// m.dimension() columns each).
struct DifferenceResidual {
  Vec value;
  Eigen::MatrixXd jacobian;
};

/// r = log_x(y).
DifferenceResidual dist_residual(const Manifold& m, const Point& x, const Point& y);
/// r = log_c(y) with c = mid(x, z).
DifferenceResidual second_diff_residual(const Manifold& m, const Point& x, const Point& y,
                                        const Point& z);
/// r = log_c(c') with c = mid(x, z), c' = mid(y, w).
DifferenceResidual mixed_second_diff_residual(const Manifold& m, const Point& x, const Point& y,
                                              const Point& z, const Point& w);
/// Stacks the residuals of several terms over a shared tuple of `n` points;
/// term t acts on the tuple entries args[t].
DifferenceResidual stack_residuals(const Manifold& m, std::size_t n,
                                   const std::vector<DifferenceResidual>& parts,
                                   const std::vector<std::vector<int>>& args);

}  // namespace manivar
