#include "manivar/differences.hpp"

#include "manivar/transport.hpp"

namespace manivar {

namespace {

// Pulls a gradient at mid(a, b) back to a through the midpoint map.
Vec pull_back(const Manifold& m, const Point& a, const Point& b, const Vec& g) {
  return adjoint_differential(m, {CoefficientKind::GeoFirst, 0.5}, a, b, TangentVector{{}, g})
      .coords;
}

using K = CoefficientKind;

Vec coords_in(const Manifold& m, const Vec& x, const std::vector<Vec>& basis, const Vec& v) {
  Vec c(static_cast<int>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) c[j] = m.metric(x, v, basis[j]);
  return c;
}

// Differential of the midpoint map mid(a, b) with respect to a, per basis vector of T_a.
std::vector<TangentVector> midpoint_columns(const Manifold& m, const Point& a, const Point& b) {
  std::vector<TangentVector> out;
  for (const Vec& e : m.tangent_basis(a.coords))
    out.push_back(differential(m, {K::GeoFirst, 0.5}, a, b, TangentVector{a, e}));
  return out;
}

// Columns of log_c(target) differentiated through c, for each dc in `dcs`.
void log_base_block(const Manifold& m, const Point& c, const Point& target,
                    const std::vector<Vec>& basis_c, const std::vector<TangentVector>& dcs,
                    Eigen::MatrixXd& jac, int col) {
  for (std::size_t j = 0; j < dcs.size(); ++j)
    jac.col(col + static_cast<int>(j)) =
        coords_in(m, c.coords, basis_c,
                  differential(m, {K::LogBase}, c, target, TangentVector{c, dcs[j].coords}).coords);
}

// Columns of log_c(y) differentiated in y.
void log_arg_block(const Manifold& m, const Point& c, const Point& y,
                   const std::vector<Vec>& basis_c, Eigen::MatrixXd& jac, int col) {
  int j = 0;
  for (const Vec& e : m.tangent_basis(y.coords))
    jac.col(col + j++) = coords_in(
        m, c.coords, basis_c, differential(m, {K::LogArg}, y, c, TangentVector{y, e}).coords);
}

}  // namespace

Point principal_midpoint(const Manifold& m, const Point& x, const Point& z, bool* tie) {
  Vec v;
  try {
    v = m.log_map(x.coords, z.coords);
  } catch (const CutLocusError&) {
    if (tie) *tie = true;
    v = m.log_any(x.coords, z.coords);
  }
  return {m.exp_map(x.coords, 0.5 * v)};
}

DifferenceValue second_diff(const Manifold& m, const Point& x, const Point& y, const Point& z) {
  DifferenceValue r;
  Point c = principal_midpoint(m, x, z, &r.tie);
  r.value = m.dist(c.coords, y.coords);
  return r;
}

DifferenceValue mixed_second_diff(const Manifold& m, const Point& x, const Point& y,
                                  const Point& z, const Point& w) {
  DifferenceValue r;
  Point c1 = principal_midpoint(m, x, z, &r.tie);
  Point c2 = principal_midpoint(m, y, w, &r.tie);
  r.value = m.dist(c1.coords, c2.coords);
  return r;
}

std::array<Vec, 2> dist_gradient(const Manifold& m, const Point& x, const Point& y) {
  std::array<Vec, 2> g{m.zero_tangent(), m.zero_tangent()};
  double d = m.dist(x.coords, y.coords);
  if (d == 0.0) return g;
  try {
    g[0] = -m.log_map(x.coords, y.coords) / d;
    g[1] = -m.log_map(y.coords, x.coords) / d;
  } catch (const CutLocusError&) {
    g = {m.zero_tangent(), m.zero_tangent()};
  }
  return g;
}

std::array<Vec, 3> second_diff_gradient(const Manifold& m, const Point& x, const Point& y,
                                        const Point& z) {
  std::array<Vec, 3> g{m.zero_tangent(), m.zero_tangent(), m.zero_tangent()};
  bool tie = false;
  Point c = principal_midpoint(m, x, z, &tie);
  if (tie) return g;
  auto [gc, gy] = dist_gradient(m, c, y);
  g[1] = gy;
  if (gc.isZero(0.0)) return g;
  g[0] = pull_back(m, x, z, gc);
  g[2] = pull_back(m, z, x, gc);
  return g;
}

std::array<Vec, 4> mixed_second_diff_gradient(const Manifold& m, const Point& x, const Point& y,
                                              const Point& z, const Point& w) {
  std::array<Vec, 4> g{m.zero_tangent(), m.zero_tangent(), m.zero_tangent(), m.zero_tangent()};
  bool tie = false;
  Point c1 = principal_midpoint(m, x, z, &tie);
  Point c2 = principal_midpoint(m, y, w, &tie);
  if (tie) return g;
  auto [g1, g2] = dist_gradient(m, c1, c2);
  if (g1.isZero(0.0)) return g;
  g[0] = pull_back(m, x, z, g1);
  g[2] = pull_back(m, z, x, g1);
  g[1] = pull_back(m, y, w, g2);
  g[3] = pull_back(m, w, y, g2);
  return g;
}

DifferenceResidual dist_residual(const Manifold& m, const Point& x, const Point& y) {
  const int d = m.dimension();
  auto basis = m.tangent_basis(x.coords);
  DifferenceResidual r{coords_in(m, x.coords, basis, m.log_any(x.coords, y.coords)),
                       Eigen::MatrixXd::Zero(d, 2 * d)};
  try {
    std::vector<TangentVector> id;
    for (const Vec& e : basis) id.push_back({x, e});
    log_base_block(m, x, y, basis, id, r.jacobian, 0);
    log_arg_block(m, x, y, basis, r.jacobian, d);
  } catch (const CutLocusError&) {
    r.jacobian.setZero();
  }
  return r;
}

DifferenceResidual second_diff_residual(const Manifold& m, const Point& x, const Point& y,
                                        const Point& z) {
  const int d = m.dimension();
  bool tie = false;
  Point c = principal_midpoint(m, x, z, &tie);
  auto basis = m.tangent_basis(c.coords);
  DifferenceResidual r{coords_in(m, c.coords, basis, m.log_any(c.coords, y.coords)),
                       Eigen::MatrixXd::Zero(d, 3 * d)};
  if (tie) return r;
  try {
    log_base_block(m, c, y, basis, midpoint_columns(m, x, z), r.jacobian, 0);
    log_arg_block(m, c, y, basis, r.jacobian, d);
    log_base_block(m, c, y, basis, midpoint_columns(m, z, x), r.jacobian, 2 * d);
  } catch (const CutLocusError&) {
    r.jacobian.setZero();
  }
  return r;
}

DifferenceResidual mixed_second_diff_residual(const Manifold& m, const Point& x, const Point& y,
                                              const Point& z, const Point& w) {
  const int d = m.dimension();
  bool tie = false;
  Point c1 = principal_midpoint(m, x, z, &tie);
  Point c2 = principal_midpoint(m, y, w, &tie);
  auto basis = m.tangent_basis(c1.coords);
  DifferenceResidual r{coords_in(m, c1.coords, basis, m.log_any(c1.coords, c2.coords)),
                       Eigen::MatrixXd::Zero(d, 4 * d)};
  if (tie) return r;
  try {
    log_base_block(m, c1, c2, basis, midpoint_columns(m, x, z), r.jacobian, 0);
    log_base_block(m, c1, c2, basis, midpoint_columns(m, z, x), r.jacobian, 2 * d);
    // Through c2: the LogArg differential at c2 applied to each midpoint column.
    for (int side = 0; side < 2; ++side) {
      auto cols = side == 0 ? midpoint_columns(m, y, w) : midpoint_columns(m, w, y);
      int col = side == 0 ? d : 3 * d;
      for (std::size_t j = 0; j < cols.size(); ++j)
        r.jacobian.col(col + static_cast<int>(j)) = coords_in(
            m, c1.coords, basis,
            differential(m, {K::LogArg}, c2, c1, TangentVector{c2, cols[j].coords}).coords);
    }
  } catch (const CutLocusError&) {
    r.jacobian.setZero();
  }
  return r;
}

DifferenceResidual stack_residuals(const Manifold& m, std::size_t n,
                                   const std::vector<DifferenceResidual>& parts,
                                   const std::vector<std::vector<int>>& args) {
  const int d = m.dimension();
  int rows = 0;
  for (const auto& p : parts) rows += static_cast<int>(p.value.size());
  DifferenceResidual out{Vec::Zero(rows), Eigen::MatrixXd::Zero(rows, d * static_cast<int>(n))};
  int row = 0;
  for (std::size_t t = 0; t < parts.size(); ++t) {
    const int k = static_cast<int>(parts[t].value.size());
    out.value.segment(row, k) = parts[t].value;
    for (std::size_t a = 0; a < args[t].size(); ++a)
      out.jacobian.block(row, args[t][a] * d, k, d) +=
          parts[t].jacobian.block(0, static_cast<int>(a) * d, k, d);
    row += k;
  }
  return out;
}

}  // namespace manivar
