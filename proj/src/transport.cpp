#include "manivar/transport.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace manivar {

namespace {

constexpr double kSeriesThreshold = 1e-8;
constexpr double kPoleThreshold = 1e-12;

double checked_sin(double s) {
  double v = std::sin(s);
  if (std::abs(v) < kPoleThreshold)
    throw SingularCoefficientError("Jacobi coefficient: sin(sqrt(kappa)) vanishes");
  return v;
}

bool takes_tangent(CoefficientKind k) {
  return k == CoefficientKind::ExpBase || k == CoefficientKind::ExpArg;
}

// Evaluates the sub-step of a ladder and tags cut-locus failures with its name.
template <typename F>
auto ladder_step(const char* name, F&& f) {
  try {
    return f();
  } catch (const CutLocusError& e) {
    throw e.with_step(name);
  }
}

struct Setup {
  JacobiFrame frame;
  double t_out;
  Point out_point;
};

Setup setup(const Manifold& m, const CoefficientCase& c, const Point& x, const Vec& direction,
            const Point* y) {
  Setup s;
  s.frame = jacobi_frame_along(m, TangentVector{x, direction});
  s.t_out = c.output_time();
  if (s.t_out == 0.0) {
    s.out_point = x;
  } else if (s.t_out == 1.0 && y != nullptr) {
    s.out_point = *y;
  } else {
    s.out_point = Point{m.exp_map(x.coords, s.t_out * direction)};
  }
  return s;
}

TangentVector apply(const Manifold& m, const CoefficientCase& c, const Setup& s,
                    const TangentVector& xi) {
  const Point& x = s.frame.x;
  if (m.is_flat()) {
    // Every kappa vanishes and transport is the identity in coordinates.
    return {s.out_point, alpha(c, 0.0) * xi.coords};
  }
  Vec out = Vec::Zero(m.tangent_size());
  for (std::size_t k = 0; k < s.frame.frame.size(); ++k) {
    const Vec& e = s.frame.frame[k].coords;
    double coeff = m.metric(x.coords, xi.coords, e) * alpha(c, s.frame.kappa[k]);
    if (coeff == 0.0) continue;
    out += coeff * m.transport_along(x.coords, s.frame.direction.coords, s.t_out, e);
  }
  return {s.out_point, out};
}

TangentVector apply_adjoint(const Manifold& m, const CoefficientCase& c, const Setup& s,
                            const TangentVector& w) {
  const Point& x = s.frame.x;
  if (m.is_flat()) return {x, alpha(c, 0.0) * w.coords};
  Vec out = Vec::Zero(m.tangent_size());
  for (std::size_t k = 0; k < s.frame.frame.size(); ++k) {
    const Vec& e = s.frame.frame[k].coords;
    Vec et = m.transport_along(x.coords, s.frame.direction.coords, s.t_out, e);
    double coeff = m.metric(s.out_point.coords, w.coords, et) * alpha(c, s.frame.kappa[k]);
    out += coeff * e;
  }
  return {x, out};
}

}  // namespace

TangentVector JacobiFrame::transported(const Manifold& m, std::size_t k, double t) const {
  return {Point{m.exp_map(x.coords, t * direction.coords)},
          m.transport_along(x.coords, direction.coords, t, frame.at(k).coords)};
}

JacobiFrame jacobi_frame(const Manifold& m, const Point& x, const Point& y) {
  if (m.dist(x.coords, y.coords) == 0.0)
    throw DegenerateGeodesicError("jacobi_frame: coincident points");
  return jacobi_frame_along(m, log(m, x, y));
}

JacobiFrame jacobi_frame_along(const Manifold& m, const TangentVector& u) {
  JacobiFrame f;
  f.x = u.base;
  f.direction = u;
  CurvatureFrame cf = m.curvature_frame(u.base.coords, u.coords);
  for (auto& v : cf.vectors) f.frame.push_back(TangentVector{u.base, std::move(v)});
  f.kappa = std::move(cf.kappa);
  return f;
}

double CoefficientCase::output_time() const {
  switch (kind) {
    case CoefficientKind::ExpBase:
    case CoefficientKind::LogArg:
    case CoefficientKind::ExpArg:
      return 1.0;
    case CoefficientKind::LogBase:
      return 0.0;
    case CoefficientKind::GeoFirst:
      return tau;
    case CoefficientKind::GeoSecond:
      return 1.0 - tau;
  }
  return 0.0;
}

double alpha(const CoefficientCase& c, double kappa) {
  const bool small = std::abs(kappa) < kSeriesThreshold;
  const double s = std::sqrt(std::abs(kappa));
  switch (c.kind) {
    case CoefficientKind::ExpBase:
      if (small) return 1.0 - kappa / 2.0;
      return kappa < 0 ? std::cosh(s) : std::cos(s);
    case CoefficientKind::LogBase:
      if (small) return -(1.0 - kappa / 3.0);
      return kappa < 0 ? -s * std::cosh(s) / std::sinh(s) : -s * std::cos(s) / checked_sin(s);
    case CoefficientKind::LogArg:
      if (small) return 1.0 + kappa / 6.0;
      return kappa < 0 ? s / std::sinh(s) : s / checked_sin(s);
    case CoefficientKind::GeoFirst:
    case CoefficientKind::GeoSecond: {
      const double a = c.kind == CoefficientKind::GeoFirst ? 1.0 - c.tau : c.tau;
      if (small) return a * (1.0 + kappa * (1.0 - a * a) / 6.0);
      return kappa < 0 ? std::sinh(s * a) / std::sinh(s) : std::sin(s * a) / checked_sin(s);
    }
    case CoefficientKind::ExpArg:
      if (small) return 1.0 - kappa / 6.0;
      return kappa < 0 ? std::sinh(s) / s : std::sin(s) / s;
  }
  throw std::invalid_argument("alpha: unknown coefficient case");
}

TangentVector differential(const Manifold& m, const CoefficientCase& c, const Point& x,
                           const Point& y, const TangentVector& xi) {
  if (takes_tangent(c.kind))
    throw std::invalid_argument("differential: this case takes a tangent vector, not a point");
  Setup s = setup(m, c, x, m.log_map(x.coords, y.coords), &y);
  return apply(m, c, s, xi);
}

TangentVector differential(const Manifold& m, const CoefficientCase& c, const Point& x,
                           const TangentVector& u, const TangentVector& xi) {
  if (!takes_tangent(c.kind))
    throw std::invalid_argument("differential: this case takes a point, not a tangent vector");
  Setup s = setup(m, c, x, u.coords, nullptr);
  return apply(m, c, s, xi);
}

TangentVector adjoint_differential(const Manifold& m, const CoefficientCase& c, const Point& x,
                                   const Point& y, const TangentVector& w) {
  if (takes_tangent(c.kind))
    throw std::invalid_argument("adjoint_differential: this case takes a tangent vector");
  Setup s = setup(m, c, x, m.log_map(x.coords, y.coords), &y);
  return apply_adjoint(m, c, s, w);
}

TangentVector adjoint_differential(const Manifold& m, const CoefficientCase& c, const Point& x,
                                   const TangentVector& u, const TangentVector& w) {
  if (!takes_tangent(c.kind))
    throw std::invalid_argument("adjoint_differential: this case takes a point");
  Setup s = setup(m, c, x, u.coords, nullptr);
  return apply_adjoint(m, c, s, w);
}

TangentVector transport_closed(const Manifold& m, const Point& x, const Point& y,
                               const TangentVector& xi) {
  Vec v = m.log_map(x.coords, y.coords);
  return {y, m.transport_along(x.coords, v, 1.0, xi.coords)};
}

TangentVector transport_pole(const Manifold& m, const Point& x, const Point& y,
                             const TangentVector& xi) {
  Point a = ladder_step("exp_x(xi)", [&] { return Point{m.exp_map(x.coords, xi.coords)}; });
  Point mid = ladder_step("midpoint", [&] { return geodesic_point(m, x, y, 0.5); });
  Point b = ladder_step("doubled geodesic", [&] { return geodesic_point(m, a, mid, 2.0); });
  return ladder_step("log_y", [&] { return TangentVector{y, -m.log_map(y.coords, b.coords)}; });
}

TangentVector transport_schild(const Manifold& m, const Point& x, const Point& y,
                               const TangentVector& xi) {
  Point a = ladder_step("exp_x(xi)", [&] { return Point{m.exp_map(x.coords, xi.coords)}; });
  Point c = ladder_step("midpoint", [&] { return geodesic_point(m, y, a, 0.5); });
  Point b = ladder_step("doubled geodesic", [&] { return geodesic_point(m, x, c, 2.0); });
  return ladder_step("log_y", [&] { return TangentVector{y, m.log_map(y.coords, b.coords)}; });
}

}  // namespace manivar
