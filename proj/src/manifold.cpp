#include "manivar/manifold.hpp"

#include <stdexcept>

namespace manivar {

namespace {

void require_same_size(const Manifold& m, const Point& x, const char* what) {
  if (x.coords.size() != m.chart_size())
    throw std::invalid_argument(std::string(what) + ": point does not belong to " +
                                m.tag().to_string());
}

void require_base(const Point& x, const TangentVector& v, const char* what) {
  if (!same_point(x, v.base))
    throw std::invalid_argument(std::string(what) + ": tangent vector is not based at the point");
}

}  // namespace

bool same_point(const Point& a, const Point& b) {
  if (a.coords.size() != b.coords.size()) return false;
  if (a.coords.size() == 0) return true;
  double scale = std::max(1.0, a.coords.cwiseAbs().maxCoeff());
  return (a.coords - b.coords).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

void check_point(const Manifold& m, const Point& x) { m.check_point(x.coords); }

void check_tangent(const Manifold& m, const TangentVector& v) {
  m.check_point(v.base.coords);
  m.check_tangent(v.base.coords, v.coords);
}

double distance(const Manifold& m, const Point& x, const Point& y) {
  require_same_size(m, x, "distance");
  require_same_size(m, y, "distance");
  return m.dist(x.coords, y.coords);
}

Point exp(const Manifold& m, const Point& x, const TangentVector& v) {
  require_same_size(m, x, "exp");
  require_base(x, v, "exp");
  if (v.coords.size() != m.tangent_size())
    throw std::invalid_argument("exp: tangent vector has wrong size");
  return {m.exp_map(x.coords, v.coords)};
}

TangentVector log(const Manifold& m, const Point& x, const Point& y) {
  require_same_size(m, x, "log");
  require_same_size(m, y, "log");
  if (x.coords == y.coords) return zero_vector(m, x);
  return {x, m.log_map(x.coords, y.coords)};
}

Point geodesic_point(const Manifold& m, const Point& x, const Point& y, double t) {
  require_same_size(m, x, "geodesic_point");
  require_same_size(m, y, "geodesic_point");
  if (t == 0.0) return x;
  if (t == 1.0) return y;
  return {m.exp_map(x.coords, t * m.log_map(x.coords, y.coords))};
}

double inner(const Manifold& m, const Point& x, const TangentVector& v, const TangentVector& w) {
  require_same_size(m, x, "inner");
  require_base(x, v, "inner");
  require_base(x, w, "inner");
  return m.metric(x.coords, v.coords, w.coords);
}

double norm(const Manifold& m, const TangentVector& v) { return m.norm(v.base.coords, v.coords); }

Point reflect(const Manifold& m, const Point& p, const Point& x) {
  require_same_size(m, p, "reflect");
  require_same_size(m, x, "reflect");
  return {m.exp_map(p.coords, -m.log_map(p.coords, x.coords))};
}

TangentVector zero_vector(const Manifold& m, const Point& x) { return {x, m.zero_tangent()}; }

TangentVector operator+(const TangentVector& a, const TangentVector& b) {
  if (!same_point(a.base, b.base)) throw std::invalid_argument("adding tangent vectors at different bases");
  return {a.base, a.coords + b.coords};
}

TangentVector operator-(const TangentVector& a, const TangentVector& b) {
  if (!same_point(a.base, b.base))
    throw std::invalid_argument("subtracting tangent vectors at different bases");
  return {a.base, a.coords - b.coords};
}

TangentVector operator-(const TangentVector& a) { return {a.base, -a.coords}; }

TangentVector operator*(double s, const TangentVector& a) { return {a.base, s * a.coords}; }

}  // namespace manivar
