#include "manivar/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "manivar/differences.hpp"
#include "manivar/parallel.hpp"
#include "manivar/transport.hpp"

namespace manivar {

// ---------------------------------------------------------------- config

double Phi::value(double t) const {
  switch (kind) {
    case PhiKind::Phi1:
      return std::sqrt(t * t + eps * eps);
    case PhiKind::Phi2:
      return std::abs(t) < eps ? 0.5 * t * t : eps * std::abs(t) - 0.5 * eps * eps;
    case PhiKind::Phi3:
      return 1.0 - std::exp(-eps * eps * t * t);
  }
  return 0.0;
}

double Phi::weight(double t) const {
  switch (kind) {
    case PhiKind::Phi1:
      return 0.5 / std::sqrt(t * t + eps * eps);
    case PhiKind::Phi2:
      return std::abs(t) < eps ? 0.5 : eps / (2.0 * std::abs(t));
    case PhiKind::Phi3:
      return eps * eps * std::exp(-eps * eps * t * t);
  }
  return 0.0;
}

void ModelConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
  if (p != 1 && p != 2) throw std::invalid_argument("p must be 1 or 2");
  if (!(phi.eps > 0.0)) throw std::invalid_argument("eps must be positive");
}

ModelKind parse_model(const std::string& name) {
  if (name == "tv") return ModelKind::TV;
  if (name == "tvphi") return ModelKind::TVphi;
  if (name == "tv2") return ModelKind::TV2only;
  if (name == "tvtv2") return ModelKind::TVTV2;
  if (name == "tgv") return ModelKind::TGV;
  throw std::invalid_argument("unknown model '" + name + "' (expected tv, tvphi, tv2, tvtv2, tgv)");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::TV:
      return "tv";
    case ModelKind::TVphi:
      return "tvphi";
    case ModelKind::TV2only:
      return "tv2";
    case ModelKind::TVTV2:
      return "tvtv2";
    case ModelKind::TGV:
      return "tgv";
  }
  return "";
}

// ---------------------------------------------------------------- terms

std::vector<std::size_t> RegularizerTerm::footprint() const {
  std::vector<std::size_t> out;
  for (const Difference& d : parts)
    for (int k = 0; k < d.arity(); ++k)
      if (std::find(out.begin(), out.end(), d.pixels[k]) == out.end()) out.push_back(d.pixels[k]);
  return out;
}

namespace {

std::size_t at(int n2, int i1, int i2) { return static_cast<std::size_t>(i1) * n2 + i2; }

Difference first(std::size_t a, std::size_t b) {
  return {Difference::Kind::First, {a, b, 0, 0}};
}

// The d_xx, d_yy, d_xy, d_yx stencils present at (i1, i2).
std::vector<Difference> second_stencils(int n1, int n2, int i1, int i2) {
  std::vector<Difference> out;
  const bool x_in = i1 > 0 && i1 + 1 < n1;
  const bool y_in = i2 > 0 && i2 + 1 < n2;
  const std::size_t i = at(n2, i1, i2);
  if (x_in)
    out.push_back({Difference::Kind::Second, {at(n2, i1 + 1, i2), i, at(n2, i1 - 1, i2), 0}});
  if (y_in)
    out.push_back({Difference::Kind::Second, {at(n2, i1, i2 + 1), i, at(n2, i1, i2 - 1), 0}});
  // Mixed differences: midpoints of the two diagonals of the 2 x 2 block.
  if (y_in && i1 + 1 < n1)
    out.push_back({Difference::Kind::Mixed,
                   {i, at(n2, i1 + 1, i2), at(n2, i1 + 1, i2 - 1), at(n2, i1, i2 - 1)}});
  if (x_in && i2 + 1 < n2)
    out.push_back({Difference::Kind::Mixed,
                   {i, at(n2, i1, i2 + 1), at(n2, i1 - 1, i2 + 1), at(n2, i1 - 1, i2)}});
  return out;
}

}  // namespace

std::vector<RegularizerTerm> tv_terms(int n1, int n2, int p, double weight) {
  std::vector<RegularizerTerm> out;
  if (p == 1) {
    for (int i1 = 0; i1 + 1 < n1; ++i1)
      for (int i2 = 0; i2 < n2; ++i2)
        out.push_back({weight, 1, TermFamily::X, {first(at(n2, i1, i2), at(n2, i1 + 1, i2))}});
    for (int i1 = 0; i1 < n1; ++i1)
      for (int i2 = 0; i2 + 1 < n2; ++i2)
        out.push_back({weight, 1, TermFamily::Y, {first(at(n2, i1, i2), at(n2, i1, i2 + 1))}});
    return out;
  }
  for (int i1 = 0; i1 < n1; ++i1)
    for (int i2 = 0; i2 < n2; ++i2) {
      RegularizerTerm t{weight, 2, TermFamily::Group, {}};
      if (i1 + 1 < n1) t.parts.push_back(first(at(n2, i1, i2), at(n2, i1 + 1, i2)));
      if (i2 + 1 < n2) t.parts.push_back(first(at(n2, i1, i2), at(n2, i1, i2 + 1)));
      if (!t.parts.empty()) out.push_back(std::move(t));
    }
  return out;
}

std::vector<RegularizerTerm> tv2_terms(int n1, int n2, int p, double weight) {
  std::vector<RegularizerTerm> out;
  for (int i1 = 0; i1 < n1; ++i1)
    for (int i2 = 0; i2 < n2; ++i2) {
      auto stencils = second_stencils(n1, n2, i1, i2);
      if (p == 1) {
        for (const Difference& d : stencils)
          out.push_back({weight, 1, TermFamily::SecondOrder, {d}});
      } else if (!stencils.empty()) {
        out.push_back({weight, 2, TermFamily::SecondOrder, std::move(stencils)});
      }
    }
  return out;
}

std::vector<RegularizerTerm> regularizer_terms(const ModelConfig& c, int n1, int n2) {
  switch (c.model) {
    case ModelKind::TV:
      return tv_terms(n1, n2, c.p, c.alpha);
    case ModelKind::TV2only:
      return tv2_terms(n1, n2, c.p, c.alpha);
    case ModelKind::TVTV2: {
      auto out = tv_terms(n1, n2, c.p, c.alpha * c.beta);
      auto second = tv2_terms(n1, n2, c.p, c.alpha * (1.0 - c.beta));
      out.insert(out.end(), second.begin(), second.end());
      return out;
    }
    default:
      throw std::invalid_argument("model " + to_string(c.model) +
                                  " is not a sum of difference terms");
  }
}

double difference_value(const Manifold& m, const std::vector<Point>& u, const Difference& d,
                        bool* tie) {
  const auto& q = d.pixels;
  switch (d.kind) {
    case Difference::Kind::First:
      return m.dist(u[q[0]].coords, u[q[1]].coords);
    case Difference::Kind::Second: {
      auto v = second_diff(m, u[q[0]], u[q[1]], u[q[2]]);
      if (tie && v.tie) *tie = true;
      return v.value;
    }
    case Difference::Kind::Mixed: {
      auto v = mixed_second_diff(m, u[q[0]], u[q[1]], u[q[2]], u[q[3]]);
      if (tie && v.tie) *tie = true;
      return v.value;
    }
  }
  return 0.0;
}

double term_value(const Manifold& m, const std::vector<Point>& u, const RegularizerTerm& t) {
  double s = 0.0;
  for (const Difference& d : t.parts) {
    double h = difference_value(m, u, d);
    s += t.p == 1 ? h : h * h;
  }
  return t.weight * (t.p == 1 ? s : std::sqrt(s));
}

void accumulate_term_gradient(const Manifold& m, const std::vector<Point>& u,
                              const RegularizerTerm& t, std::vector<Vec>& grad) {
  std::vector<double> coeff(t.parts.size(), t.weight);
  if (t.p == 2) {
    std::vector<double> h(t.parts.size());
    double s = 0.0;
    for (std::size_t k = 0; k < t.parts.size(); ++k) {
      h[k] = difference_value(m, u, t.parts[k]);
      s += h[k] * h[k];
    }
    const double norm = std::sqrt(s);
    for (std::size_t k = 0; k < t.parts.size(); ++k)
      coeff[k] = norm > 0.0 ? t.weight * h[k] / norm : 0.0;
  }
  for (std::size_t k = 0; k < t.parts.size(); ++k) {
    if (coeff[k] == 0.0) continue;
    const Difference& d = t.parts[k];
    const auto& q = d.pixels;
    switch (d.kind) {
      case Difference::Kind::First: {
        auto g = dist_gradient(m, u[q[0]], u[q[1]]);
        for (int j = 0; j < 2; ++j) grad[q[j]] += coeff[k] * g[j];
        break;
      }
      case Difference::Kind::Second: {
        auto g = second_diff_gradient(m, u[q[0]], u[q[1]], u[q[2]]);
        for (int j = 0; j < 3; ++j) grad[q[j]] += coeff[k] * g[j];
        break;
      }
      case Difference::Kind::Mixed: {
        auto g = mixed_second_diff_gradient(m, u[q[0]], u[q[1]], u[q[2]], u[q[3]]);
        for (int j = 0; j < 4; ++j) grad[q[j]] += coeff[k] * g[j];
        break;
      }
    }
  }
}

double terms_value(const Manifold& m, const std::vector<Point>& u,
                   const std::vector<RegularizerTerm>& terms) {
  std::vector<double> values(terms.size());
  parallel_for(terms.size(), [&](std::size_t k) { values[k] = term_value(m, u, terms[k]); });
  return pairwise_sum(values);
}

// ---------------------------------------------------------------- functionals

double data_term(const ManifoldImage& u, const ManifoldImage& f) {
  u.require_compatible(f, "data term");
  const Manifold& m = u.manifold();
  std::vector<double> values(u.size());
  parallel_for(u.size(), [&](std::size_t i) {
    double d = m.dist(u[i].coords, f[i].coords);
    values[i] = 0.5 * d * d;
  });
  return pairwise_sum(values);
}

namespace {

Vec checked_log(const Manifold& m, const Point& x, const Point& y, std::size_t index) {
  try {
    return m.log_map(x.coords, y.coords);
  } catch (const CutLocusError& e) {
    throw e.with_index(index);
  }
}

}  // namespace

TangentField forward_differences(const ManifoldImage& u) {
  TangentField out = TangentField::zeros(u);
  const Manifold& m = u.manifold();
  const int n1 = u.n1(), n2 = u.n2();
  parallel_for(u.size(), [&](std::size_t i) {
    const int i1 = static_cast<int>(i) / n2, i2 = static_cast<int>(i) % n2;
    if (i1 + 1 < n1) out.x[i] = checked_log(m, u[i], u[u.index(i1 + 1, i2)], i);
    if (i2 + 1 < n2) out.y[i] = checked_log(m, u[i], u[u.index(i1, i2 + 1)], i);
  });
  return out;
}

double tv(const ManifoldImage& u, int p) {
  if (p != 1 && p != 2) throw std::invalid_argument("p must be 1 or 2");
  return terms_value(u.manifold(), u.pixels(), tv_terms(u.n1(), u.n2(), p));
}

double tv_phi(const ManifoldImage& u, const Phi& phi, int p) {
  if (p != 1 && p != 2) throw std::invalid_argument("p must be 1 or 2");
  if (!(phi.eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const Manifold& m = u.manifold();
  const int n1 = u.n1(), n2 = u.n2();
  std::vector<double> values(u.size());
  parallel_for(u.size(), [&](std::size_t i) {
    const int i1 = static_cast<int>(i) / n2, i2 = static_cast<int>(i) % n2;
    double dx = -1.0, dy = -1.0;
    if (i1 + 1 < n1) dx = m.dist(u[i].coords, u[u.index(i1 + 1, i2)].coords);
    if (i2 + 1 < n2) dy = m.dist(u[i].coords, u[u.index(i1, i2 + 1)].coords);
    if (p == 1) {
      values[i] = (dx >= 0 ? phi.value(dx) : 0.0) + (dy >= 0 ? phi.value(dy) : 0.0);
    } else {
      double s = (dx >= 0 ? dx * dx : 0.0) + (dy >= 0 ? dy * dy : 0.0);
      values[i] = phi.value(std::sqrt(s));
    }
  });
  return pairwise_sum(values);
}

std::array<double, 4> second_differences_at(const ManifoldImage& u, std::size_t i) {
  const int i1 = static_cast<int>(i) / u.n2(), i2 = static_cast<int>(i) % u.n2();
  std::array<double, 4> out{0, 0, 0, 0};
  const bool x_in = i1 > 0 && i1 + 1 < u.n1();
  const bool y_in = i2 > 0 && i2 + 1 < u.n2();
  // second_stencils emits the present stencils in the order xx, yy, xy, yx.
  int slot = 0;
  const bool present[4] = {x_in, y_in, y_in && i1 + 1 < u.n1(), x_in && i2 + 1 < u.n2()};
  auto stencils = second_stencils(u.n1(), u.n2(), i1, i2);
  for (int k = 0; k < 4; ++k) {
    if (!present[k]) continue;
    out[k] = difference_value(u.manifold(), u.pixels(), stencils[slot++]);
  }
  return out;
}

double tv2(const ManifoldImage& u, int p) {
  if (p != 1 && p != 2) throw std::invalid_argument("p must be 1 or 2");
  return terms_value(u.manifold(), u.pixels(), tv2_terms(u.n1(), u.n2(), p));
}

double tv_tv2(const ManifoldImage& u, double beta, int p) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
  return beta * tv(u, p) + (1.0 - beta) * tv2(u, p);
}

// ---------------------------------------------------------------- TGV

namespace {

using K = CoefficientKind;

TangentVector tv_of(const Point& base, const Vec& v) { return {base, v}; }

// One pole-ladder backward difference D = zeta_b - P_{a->b}(zeta_a)
// = zeta_b + log_b(gamma(exp_a(zeta_a), mid(a, b); 2)), with the
// intermediate points kept for the chain rule.
struct PoleDifference {
  Point a0, mid, b0;
  Vec value;
};

PoleDifference pole_difference(const Manifold& m, const Point& a, const Point& b,
                               const Vec& zeta_a, const Vec& zeta_b, std::size_t index) {
  PoleDifference d;
  d.a0 = {m.exp_map(a.coords, zeta_a)};
  d.mid = {m.exp_map(a.coords, 0.5 * checked_log(m, a, b, index))};
  d.b0 = {m.exp_map(d.a0.coords, 2.0 * checked_log(m, d.a0, d.mid, index))};
  d.value = zeta_b + checked_log(m, b, d.b0, index);
  return d;
}

// Adds the gradients of <w, D> with respect to a, b (xi carried parallel),
// zeta_a and zeta_b.
void pole_difference_adjoint(const Manifold& m, const Point& a, const Point& b,
                             const Vec& zeta_a, const PoleDifference& d, const Vec& w,
                             Vec* ga, Vec* gb, Vec& gzeta_a, Vec& gzeta_b) {
  gzeta_b += w;
  const Vec c_b0 = adjoint_differential(m, {K::LogArg}, d.b0, b, tv_of(b, w)).coords;
  const Vec c_a0 = adjoint_differential(m, {K::GeoFirst, 2.0}, d.a0, d.mid, tv_of(d.b0, c_b0)).coords;
  const TangentVector za{a, zeta_a};
  gzeta_a += adjoint_differential(m, {K::ExpArg}, a, za, tv_of(d.a0, c_a0)).coords;
  if (!ga) return;
  const Vec c_mid =
      adjoint_differential(m, {K::GeoSecond, 2.0}, d.mid, d.a0, tv_of(d.b0, c_b0)).coords;
  *gb += adjoint_differential(m, {K::LogBase}, b, d.b0, tv_of(b, w)).coords;
  *ga += adjoint_differential(m, {K::GeoFirst, 0.5}, a, b, tv_of(d.mid, c_mid)).coords;
  *gb += adjoint_differential(m, {K::GeoSecond, 0.5}, b, a, tv_of(d.mid, c_mid)).coords;
  *ga += adjoint_differential(m, {K::ExpBase}, a, za, tv_of(d.a0, c_a0)).coords;
}

// Per-pixel share of the TGV functional: the R1 norms and R2 backward
// differences anchored at pixel i, with gradient contributions to the pixel
// and its neighbors stored separately so they can be gathered deterministically.
struct PixelShare {
  double r1 = 0.0, r2 = 0.0, value = 0.0;
  Vec gu_self, gu_xf, gu_yf, gu_xb, gu_yb;  // u at i, forward and backward neighbors
  Vec gx_self, gy_self, gx_xb, gy_xb, gx_yb, gy_yb;
};

// Smoothed norm of a group of vectors: per vector for p = 1, joint for p = 2.
// Returns the value and writes the coefficient c_k with grad = c_k D_k.
double smoothed_group(const std::vector<double>& sq, int p, double eps,
                      std::vector<double>& coeff) {
  coeff.assign(sq.size(), 0.0);
  if (p == 1) {
    double s = 0.0;
    for (std::size_t k = 0; k < sq.size(); ++k) {
      double n = std::sqrt(sq[k] + eps * eps);
      s += n;
      coeff[k] = n > 0.0 ? 1.0 / n : 0.0;
    }
    return s;
  }
  double t = eps * eps;
  for (double v : sq) t += v;
  double n = std::sqrt(t);
  for (auto& c : coeff) c = n > 0.0 ? 1.0 / n : 0.0;
  return n;
}

}  // namespace

double tgv_smoothed(const TangentField& xi, double beta, int p, double eps,
                    std::vector<Vec>* grad_u, TgvGradient* grad_xi) {
  if (p != 1 && p != 2) throw std::invalid_argument("p must be 1 or 2");
  const ManifoldImage& u = xi.base;
  const Manifold& m = u.manifold();
  const int n1 = u.n1(), n2 = u.n2();
  const bool want = grad_u || grad_xi;
  const Vec zero = m.zero_tangent();
  std::vector<PixelShare> shares(u.size());

  parallel_for(u.size(), [&](std::size_t i) {
    PixelShare& s = shares[i];
    const int i1 = static_cast<int>(i) / n2, i2 = static_cast<int>(i) % n2;
    s.gu_self = s.gu_xf = s.gu_yf = s.gu_xb = s.gu_yb = zero;
    s.gx_self = s.gy_self = s.gx_xb = s.gy_xb = s.gx_yb = s.gy_yb = zero;

    // R1: |grad_x u_i - xi_1|, |grad_y u_i - xi_2|.
    const bool has_x = i1 + 1 < n1, has_y = i2 + 1 < n2;
    const std::size_t jx = has_x ? u.index(i1 + 1, i2) : i, jy = has_y ? u.index(i1, i2 + 1) : i;
    Vec d1 = (has_x ? checked_log(m, u[i], u[jx], i) : zero) - xi.x[i];
    Vec d2 = (has_y ? checked_log(m, u[i], u[jy], i) : zero) - xi.y[i];
    std::vector<double> coeff;
    double r1 = smoothed_group({m.metric(u[i].coords, d1, d1), m.metric(u[i].coords, d2, d2)}, p,
                               eps, coeff);
    s.r1 = r1;
    if (want) {
      Vec w1 = beta * coeff[0] * d1, w2 = beta * coeff[1] * d2;
      s.gx_self -= w1;
      s.gy_self -= w2;
      if (grad_u) {
        if (has_x) {
          s.gu_self += adjoint_differential(m, {K::LogBase}, u[i], u[jx], tv_of(u[i], w1)).coords;
          s.gu_xf += adjoint_differential(m, {K::LogArg}, u[jx], u[i], tv_of(u[i], w1)).coords;
        }
        if (has_y) {
          s.gu_self += adjoint_differential(m, {K::LogBase}, u[i], u[jy], tv_of(u[i], w2)).coords;
          s.gu_yf += adjoint_differential(m, {K::LogArg}, u[jy], u[i], tv_of(u[i], w2)).coords;
        }
      }
    }

    // R2: pole-ladder backward differences of xi_1 and xi_2 in x and y.
    struct Item {
      std::size_t a;
      const std::vector<Vec>* field;
      bool x_dir;
      PoleDifference d;
    };
    std::vector<Item> items;
    if (i1 > 0 && i1 + 1 < n1) {
      std::size_t a = u.index(i1 - 1, i2);
      items.push_back({a, &xi.x, true, pole_difference(m, u[a], u[i], xi.x[a], xi.x[i], i)});
      items.push_back({a, &xi.y, true, pole_difference(m, u[a], u[i], xi.y[a], xi.y[i], i)});
    }
    if (i2 > 0 && i2 + 1 < n2) {
      std::size_t a = u.index(i1, i2 - 1);
      items.push_back({a, &xi.x, false, pole_difference(m, u[a], u[i], xi.x[a], xi.x[i], i)});
      items.push_back({a, &xi.y, false, pole_difference(m, u[a], u[i], xi.y[a], xi.y[i], i)});
    }
    if (!items.empty()) {
      std::vector<double> sq;
      for (const Item& it : items) sq.push_back(m.metric(u[i].coords, it.d.value, it.d.value));
      s.r2 = smoothed_group(sq, p, eps, coeff);
      if (want) {
        for (std::size_t k = 0; k < items.size(); ++k) {
          const Item& it = items[k];
          const bool first_field = it.field == &xi.x;
          Vec w = (1.0 - beta) * coeff[k] * it.d.value;
          Vec& gzb = first_field ? s.gx_self : s.gy_self;
          Vec& gza = it.x_dir ? (first_field ? s.gx_xb : s.gy_xb) : (first_field ? s.gx_yb : s.gy_yb);
          Vec* ga = grad_u ? (it.x_dir ? &s.gu_xb : &s.gu_yb) : nullptr;
          pole_difference_adjoint(m, u[it.a], u[i], (*it.field)[it.a], it.d, w, ga, &s.gu_self,
                                  gza, gzb);
        }
      }
    }
    s.value = beta * s.r1 + (1.0 - beta) * s.r2;
  });

  if (want) {
    if (grad_u) grad_u->assign(u.size(), zero);
    if (grad_xi) *grad_xi = {{}, std::vector<Vec>(u.size(), zero), std::vector<Vec>(u.size(), zero)};
    for (std::size_t i = 0; i < u.size(); ++i) {
      const PixelShare& s = shares[i];
      const int i1 = static_cast<int>(i) / n2, i2 = static_cast<int>(i) % n2;
      if (grad_u) {
        (*grad_u)[i] += s.gu_self;
        if (i1 + 1 < n1) (*grad_u)[u.index(i1 + 1, i2)] += s.gu_xf;
        if (i2 + 1 < n2) (*grad_u)[u.index(i1, i2 + 1)] += s.gu_yf;
        if (i1 > 0) (*grad_u)[u.index(i1 - 1, i2)] += s.gu_xb;
        if (i2 > 0) (*grad_u)[u.index(i1, i2 - 1)] += s.gu_yb;
      }
      if (grad_xi) {
        grad_xi->x[i] += s.gx_self;
        grad_xi->y[i] += s.gy_self;
        if (i1 > 0) {
          grad_xi->x[u.index(i1 - 1, i2)] += s.gx_xb;
          grad_xi->y[u.index(i1 - 1, i2)] += s.gy_xb;
        }
        if (i2 > 0) {
          grad_xi->x[u.index(i1, i2 - 1)] += s.gx_yb;
          grad_xi->y[u.index(i1, i2 - 1)] += s.gy_yb;
        }
      }
    }
  }
  std::vector<double> values(shares.size());
  for (std::size_t i = 0; i < shares.size(); ++i) values[i] = shares[i].value;
  return pairwise_sum(values);
}

TgvTerms tgv_terms(const TangentField& xi, int p) {
  // beta = 1 and beta = 0 isolate the two sums.
  return {tgv_smoothed(xi, 1.0, p, 0.0, nullptr, nullptr),
          tgv_smoothed(xi, 0.0, p, 0.0, nullptr, nullptr)};
}

namespace {

double field_inner(const ManifoldImage& u, const std::vector<Vec>& a1, const std::vector<Vec>& a2,
                   const std::vector<Vec>& b1, const std::vector<Vec>& b2) {
  std::vector<double> v(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    v[i] = u.manifold().metric(u[i].coords, a1[i], b1[i]) +
           u.manifold().metric(u[i].coords, a2[i], b2[i]);
  return pairwise_sum(v);
}

}  // namespace

TgvResult tgv(const ManifoldImage& u, double beta, int p, const TgvOptions& options) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
  if (p != 1 && p != 2) throw std::invalid_argument("p must be 1 or 2");

  // Two feasible starts: xi = 0 (value beta TV) and xi = grad u.
  TgvResult best{0.0, TangentField::zeros(u), true};
  best.value = tgv_smoothed(best.xi, beta, p, 0.0, nullptr, nullptr);
  TangentField grad_u = forward_differences(u);
  double v_grad = tgv_smoothed(grad_u, beta, p, 0.0, nullptr, nullptr);
  if (v_grad < best.value) best = {v_grad, grad_u, true};
  if (best.value == 0.0) return best;

  TangentField xi = best.xi;
  bool converged = false;
  for (double eps : options.smoothing) {
    TgvGradient g;
    double f = tgv_smoothed(xi, beta, p, eps, nullptr, &g);
    double step = 1.0;
    TgvGradient g_prev;
    TangentField xi_prev = xi;
    converged = false;
    for (int it = 0; it < options.max_iterations; ++it) {
      const double gg = field_inner(u, g.x, g.y, g.x, g.y);
      if (std::sqrt(gg) <= options.gradient_tolerance) {
        converged = true;
        break;
      }
      if (it > 0) {
        // Barzilai-Borwein step from the last displacement.
        std::vector<Vec> sx(u.size()), sy(u.size()), yx(u.size()), yy(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
          sx[i] = xi.x[i] - xi_prev.x[i];
          sy[i] = xi.y[i] - xi_prev.y[i];
          yx[i] = g.x[i] - g_prev.x[i];
          yy[i] = g.y[i] - g_prev.y[i];
        }
        double sy_inner = field_inner(u, sx, sy, yx, yy);
        double ss = field_inner(u, sx, sy, sx, sy);
        step = sy_inner > 0.0 ? ss / sy_inner : 2.0 * step;
      }
      TangentField trial = xi;
      double f_trial = f;
      bool accepted = false;
      for (int k = 0; k < 60; ++k) {
        for (std::size_t i = 0; i < u.size(); ++i) {
          trial.x[i] = xi.x[i] - step * g.x[i];
          trial.y[i] = xi.y[i] - step * g.y[i];
        }
        f_trial = tgv_smoothed(trial, beta, p, eps, nullptr, nullptr);
        if (f_trial <= f - 1e-4 * step * gg) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        converged = true;  // no descent left at this smoothing level
        break;
      }
      xi_prev = xi;
      g_prev = g;
      xi = trial;
      const double f_old = f;
      f = tgv_smoothed(xi, beta, p, eps, nullptr, &g);
      if (std::abs(f_old - f) <= 1e-14 * std::max(1.0, std::abs(f))) {
        converged = true;
        break;
      }
    }
    double exact = tgv_smoothed(xi, beta, p, 0.0, nullptr, nullptr);
    if (exact < best.value) {
      best.value = exact;
      best.xi = xi;
    }
  }
  best.converged = converged;
  return best;
}

double objective(const ManifoldImage& u, const ManifoldImage& f, const ModelConfig& c) {
  c.validate();
  double data = data_term(u, f);
  switch (c.model) {
    case ModelKind::TVphi:
      return data + c.alpha * tv_phi(u, c.phi, c.p);
    case ModelKind::TGV:
      return data + c.alpha * tgv(u, c.beta, c.p).value;
    default:
      return data + terms_value(u.manifold(), u.pixels(), regularizer_terms(c, u.n1(), u.n2()));
  }
}

}  // namespace manivar
