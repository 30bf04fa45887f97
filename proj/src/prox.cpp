#include "manivar/prox.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "manivar/differences.hpp"

namespace manivar {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_lambda_power(double lambda, int p, const char* what) {
  if (!(lambda > 0.0)) throw std::invalid_argument(std::string(what) + ": lambda must be positive");
  if (p != 1 && p != 2) throw std::invalid_argument(std::string(what) + ": power must be 1 or 2");
}

Point along(const Manifold& m, const Point& x, const Point& y, double t) {
  if (t == 0.0) return x;
  return {m.exp_map(x.coords, t * m.log_any(x.coords, y.coords))};
}

Point angle(double a) { return {Vec::Constant(1, a)}; }

double tuple_objective(const Manifold& m, const std::vector<Point>& x, const std::vector<Point>& q,
                       double lambda, int p, const ResidualFn& r) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    double d = m.dist(x[k].coords, q[k].coords);
    s += 0.5 * d * d;
  }
  double h = r(q).value.norm();
  return s + lambda * (p == 1 ? h : h * h);
}

// argmin_v 1/2 |v - l|^2 + lambda |b0 + J v|^p for b0 = r - J l + J l, written
// in terms of b = r + J l. Returns v.
Vec linearized_prox(const Eigen::MatrixXd& jac, const Vec& r, const Vec& l, double lambda, int p) {
  const Vec b = r + jac * l;
  const Eigen::MatrixXd k = jac * jac.transpose();
  if (p == 2) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(k.rows(), k.cols()) + 2.0 * lambda * k;
    return l - 2.0 * lambda * jac.transpose() * a.ldlt().solve(b);
  }
  // Dual variable mu with |mu| <= lambda and v = l - J^T mu. Either the
  // linearized residual vanishes (K mu = b) or (K + rho I) mu = b with
  // |mu| = lambda for some rho > 0.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  const Vec sigma = es.eigenvalues().cwiseMax(0.0);
  const Vec beta = es.eigenvectors().transpose() * b;
  const double tiny = 1e-14 * std::max(1.0, sigma.maxCoeff());
  auto mu_norm2 = [&](double rho) {
    double s = 0.0;
    for (int i = 0; i < beta.size(); ++i) {
      double den = sigma[i] + rho;
      if (den <= tiny) {
        if (std::abs(beta[i]) > 1e-15) return std::numeric_limits<double>::infinity();
        continue;
      }
      s += beta[i] * beta[i] / (den * den);
    }
    return s;
  };
  double rho = 0.0;
  if (mu_norm2(0.0) > lambda * lambda) {
    double lo = 0.0, hi = 1.0;
    while (mu_norm2(hi) > lambda * lambda) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      double mid = 0.5 * (lo + hi);
      (mu_norm2(mid) > lambda * lambda ? lo : hi) = mid;
    }
    rho = hi;
  }
  Vec coef = Vec::Zero(beta.size());
  for (int i = 0; i < beta.size(); ++i) {
    double den = sigma[i] + rho;
    if (den > tiny) coef[i] = beta[i] / den;
  }
  return l - jac.transpose() * (es.eigenvectors() * coef);
}

}  // namespace

ProxResult prox_dist_to_point(const Manifold& m, const Point& x, const Point& y, double lambda,
                              int p) {
  check_lambda_power(lambda, p, "prox_dist_to_point");
  double t;
  if (p == 1) {
    double d = m.dist(x.coords, y.coords);
    t = d == 0.0 ? 0.0 : std::min(lambda / d, 1.0);
  } else {
    t = lambda / (1.0 + lambda);
  }
  ProxResult r;
  r.points = {t == 1.0 ? y : along(m, x, y, t)};
  return r;
}

ProxResult prox_dist_pair(const Manifold& m, const Point& x, const Point& y, double lambda, int p) {
  check_lambda_power(lambda, p, "prox_dist_pair");
  double t;
  if (p == 1) {
    double d = m.dist(x.coords, y.coords);
    t = d == 0.0 ? 0.0 : std::min(lambda / d, 0.5);
  } else {
    t = lambda / (1.0 + 2.0 * lambda);
  }
  ProxResult r;
  r.points = {along(m, x, y, t), along(m, y, x, t)};
  return r;
}

ProxResult prox_circle_diff(const std::vector<double>& x, double lambda, int order, int power) {
  check_lambda_power(lambda, power, "prox_circle_diff");
  std::vector<double> w;
  if (order == 1 && x.size() == 2) {
    w = {-1.0, 1.0};
  } else if (order == 2 && x.size() == 3) {
    w = {1.0, -2.0, 1.0};
  } else if (order == 11 && x.size() == 4) {
    w = {1.0, -1.0, 1.0, -1.0};
  } else {
    throw std::invalid_argument(
        "prox_circle_diff: order 1 takes 2 angles, order 2 takes 3, order 11 takes 4");
  }
  double ip = 0.0, wn2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    ip += x[k] * w[k];
    wn2 += w[k] * w[k];
  }
  const double a = wrap_angle(ip);
  const double s = a > 0 ? 1.0 : (a < 0 ? -1.0 : 0.0);
  const bool boundary = std::abs(a) >= kPi - 1e-12;

  auto shifted = [&](double shift) {
    std::vector<Point> out;
    for (std::size_t k = 0; k < x.size(); ++k) out.push_back(angle(wrap_angle(x[k] + shift * w[k])));
    return out;
  };

  ProxResult r;
  double shift;
  if (power == 1) {
    shift = boundary ? s * std::min(lambda, kPi / wn2) : -s * std::min(lambda, std::abs(a) / wn2);
  } else {
    shift = boundary ? lambda * kPi / (1.0 + lambda * wn2) : -lambda * a / (1.0 + lambda * wn2);
  }
  r.points = shifted(shift);
  if (boundary) {
    r.multivalued = true;
    r.alternatives = shifted(-shift);
  }
  return r;
}

ProxResult prox_circle_data(double x, double y, double lambda) {
  check_lambda_power(lambda, 2, "prox_circle_data");
  double v = std::abs(x - y) > kPi ? (x > y ? 1.0 : -1.0) : 0.0;
  ProxResult r;
  r.points = {angle(wrap_angle((x + lambda * y) / (1.0 + lambda) +
                               lambda / (1.0 + lambda) * 2.0 * kPi * v))};
  return r;
}

ProxResult prox_numerical(const Manifold& m, const std::vector<Point>& x, double lambda, int p,
                          const ResidualFn& r, const NumericalProxOptions& opt) {
  check_lambda_power(lambda, p, "prox_numerical");
  const std::size_t n = x.size();
  const int d = m.dimension();
  ProxResult out;
  out.points = x;
  out.converged = false;
  double f_cur = tuple_objective(m, x, x, lambda, p, r);

  for (int it = 0; it < opt.max_iterations; ++it) {
    const std::vector<Point>& q = out.points;
    out.iterations = it + 1;
    std::vector<std::vector<Vec>> bases(n);
    Vec l(d * static_cast<int>(n));
    for (std::size_t k = 0; k < n; ++k) {
      bases[k] = m.tangent_basis(q[k].coords);
      Vec lk = m.log_any(q[k].coords, x[k].coords);
      for (int j = 0; j < d; ++j) l[static_cast<int>(k) * d + j] = m.metric(q[k].coords, lk, bases[k][j]);
    }
    DifferenceResidual res = r(q);
    Vec v = linearized_prox(res.jacobian, res.value, l, lambda, p);
    if (v.norm() <= opt.step_tolerance) {
      out.converged = true;
      break;
    }
    std::vector<Vec> dir(n, m.zero_tangent());
    for (std::size_t k = 0; k < n; ++k)
      for (int j = 0; j < d; ++j) dir[k] += v[static_cast<int>(k) * d + j] * bases[k][j];

    bool accepted = false;
    for (double t = 1.0; t > 1e-12; t *= opt.backtrack) {
      std::vector<Point> trial(n);
      for (std::size_t k = 0; k < n; ++k) trial[k] = {m.exp_map(q[k].coords, t * dir[k])};
      double f_trial = tuple_objective(m, x, trial, lambda, p, r);
      if (f_trial < f_cur) {
        out.points = std::move(trial);
        f_cur = f_trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No decrease along a short step means rounding at a minimizer.
      out.converged = v.norm() <= 1e-6;
      break;
    }
  }
  return out;
}

ProxResult prox_second_order(const Manifold& m, const Point& x, const Point& y, const Point& z,
                             double lambda, int p) {
  check_lambda_power(lambda, p, "prox_second_order");
  if (m.tag().kind == ManifoldTag::Kind::Circle) {
    // On S1, d2 is half the wrapped second difference of the angles.
    return prox_circle_diff({x.coords[0], y.coords[0], z.coords[0]}, lambda / 2.0, 2, p);
  }
  ResidualFn r = [&m](const std::vector<Point>& q) {
    return second_diff_residual(m, q[0], q[1], q[2]);
  };
  return prox_numerical(m, {x, y, z}, lambda, p, r);
}

ProxResult prox_mixed_second_order(const Manifold& m, const Point& x, const Point& y,
                                   const Point& z, const Point& w, double lambda, int p) {
  check_lambda_power(lambda, p, "prox_mixed_second_order");
  if (m.tag().kind == ManifoldTag::Kind::Circle) {
    // Same reading as d2: half the wrapped mixed difference of the angles.
    return prox_circle_diff({x.coords[0], y.coords[0], z.coords[0], w.coords[0]}, lambda / 2.0,
                            11, p);
  }
  ResidualFn r = [&m](const std::vector<Point>& q) {
    return mixed_second_diff_residual(m, q[0], q[1], q[2], q[3]);
  };
  return prox_numerical(m, {x, y, z, w}, lambda, p, r);
}

}  // namespace manivar
