#include "manivar/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "manivar/parallel.hpp"

namespace manivar {

// ---------------------------------------------------------------- schedules

double StepSchedule::operator()(int r) const {
  switch (kind) {
    case Kind::Harmonic:
      return tau0 / (r + 1.0);
    case Kind::Constant:
      return tau0;
    case Kind::Custom:
      if (values.empty()) throw std::invalid_argument("custom schedule is empty");
      return values[std::min<std::size_t>(static_cast<std::size_t>(r), values.size() - 1)];
  }
  return 0.0;
}

namespace {

void check_positive_steps(const StepSchedule& s) {
  if (s.kind == StepSchedule::Kind::Custom) {
    if (s.values.empty()) throw std::invalid_argument("custom schedule is empty");
    for (double v : s.values)
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("schedule steps must be positive and finite");
  } else if (!(s.tau0 > 0.0) || !std::isfinite(s.tau0)) {
    throw std::invalid_argument("schedule step must be positive and finite");
  }
}

}  // namespace

void validate_step_schedule(const StepSchedule& s, Guarantee mode,
                            std::vector<std::string>& warnings) {
  check_positive_steps(s);
  if (s.in_l2_minus_l1()) return;
  const std::string what = s.kind == StepSchedule::Kind::Constant
                               ? "constant step schedule is not in l2 \\ l1"
                               : "custom step schedule cannot be verified to lie in l2 \\ l1";
  if (mode == Guarantee::Required) throw std::invalid_argument(what);
  warnings.push_back(what + "; convergence guarantees lapse");
}

void validate_relaxation(const StepSchedule& s, std::vector<std::string>& warnings) {
  check_positive_steps(s);
  switch (s.kind) {
    case StepSchedule::Kind::Constant:
      if (!(s.tau0 < 1.0))
        throw std::invalid_argument("DR relaxation must lie in (0, 1) so that sum tau(1 - tau) diverges");
      return;
    case StepSchedule::Kind::Harmonic:
      throw std::invalid_argument("harmonic DR relaxation has a finite sum tau(1 - tau)");
    case StepSchedule::Kind::Custom:
      for (double v : s.values)
        if (v > 1.0) throw std::invalid_argument("DR relaxation steps must not exceed 1");
      if (!(s.values.back() < 1.0))
        throw std::invalid_argument("DR relaxation must end inside (0, 1)");
      warnings.push_back("custom DR relaxation: divergence of sum tau(1 - tau) assumed from the repeated last value");
      return;
  }
}

Solver parse_solver(const std::string& name) {
  if (name == "subgradient") return Solver::Subgradient;
  if (name == "hq") return Solver::HalfQuadratic;
  if (name == "cppa") return Solver::CPPA;
  if (name == "dr") return Solver::DR;
  if (name == "pdr") return Solver::ParallelDR;
  if (name == "gd") return Solver::GradientDescent;
  throw std::invalid_argument("unknown solver '" + name +
                              "' (expected subgradient, hq, cppa, dr, pdr, gd)");
}

std::string to_string(Solver s) {
  switch (s) {
    case Solver::Subgradient:
      return "subgradient";
    case Solver::HalfQuadratic:
      return "hq";
    case Solver::CPPA:
      return "cppa";
    case Solver::DR:
      return "dr";
    case Solver::ParallelDR:
      return "pdr";
    case Solver::GradientDescent:
      return "gd";
  }
  return "";
}

// ---------------------------------------------------------------- helpers

namespace {

double image_change(const Manifold& m, const std::vector<Point>& a, const std::vector<Point>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    double v = m.dist(a[i].coords, b[i].coords);
    d[i] = v * v;
  }
  return std::sqrt(pairwise_sum(d));
}

double field_norm_sq(const Manifold& m, const std::vector<Point>& u, const std::vector<Vec>& g) {
  std::vector<double> v(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) v[i] = m.metric(u[i].coords, g[i], g[i]);
  return pairwise_sum(v);
}

// Relative objective change below tolerance for `patience` consecutive iterations.
class StopRule {
 public:
  StopRule(double tol, int patience) : tol_(tol), patience_(patience) {}
  bool update(double previous, double current) {
    const double rel = std::abs(previous - current) / std::max(std::abs(current), 1e-300);
    streak_ = rel < tol_ ? streak_ + 1 : 0;
    return streak_ >= patience_;
  }

 private:
  double tol_;
  int patience_;
  int streak_ = 0;
};

std::string regime_for(const Manifold& m, Solver s) {
  const auto sign = m.curvature_sign();
  switch (s) {
    case Solver::Subgradient:
      if (sign == CurvatureSign::Flat || sign == CurvatureSign::NonNegative)
        return "non-negative curvature: subgradient convergence theorem applies";
      if (sign == CurvatureSign::NonPositive)
        return "Hadamard: bounded-iterate results only, no convergence claim";
      return "mixed curvature: no convergence claim";
    case Solver::CPPA:
      return m.is_hadamard() ? "Hadamard: cyclic PPA theorem applies (Lipschitz-type condition holds "
                               "by construction for distance-based terms)"
                             : "non-Hadamard: no convergence claim";
    case Solver::HalfQuadratic:
      return m.is_hadamard() ? "Hadamard: half-quadratic convergence theorem applies"
                             : "non-Hadamard: no convergence claim";
    case Solver::DR:
      return m.is_hadamard() ? "symmetric Hadamard: DR with nonexpansive distance reflections"
                             : "non-Hadamard: best effort";
    case Solver::ParallelDR:
      return m.is_flat() ? "constant curvature: parallel DR theory applies"
                         : "theory caveat: parallel DR convergence only covered for constant "
                           "curvature, best effort";
    case Solver::GradientDescent:
      return "smoothed gradient descent: local convergence only";
  }
  return "";
}

// Runs f, resolving cut-locus failures by nudging the reported pixel.
template <class F>
auto with_cut_locus_retry(ManifoldImage& u, const ManifoldImage* previous,
                          std::vector<std::string>& warnings, F&& f) {
  for (int attempt = 0;; ++attempt) {
    try {
      return f();
    } catch (const CutLocusError& e) {
      if (!e.index() || attempt >= 20) throw;
      warnings.push_back(nudge_cut_locus(u, *e.index(), previous));
    }
  }
}

std::vector<Point> data_prox(const Manifold& m, const std::vector<Point>& x,
                             const std::vector<Point>& f, double lambda) {
  std::vector<Point> out(x.size());
  parallel_for(x.size(), [&](std::size_t i) {
    out[i] = prox_dist_to_point(m, x[i], f[i], lambda, 2).points[0];
  });
  return out;
}

void require_difference_model(const ModelConfig& c, const char* solver) {
  if (c.model != ModelKind::TV && c.model != ModelKind::TV2only && c.model != ModelKind::TVTV2)
    throw std::invalid_argument(std::string(solver) + " supports the tv, tv2 and tvtv2 models, not " +
                                to_string(c.model));
}

ManifoldImage start_image(const ManifoldImage& f, const SolverOptions& o) {
  if (!o.initial) return f;
  f.require_compatible(*o.initial, "initial image");
  return *o.initial;
}

void check_common(const ManifoldImage& f, const ModelConfig& c, const SolverOptions& o) {
  c.validate();
  if (o.max_iterations < 1) throw std::invalid_argument("iteration count must be at least 1");
  if (!(o.tolerance >= 0.0)) throw std::invalid_argument("tolerance must be non-negative");
  if (f.size() == 0) throw std::invalid_argument("empty image");
}

}  // namespace

std::string nudge_cut_locus(ManifoldImage& u, std::size_t index, const ManifoldImage* previous) {
  const Manifold& m = u.manifold();
  const int i1 = static_cast<int>(index) / u.n2(), i2 = static_cast<int>(index) % u.n2();
  std::vector<std::size_t> targets;
  for (auto [d1, d2] : {std::pair{1, 0}, {0, 1}, {-1, 0}, {0, -1}}) {
    if (!u.contains(i1 + d1, i2 + d2)) continue;
    std::size_t j = u.index(i1 + d1, i2 + d2);
    try {
      m.log_map(u[index].coords, u[j].coords);
    } catch (const CutLocusError&) {
      targets.push_back(j);
    }
  }
  if (targets.empty()) targets.push_back(index);
  std::ostringstream msg;
  msg << "cut locus at pixel " << index << ": nudged pixel";
  for (std::size_t k : targets) {
    Vec dir;
    if (previous && !same_point(u[k], (*previous)[k]))
      dir = m.log_any(u[k].coords, (*previous)[k].coords);
    if (dir.size() == 0 || m.norm(u[k].coords, dir) == 0.0) dir = m.tangent_basis(u[k].coords)[0];
    dir /= m.norm(u[k].coords, dir);
    u[k] = {m.exp_map(u[k].coords, 1e-9 * dir)};
    msg << ' ' << k;
  }
  msg << " by 1e-9";
  return msg.str();
}

// ---------------------------------------------------------------- Karcher mean, reflections

KarcherResult karcher_mean(const Manifold& m, const std::vector<Point>& points,
                           const std::vector<double>& weights) {
  if (points.empty()) throw std::invalid_argument("karcher mean of an empty list");
  if (!weights.empty() && weights.size() != points.size())
    throw std::invalid_argument("karcher mean: weight count does not match point count");
  std::vector<double> w = weights.empty() ? std::vector<double>(points.size(), 1.0) : weights;
  double total = 0.0;
  for (double v : w) {
    if (!(v >= 0.0)) throw std::invalid_argument("karcher mean: weights must be non-negative");
    total += v;
  }
  if (!(total > 0.0)) throw std::invalid_argument("karcher mean: weights sum to zero");
  for (const Point& p : points) check_point(m, p);

  KarcherResult r;
  Vec x = points[0].coords;
  for (r.iterations = 0;; ++r.iterations) {
    Vec g = m.zero_tangent();
    for (std::size_t k = 0; k < points.size(); ++k)
      if (w[k] > 0.0) g += (w[k] / total) * m.log_any(x, points[k].coords);
    if (m.norm(x, g) <= 1e-10) break;
    if (r.iterations >= 1000)
      throw ConvergenceError("karcher mean did not converge within 1000 iterations");
    x = m.exp_map(x, g);
  }
  r.mean = {x};
  if (!m.is_hadamard()) {
    double radius = 0.0;
    for (const Point& p : points) radius = std::max(radius, m.dist(x, p.coords));
    if (radius >= 0.5 * m.injectivity_radius())
      r.warning = "karcher mean: points do not lie in a ball of radius pi/2; the mean may not be unique";
  }
  return r;
}

std::vector<Point> reflect_prox(const Manifold& m, const ProxOperator& prox, double eta,
                                const std::vector<Point>& x) {
  std::vector<Point> p = prox(x, eta);
  std::vector<Point> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = {m.exp_map(p[i].coords, -m.log_any(p[i].coords, x[i].coords))};
  return out;
}

namespace {

std::vector<Point> geodesic_step(const Manifold& m, const std::vector<Point>& t,
                                 const std::vector<Point>& s, double tau) {
  std::vector<Point> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    out[i] = {m.exp_map(t[i].coords, tau * m.log_any(t[i].coords, s[i].coords))};
  return out;
}

}  // namespace

SplittingRun douglas_rachford(const Manifold& m, const ProxOperator& phi, const ProxOperator& psi,
                              double eta, const StepSchedule& relaxation,
                              const std::vector<Point>& t0, int max_iterations,
                              const ObjectiveFn& objective) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  SplittingRun run;
  validate_relaxation(relaxation, run.warnings);
  std::vector<Point> t = t0;
  for (int r = 0; r < max_iterations; ++r) {
    std::vector<Point> p = psi(t, eta);
    std::vector<Point> r1(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
      r1[i] = {m.exp_map(p[i].coords, -m.log_any(p[i].coords, t[i].coords))};
    std::vector<Point> s = reflect_prox(m, phi, eta, r1);
    std::vector<Point> next = geodesic_step(m, t, s, relaxation(r));
    const double change = image_change(m, t, next);
    run.trace.push_back({r, objective ? objective(p) : 0.0, change});
    t = std::move(next);
    run.iterations = r + 1;
    if (change < 1e-12) {
      run.converged = true;
      break;
    }
  }
  run.result = psi(t, eta);
  return run;
}

SplittingRun parallel_douglas_rachford(const Manifold& m, const std::vector<ProxOperator>& terms,
                                       double eta, const StepSchedule& relaxation,
                                       const std::vector<Point>& u0, int max_iterations,
                                       const ObjectiveFn& objective) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (terms.empty()) throw std::invalid_argument("parallel DR needs at least one term");
  SplittingRun run;
  validate_relaxation(relaxation, run.warnings);
  const std::size_t K = terms.size(), n = u0.size();
  std::vector<std::vector<Point>> t(K, u0);
  bool warned = false;

  auto diagonal = [&](const std::vector<std::vector<Point>>& copies) {
    std::vector<Point> mean(n);
    std::vector<std::optional<std::string>> warn(n);
    parallel_for(n, [&](std::size_t i) {
      std::vector<Point> pts(K);
      for (std::size_t k = 0; k < K; ++k) pts[k] = copies[k][i];
      auto km = karcher_mean(m, pts);
      mean[i] = km.mean;
      warn[i] = km.warning;
    });
    for (const auto& w : warn)
      if (w && !warned) {
        run.warnings.push_back(*w);
        warned = true;
      }
    return mean;
  };

  for (int r = 0; r < max_iterations; ++r) {
    std::vector<Point> mean = diagonal(t);
    double change_sq = 0.0;
    std::vector<std::vector<Point>> next(K);
    for (std::size_t k = 0; k < K; ++k) {
      std::vector<Point> refl(n);
      for (std::size_t i = 0; i < n; ++i)
        refl[i] = {m.exp_map(mean[i].coords, -m.log_any(mean[i].coords, t[k][i].coords))};
      std::vector<Point> s = reflect_prox(m, terms[k], eta, refl);
      next[k] = geodesic_step(m, t[k], s, relaxation(r));
      double c = image_change(m, t[k], next[k]);
      change_sq += c * c;
    }
    const double change = std::sqrt(change_sq);
    run.trace.push_back({r, objective ? objective(mean) : 0.0, change});
    t = std::move(next);
    run.iterations = r + 1;
    if (change < 1e-12) {
      run.converged = true;
      break;
    }
  }
  run.result = diagonal(t);
  return run;
}

// ---------------------------------------------------------------- term proxes

bool apply_term_prox(const Manifold& m, std::vector<Point>& u, const RegularizerTerm& term,
                     double lambda, const NumericalProxOptions& options) {
  const double lw = lambda * term.weight;
  const bool circle = m.tag().kind == ManifoldTag::Kind::Circle;
  std::vector<std::size_t> fp = term.footprint();
  ProxResult r;
  try {
    if (term.parts.size() == 1) {
      // (h^p)^(1/p) = h: the single-difference proxes with p = 1.
      const Difference& d = term.parts[0];
      const auto& q = d.pixels;
      switch (d.kind) {
        case Difference::Kind::First:
          r = circle ? prox_circle_diff({u[q[0]].coords[0], u[q[1]].coords[0]}, lw, 1, 1)
                     : prox_dist_pair(m, u[q[0]], u[q[1]], lw, 1);
          break;
        case Difference::Kind::Second:
          r = prox_second_order(m, u[q[0]], u[q[1]], u[q[2]], lw, 1);
          break;
        case Difference::Kind::Mixed:
          r = prox_mixed_second_order(m, u[q[0]], u[q[1]], u[q[2]], u[q[3]], lw, 1);
          break;
      }
      for (int k = 0; k < d.arity(); ++k) u[q[k]] = r.points[k];
      return r.converged;
    }
    // Isotropic group: the stacked residual has norm (sum_k h_k^2)^(1/2).
    std::vector<std::vector<int>> args;
    for (const Difference& d : term.parts) {
      std::vector<int> a;
      for (int k = 0; k < d.arity(); ++k)
        a.push_back(static_cast<int>(std::find(fp.begin(), fp.end(), d.pixels[k]) - fp.begin()));
      args.push_back(std::move(a));
    }
    ResidualFn residual = [&](const std::vector<Point>& x) {
      std::vector<DifferenceResidual> parts;
      for (std::size_t t = 0; t < term.parts.size(); ++t) {
        const auto& a = args[t];
        switch (term.parts[t].kind) {
          case Difference::Kind::First:
            parts.push_back(dist_residual(m, x[a[0]], x[a[1]]));
            break;
          case Difference::Kind::Second:
            parts.push_back(second_diff_residual(m, x[a[0]], x[a[1]], x[a[2]]));
            break;
          case Difference::Kind::Mixed:
            parts.push_back(mixed_second_diff_residual(m, x[a[0]], x[a[1]], x[a[2]], x[a[3]]));
            break;
        }
      }
      return stack_residuals(m, x.size(), parts, args);
    };
    std::vector<Point> x;
    for (std::size_t k : fp) x.push_back(u[k]);
    r = prox_numerical(m, x, lw, 1, residual, options);
  } catch (const CutLocusError& e) {
    if (e.index()) throw;
    throw e.with_index(fp.front());
  }
  for (std::size_t k = 0; k < fp.size(); ++k) u[fp[k]] = r.points[k];
  return r.converged;
}

std::vector<std::vector<std::size_t>> term_batches(const std::vector<RegularizerTerm>& terms) {
  std::vector<std::vector<std::size_t>> out;
  for (TermFamily fam : {TermFamily::X, TermFamily::Y, TermFamily::Group, TermFamily::SecondOrder}) {
    std::vector<std::vector<std::size_t>> batches;
    std::vector<std::vector<std::size_t>> used;  // sorted pixel lists per batch
    for (std::size_t k = 0; k < terms.size(); ++k) {
      if (terms[k].family != fam) continue;
      std::vector<std::size_t> fp = terms[k].footprint();
      std::sort(fp.begin(), fp.end());
      std::size_t b = 0;
      for (; b < batches.size(); ++b) {
        bool clash = false;
        for (std::size_t p : fp)
          if (std::binary_search(used[b].begin(), used[b].end(), p)) {
            clash = true;
            break;
          }
        if (!clash) break;
      }
      if (b == batches.size()) {
        batches.emplace_back();
        used.emplace_back();
      }
      batches[b].push_back(k);
      std::vector<std::size_t> merged;
      std::merge(used[b].begin(), used[b].end(), fp.begin(), fp.end(), std::back_inserter(merged));
      used[b] = std::move(merged);
    }
    for (auto& b : batches) out.push_back(std::move(b));
  }
  return out;
}

// ---------------------------------------------------------------- subgradient

SolverRun subgradient_descent(const ManifoldImage& f, const ModelConfig& config,
                              const SolverOptions& options) {
  check_common(f, config, options);
  require_difference_model(config, "subgradient");
  SolverRun run;
  run.solver = Solver::Subgradient;
  validate_step_schedule(options.schedule, options.guarantee, run.warnings);
  const Manifold& m = f.manifold();
  run.regime = regime_for(m, Solver::Subgradient);
  const auto terms = regularizer_terms(config, f.n1(), f.n2());
  auto objective_of = [&](const ManifoldImage& u) {
    return data_term(u, f) + terms_value(m, u.pixels(), terms);
  };

  ManifoldImage u = start_image(f, options);
  ManifoldImage best = u;
  double best_value = objective_of(u);
  double value = best_value;
  for (int r = 0; r < options.max_iterations; ++r) {
    std::vector<Vec> g(u.size(), m.zero_tangent());
    for (std::size_t i = 0; i < u.size(); ++i)
      if (!same_point(u[i], f[i])) g[i] = -m.log_any(u[i].coords, f[i].coords);
    for (const auto& t : terms) accumulate_term_gradient(m, u.pixels(), t, g);
    const double norm = std::sqrt(field_norm_sq(m, u.pixels(), g));
    run.iterations = r + 1;
    if (norm == 0.0) {
      run.converged = true;
      run.trace.push_back({r, value, 0.0});
      break;
    }
    const double step = options.schedule(r) / norm;
    ManifoldImage next = u;
    for (std::size_t i = 0; i < u.size(); ++i) next[i] = {m.exp_map(u[i].coords, -step * g[i])};
    const double change = image_change(m, u.pixels(), next.pixels());
    u = std::move(next);
    value = objective_of(u);
    run.trace.push_back({r, value, change});
    if (value < best_value) {
      best_value = value;
      best = u;
    }
  }
  run.result = best;
  return run;
}

// ---------------------------------------------------------------- half-quadratic

SolverRun half_quadratic(const ManifoldImage& f, const ModelConfig& config,
                         const SolverOptions& options) {
  check_common(f, config, options);
  if (config.model != ModelKind::TVphi)
    throw std::invalid_argument("hq requires the tvphi model");
  SolverRun run;
  run.solver = Solver::HalfQuadratic;
  const Manifold& m = f.manifold();
  run.regime = regime_for(m, Solver::HalfQuadratic);
  const int n1 = f.n1(), n2 = f.n2();
  const double alpha = config.alpha;

  // Edges (a, b) with the index of their weight: per pixel (isotropic) or per edge.
  struct Edge {
    std::size_t a, b, group;
  };
  std::vector<Edge> edges;
  std::size_t groups = 0;
  for (int i1 = 0; i1 < n1; ++i1)
    for (int i2 = 0; i2 < n2; ++i2) {
      const std::size_t i = f.index(i1, i2);
      bool any = false;
      for (auto [d1, d2] : {std::pair{1, 0}, {0, 1}}) {
        if (!f.contains(i1 + d1, i2 + d2)) continue;
        edges.push_back({i, f.index(i1 + d1, i2 + d2), config.p == 1 ? groups++ : groups});
        any = true;
      }
      if (config.p == 2 && any) ++groups;
    }

  auto j_phi = [&](const ManifoldImage& u) { return data_term(u, f) + alpha * tv_phi(u, config.phi, config.p); };
  auto quad = [&](const ManifoldImage& u, const std::vector<double>& v) {
    std::vector<double> e(edges.size());
    for (std::size_t k = 0; k < edges.size(); ++k) {
      double d = m.dist(u[edges[k].a].coords, u[edges[k].b].coords);
      e[k] = v[edges[k].group] * d * d;
    }
    return data_term(u, f) + alpha * pairwise_sum(e);
  };
  auto quad_gradient = [&](const ManifoldImage& u, const std::vector<double>& v) {
    std::vector<Vec> g(u.size(), m.zero_tangent());
    for (std::size_t i = 0; i < u.size(); ++i)
      if (!same_point(u[i], f[i])) g[i] = -m.log_any(u[i].coords, f[i].coords);
    for (const Edge& e : edges) {
      if (same_point(u[e.a], u[e.b])) continue;
      const double c = 2.0 * alpha * v[e.group];
      g[e.a] -= c * m.log_any(u[e.a].coords, u[e.b].coords);
      g[e.b] -= c * m.log_any(u[e.b].coords, u[e.a].coords);
    }
    return g;
  };

  ManifoldImage u = start_image(f, options);
  double value = j_phi(u);
  run.trace.push_back({0, value, 0.0});
  const double step0 = 1.0 / (1.0 + 8.0 * alpha);
  int inner_misses = 0;
  StopRule stop(options.tolerance, options.patience);
  for (int r = 0; r < options.max_iterations; ++r) {
    // v = s(d) at the current u.
    std::vector<double> sq(groups, 0.0);
    for (const Edge& e : edges) {
      double d = m.dist(u[e.a].coords, u[e.b].coords);
      sq[e.group] += d * d;
    }
    std::vector<double> v(groups);
    for (std::size_t k = 0; k < groups; ++k) v[k] = config.phi.weight(std::sqrt(sq[k]));

    // Inner Riemannian gradient descent with Armijo backtracking, warm started.
    // The step restarts each outer iteration: backtracking against rounding
    // noise near a minimizer can drive it to zero.
    ManifoldImage w = u;
    double q = quad(w, v);
    double step = step0;
    bool inner_done = false;
    for (int it = 0; it < options.inner_steps; ++it) {
      std::vector<Vec> g = quad_gradient(w, v);
      const double gg = field_norm_sq(m, w.pixels(), g);
      if (std::sqrt(gg) <= 1e-12) {
        inner_done = true;
        break;
      }
      step = std::min(4.0 * step, 1.0);
      bool accepted = false;
      for (int k = 0; k < 60; ++k) {
        ManifoldImage trial = w;
        for (std::size_t i = 0; i < w.size(); ++i) trial[i] = {m.exp_map(w[i].coords, -step * g[i])};
        if (image_change(m, w.pixels(), trial.pixels()) == 0.0) break;
        double qt = quad(trial, v);
        if (qt <= q - 1e-4 * step * gg) {
          w = std::move(trial);
          q = qt;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        inner_done = true;
        break;
      }
    }
    if (!inner_done) ++inner_misses;

    const double next = j_phi(w);
    if (next > value + 1e-12) {
      std::ostringstream msg;
      msg << "half-quadratic objective increased from " << value << " to " << next
          << " at outer iteration " << r;
      throw std::logic_error(msg.str());
    }
    const double change = image_change(m, u.pixels(), w.pixels());
    u = std::move(w);
    run.trace.push_back({r + 1, next, change});
    run.iterations = r + 1;
    const bool done = stop.update(value, next);
    value = next;
    if (done || change == 0.0) {
      run.converged = true;
      break;
    }
  }
  if (inner_misses > 0)
    run.warnings.push_back("half-quadratic: inner solve used its full budget in " +
                           std::to_string(inner_misses) + " outer iterations");
  run.result = u;
  return run;
}

// ---------------------------------------------------------------- CPPA

namespace {

struct CppaState {
  std::vector<std::vector<std::size_t>> batches;
  int non_converged = 0;
};

// One CPPA sweep: data prox, then every batch of regularizer terms.
void cppa_sweep(const Manifold& m, ManifoldImage& u, const std::vector<Point>& f,
                const std::vector<RegularizerTerm>& terms, CppaState& st, double lambda,
                const NumericalProxOptions& prox_options, const ManifoldImage* previous,
                std::vector<std::string>& warnings) {
  std::vector<Point> d = data_prox(m, u.pixels(), f, lambda);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::move(d[i]);
  for (const auto& batch : st.batches) {
    std::vector<char> ok(batch.size(), 1);
    with_cut_locus_retry(u, previous, warnings, [&] {
      std::vector<Point>& px = u.mutable_pixels();
      parallel_for(batch.size(), [&](std::size_t k) {
        ok[k] = apply_term_prox(m, px, terms[batch[k]], lambda, prox_options);
      });
      return 0;
    });
    for (char c : ok) st.non_converged += c ? 0 : 1;
  }
}

// Proxes for parallel DR: the data term at `data`, then one operator per batch.
std::vector<ProxOperator> splitting_ops(const Manifold& m, const std::vector<Point>& data,
                                        const std::vector<RegularizerTerm>& terms,
                                        const std::vector<std::vector<std::size_t>>& batches,
                                        std::atomic<int>& non_converged) {
  std::vector<ProxOperator> ops;
  ops.push_back([&m, data](const std::vector<Point>& x, double eta) {
    return data_prox(m, x, data, eta);
  });
  for (const auto& batch : batches) {
    ops.push_back([&m, &terms, &non_converged, batch](const std::vector<Point>& x, double eta) {
      std::vector<Point> y = x;
      std::vector<char> ok(batch.size(), 1);
      parallel_for(batch.size(), [&](std::size_t k) {
        ok[k] = apply_term_prox(m, y, terms[batch[k]], eta);
      });
      for (char c : ok) non_converged += c ? 0 : 1;
      return y;
    });
  }
  return ops;
}

}  // namespace

SolverRun cppa(const ManifoldImage& f, const ModelConfig& config, const SolverOptions& options) {
  check_common(f, config, options);
  require_difference_model(config, "cppa");
  SolverRun run;
  run.solver = Solver::CPPA;
  validate_step_schedule(options.schedule, options.guarantee, run.warnings);
  const Manifold& m = f.manifold();
  run.regime = regime_for(m, Solver::CPPA);
  const auto terms = regularizer_terms(config, f.n1(), f.n2());
  CppaState st{term_batches(terms), 0};
  const double K = 1.0 + static_cast<double>(st.batches.size());

  ManifoldImage u = start_image(f, options);
  double value = data_term(u, f) + terms_value(m, u.pixels(), terms);
  run.trace.push_back({0, value, 0.0});
  StopRule stop(options.tolerance, options.patience);
  for (int r = 0; r < options.max_iterations; ++r) {
    NumericalProxOptions po;
    if (options.inexact_eps0 > 0.0)
      po.step_tolerance = options.inexact_eps0 / ((r + 1.0) * (r + 1.0)) / K;
    ManifoldImage previous = u;
    cppa_sweep(m, u, f.pixels(), terms, st, options.schedule(r), po, &previous, run.warnings);
    const double next = data_term(u, f) + terms_value(m, u.pixels(), terms);
    const double change = image_change(m, previous.pixels(), u.pixels());
    run.trace.push_back({r + 1, next, change});
    run.iterations = r + 1;
    const bool done = stop.update(value, next);
    value = next;
    if (done || change == 0.0) {
      run.converged = true;
      break;
    }
  }
  if (st.non_converged > 0)
    run.warnings.push_back("cppa: " + std::to_string(st.non_converged) +
                           " numerical prox evaluations hit their iteration cap");
  run.result = u;
  return run;
}

// ---------------------------------------------------------------- DR drivers

SolverRun douglas_rachford(const ManifoldImage& f, const ModelConfig& config,
                           const SolverOptions& options) {
  check_common(f, config, options);
  require_difference_model(config, "dr");
  SolverRun run;
  run.solver = Solver::DR;
  const Manifold& m = f.manifold();
  run.regime = regime_for(m, Solver::DR);
  const auto terms = regularizer_terms(config, f.n1(), f.n2());
  auto shape = [&](const std::vector<Point>& x) {
    return ManifoldImage(f.manifold_ptr(), f.n1(), f.n2(), x);
  };
  ProxOperator phi = [&](const std::vector<Point>& x, double eta) {
    return data_prox(m, x, f.pixels(), eta);
  };
  const auto batches = term_batches(terms);
  std::atomic<int> non_converged{0};
  // prox_{eta psi}(x) = argmin 1/2 dist^2(u, x) + eta alpha R(u), a strongly
  // convex problem solved by an inner parallel DR started at x.
  ProxOperator psi = [&](const std::vector<Point>& x, double eta) {
    auto scaled = terms;
    for (auto& t : scaled) t.weight *= eta;
    auto ops = splitting_ops(m, x, scaled, batches, non_converged);
    return parallel_douglas_rachford(m, ops, options.eta, StepSchedule::constant(0.9), x,
                                     options.dr_inner_sweeps)
        .result;
  };
  ObjectiveFn obj = [&](const std::vector<Point>& x) {
    return data_term(shape(x), f) + terms_value(m, x, terms);
  };
  auto sr = douglas_rachford(m, phi, psi, options.eta, options.relaxation,
                             start_image(f, options).pixels(), options.max_iterations, obj);
  run.trace = std::move(sr.trace);
  run.converged = sr.converged;
  run.iterations = sr.iterations;
  run.warnings.insert(run.warnings.end(), sr.warnings.begin(), sr.warnings.end());
  run.warnings.push_back("dr: the prox of the regularizer is computed by an inner parallel DR (" +
                         std::to_string(options.dr_inner_sweeps) + " iterations)");
  if (non_converged > 0)
    run.warnings.push_back("dr: " + std::to_string(non_converged.load()) +
                           " numerical prox evaluations hit their iteration cap");
  run.result = shape(sr.result);
  return run;
}

SolverRun parallel_douglas_rachford(const ManifoldImage& f, const ModelConfig& config,
                                    const SolverOptions& options) {
  check_common(f, config, options);
  require_difference_model(config, "pdr");
  SolverRun run;
  run.solver = Solver::ParallelDR;
  const Manifold& m = f.manifold();
  run.regime = regime_for(m, Solver::ParallelDR);
  const auto terms = regularizer_terms(config, f.n1(), f.n2());
  const auto batches = term_batches(terms);
  std::atomic<int> non_converged{0};
  const auto ops = splitting_ops(m, f.pixels(), terms, batches, non_converged);
  ObjectiveFn obj = [&](const std::vector<Point>& x) {
    return data_term(ManifoldImage(f.manifold_ptr(), f.n1(), f.n2(), x), f) +
           terms_value(m, x, terms);
  };
  auto sr = parallel_douglas_rachford(m, ops, options.eta, options.relaxation,
                                      start_image(f, options).pixels(), options.max_iterations, obj);
  run.trace = std::move(sr.trace);
  run.converged = sr.converged;
  run.iterations = sr.iterations;
  run.warnings.insert(run.warnings.end(), sr.warnings.begin(), sr.warnings.end());
  if (non_converged > 0)
    run.warnings.push_back("pdr: " + std::to_string(non_converged.load()) +
                           " numerical prox evaluations hit their iteration cap");
  run.result = ManifoldImage(f.manifold_ptr(), f.n1(), f.n2(), sr.result);
  return run;
}

// ---------------------------------------------------------------- TGV gradient descent

SolverRun tgv_gradient_descent(const ManifoldImage& f, const ModelConfig& config,
                               const SolverOptions& options) {
  check_common(f, config, options);
  if (config.model != ModelKind::TGV) throw std::invalid_argument("gd requires the tgv model");
  SolverRun run;
  run.solver = Solver::GradientDescent;
  const Manifold& m = f.manifold();
  run.regime = regime_for(m, Solver::GradientDescent);
  const double alpha = config.alpha, beta = config.beta;
  const int p = config.p;
  const std::vector<double> smoothing{1e-1, 1e-2, 1e-3, 1e-4};

  auto value_at = [&](const TangentField& xi, double eps, std::vector<Vec>* gu, TgvGradient* gx) {
    double reg = tgv_smoothed(xi, beta, p, eps, gu, gx);
    double data = data_term(xi.base, f);
    if (gu) {
      for (std::size_t i = 0; i < f.size(); ++i) {
        (*gu)[i] *= alpha;
        if (!same_point(xi.base[i], f[i])) (*gu)[i] -= m.log_any(xi.base[i].coords, f[i].coords);
      }
      for (std::size_t i = 0; i < f.size(); ++i) {
        gx->x[i] *= alpha;
        gx->y[i] *= alpha;
      }
    }
    return data + alpha * reg;
  };

  ManifoldImage u0 = start_image(f, options);
  TangentField xi = TangentField::zeros(u0);
  with_cut_locus_retry(xi.base, nullptr, run.warnings, [&] {
    TangentField grad = forward_differences(xi.base);
    if (tgv_smoothed(grad, beta, p, 0.0, nullptr, nullptr) <
        tgv_smoothed(TangentField::zeros(xi.base), beta, p, 0.0, nullptr, nullptr))
      xi = grad;
    else
      xi = TangentField::zeros(xi.base);
    return 0;
  });

  double exact = value_at(xi, 0.0, nullptr, nullptr);
  run.trace.push_back({0, exact, 0.0});
  const int per_stage = std::max(1, options.max_iterations / static_cast<int>(smoothing.size()));
  int iteration = 0;
  for (std::size_t stage = 0; stage < smoothing.size(); ++stage) {
    const double eps = smoothing[stage];
    const bool last = stage + 1 == smoothing.size();
    const int budget = last ? options.max_iterations - iteration : per_stage;
    StopRule stop(options.tolerance, options.patience);
    std::vector<Vec> gu, gu_prev;
    TgvGradient gx, gx_prev;
    double fval = 0.0;
    with_cut_locus_retry(xi.base, nullptr, run.warnings, [&] {
      fval = value_at(xi, eps, &gu, &gx);
      return 0;
    });
    double step = 1.0 / (1.0 + 8.0 * alpha);
    TangentField prev;
    bool have_prev = false;
    for (int it = 0; it < budget; ++it, ++iteration) {
      const auto& u = xi.base;
      const double gg = field_norm_sq(m, u.pixels(), gu) + field_norm_sq(m, u.pixels(), gx.x) +
                        field_norm_sq(m, u.pixels(), gx.y);
      if (std::sqrt(gg) <= 1e-12) break;
      if (have_prev) {
        // Barzilai-Borwein step; previous quantities compared in coordinates.
        double sy = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
          Vec su = m.log_any(prev.base[i].coords, u[i].coords);
          Vec yu = gu[i] - gu_prev[i];
          Vec sx = xi.x[i] - prev.x[i], sy2 = xi.y[i] - prev.y[i];
          Vec yx = gx.x[i] - gx_prev.x[i], yy = gx.y[i] - gx_prev.y[i];
          sy += su.dot(yu) + sx.dot(yx) + sy2.dot(yy);
          ss += su.dot(su) + sx.dot(sx) + sy2.dot(sy2);
        }
        step = sy > 0.0 ? ss / sy : 2.0 * step;
      }
      bool accepted = false;
      TangentField trial;
      double ftrial = 0.0;
      for (int k = 0; k < 60; ++k) {
        std::vector<Point> px(u.size());
        trial = xi;
        for (std::size_t i = 0; i < u.size(); ++i) {
          Vec d = -step * gu[i];
          px[i] = {m.exp_map(u[i].coords, d)};
          trial.x[i] = m.transport_along(u[i].coords, d, 1.0, Vec(xi.x[i] - step * gx.x[i]));
          trial.y[i] = m.transport_along(u[i].coords, d, 1.0, Vec(xi.y[i] - step * gx.y[i]));
        }
        trial.base = ManifoldImage(f.manifold_ptr(), f.n1(), f.n2(), std::move(px));
        try {
          ftrial = value_at(trial, eps, nullptr, nullptr);
        } catch (const CutLocusError&) {
          step *= 0.5;
          continue;
        }
        if (ftrial <= fval - 1e-4 * step * gg) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
      prev = xi;
      gu_prev = gu;
      gx_prev = gx;
      have_prev = true;
      const double change = image_change(m, xi.base.pixels(), trial.base.pixels());
      xi = std::move(trial);
      const double fold = fval;
      fval = value_at(xi, eps, &gu, &gx);
      exact = value_at(xi, 0.0, nullptr, nullptr);
      run.trace.push_back({iteration + 1, exact, change});
      if (stop.update(fold, fval)) {
        if (last) run.converged = true;
        break;
      }
    }
    if (last && iteration >= options.max_iterations) run.converged = false;
  }
  run.iterations = iteration;
  run.warnings.push_back("gd: TGV is minimized jointly over (u, xi) on a smoothed objective");
  run.result = xi.base;
  return run;
}

// ---------------------------------------------------------------- dispatch

SolverRun denoise(const ManifoldImage& f, const ModelConfig& config, const SolverOptions& options) {
  switch (options.solver) {
    case Solver::Subgradient:
      return subgradient_descent(f, config, options);
    case Solver::HalfQuadratic:
      return half_quadratic(f, config, options);
    case Solver::CPPA:
      return cppa(f, config, options);
    case Solver::DR:
      return douglas_rachford(f, config, options);
    case Solver::ParallelDR:
      return parallel_douglas_rachford(f, config, options);
    case Solver::GradientDescent:
      return tgv_gradient_descent(f, config, options);
  }
  throw std::invalid_argument("unknown solver");
}

}  // namespace manivar
