#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "desk_problems.hpp"
#include "manivar/differences.hpp"
#include "manivar/parallel.hpp"
#include "manivar/solvers.hpp"
#include "test_support.hpp"

namespace manivar {
namespace {

using testing::circle_1x4;
using testing::circle_tv_oracle;
using testing::random_point;
using testing::spd_4x4;

ManifoldImage line(const ManifoldTag& tag, std::vector<double> values) {
  std::vector<Point> px;
  for (double v : values) px.push_back({Vec::Constant(1, v)});
  const int n = static_cast<int>(px.size());
  return ManifoldImage(make_manifold(tag), 1, n, std::move(px));
}

Point spd_point(double a, double b, double c) {
  Vec v(4);
  v << a, b, b, c;
  return {v};
}

// ---------------------------------------------------------------- schedules

TEST(StepSchedule, Values) {
  auto h = StepSchedule::harmonic(4.0);
  EXPECT_DOUBLE_EQ(h(0), 4.0);
  EXPECT_DOUBLE_EQ(h(3), 1.0);
  EXPECT_DOUBLE_EQ(StepSchedule::constant(0.5)(100), 0.5);
  auto c = StepSchedule::custom({1.0, 0.5});
  EXPECT_DOUBLE_EQ(c(0), 1.0);
  EXPECT_DOUBLE_EQ(c(7), 0.5);
}

TEST(StepSchedule, ValidatorModes) {
  std::vector<std::string> warnings;
  validate_step_schedule(StepSchedule::harmonic(4.0), Guarantee::Required, warnings);
  EXPECT_TRUE(warnings.empty());
  EXPECT_THROW(validate_step_schedule(StepSchedule::constant(0.1), Guarantee::Required, warnings),
               std::invalid_argument);
  validate_step_schedule(StepSchedule::constant(0.1), Guarantee::BestEffort, warnings);
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_THROW(validate_step_schedule(StepSchedule::harmonic(-1.0), Guarantee::BestEffort, warnings),
               std::invalid_argument);
}

TEST(StepSchedule, RelaxationCheck) {
  std::vector<std::string> warnings;
  validate_relaxation(StepSchedule::constant(0.9), warnings);
  EXPECT_TRUE(warnings.empty());
  EXPECT_THROW(validate_relaxation(StepSchedule::constant(1.0), warnings), std::invalid_argument);
  EXPECT_THROW(validate_relaxation(StepSchedule::harmonic(0.5), warnings), std::invalid_argument);
}

TEST(Solver, ParseNames) {
  for (Solver s : {Solver::Subgradient, Solver::HalfQuadratic, Solver::CPPA, Solver::DR,
                   Solver::ParallelDR, Solver::GradientDescent})
    EXPECT_EQ(parse_solver(to_string(s)), s);
  EXPECT_THROW(parse_solver("admm"), std::invalid_argument);
}

// ---------------------------------------------------------------- karcher mean

TEST(KarcherMean, Examples) {
  auto spd = make_manifold(ManifoldTag::spd(2));
  auto r = karcher_mean(*spd, {spd_point(1, 0, 1), spd_point(4, 0, 1)});
  EXPECT_NEAR((r.mean.coords - spd_point(2, 0, 1).coords).norm(), 0.0, 1e-9);
  EXPECT_FALSE(r.warning.has_value());

  auto circle = make_manifold(ManifoldTag::circle());
  auto c = karcher_mean(*circle, {{Vec::Constant(1, -0.1)}, {Vec::Constant(1, 0.0)},
                                  {Vec::Constant(1, 0.1)}});
  EXPECT_NEAR(c.mean.coords[0], 0.0, 1e-12);
}

TEST(KarcherMean, TwoPointsGiveMidpoint) {
  std::mt19937_64 rng(50);
  for (const auto& tag : {ManifoldTag::sphere2(), ManifoldTag::spd(3), ManifoldTag::rotations3()}) {
    auto m = make_manifold(tag);
    for (int i = 0; i < 5; ++i) {
      Point a = random_point(*m, rng, 0.6), b = random_point(*m, rng, 0.6);
      Point mid = principal_midpoint(*m, a, b);
      EXPECT_LT(distance(*m, karcher_mean(*m, {a, b}).mean, mid), 1e-8) << tag.to_string();
    }
  }
}

TEST(KarcherMean, WeightsAndErrors) {
  auto e = make_manifold(ManifoldTag::euclidean(1));
  auto r = karcher_mean(*e, {{Vec::Constant(1, 0.0)}, {Vec::Constant(1, 3.0)}}, {2.0, 1.0});
  EXPECT_NEAR(r.mean.coords[0], 1.0, 1e-10);
  EXPECT_THROW(karcher_mean(*e, {}), std::invalid_argument);
  EXPECT_THROW(karcher_mean(*e, {{Vec::Constant(1, 0.0)}}, {1.0, 2.0}), std::invalid_argument);
}

TEST(KarcherMean, SphereSpreadWarns) {
  auto s2 = make_manifold(ManifoldTag::sphere2());
  // The heavy point pulls the mean to within 0.6 of itself, leaving the other
  // point 1.8 > pi/2 away.
  Vec a(3), b(3);
  a << 1, 0, 0;
  b << std::cos(2.4), std::sin(2.4), 0;
  auto r = karcher_mean(*s2, {{a}, {b}}, {3.0, 1.0});
  EXPECT_TRUE(r.warning.has_value());
}

// ---------------------------------------------------------------- reflections

TEST(ReflectProx, EuclideanIsTwoProxMinusX) {
  auto e = make_manifold(ManifoldTag::euclidean(2));
  Vec a(2);
  a << 1.0, -2.0;
  ProxOperator prox = [&](const std::vector<Point>& x, double eta) {
    return std::vector<Point>{{(x[0].coords + eta * a) / (1.0 + eta)}};
  };
  Vec x(2);
  x << 0.3, 0.7;
  auto r = reflect_prox(*e, prox, 0.5, {{x}});
  Vec expected = 2.0 * prox({{x}}, 0.5)[0].coords - x;
  EXPECT_NEAR((r[0].coords - expected).norm(), 0.0, 1e-14);
  // a is a fixed point of the prox, hence of the reflection.
  EXPECT_NEAR((reflect_prox(*e, prox, 0.5, {{a}})[0].coords - a).norm(), 0.0, 1e-15);
}

TEST(ReflectProx, DistanceTermsNonexpansiveOnSpd) {
  auto m = make_manifold(ManifoldTag::spd(2));
  std::mt19937_64 rng(51);
  for (int i = 0; i < 100; ++i) {
    Point y = random_point(*m, rng);
    for (int p : {1, 2}) {
      ProxOperator prox = [&](const std::vector<Point>& x, double eta) {
        return prox_dist_to_point(*m, x[0], y, eta, p).points;
      };
      Point a = random_point(*m, rng), b = random_point(*m, rng);
      Point ra = reflect_prox(*m, prox, 0.7, {a})[0];
      Point rb = reflect_prox(*m, prox, 0.7, {b})[0];
      EXPECT_LE(distance(*m, ra, rb), distance(*m, a, b) + 1e-10);
    }
  }
}

// ---------------------------------------------------------------- generic DR

TEST(DouglasRachford, SpdTwoPointMidpoint) {
  auto m = make_manifold(ManifoldTag::spd(2));
  Point a = spd_point(2, 0.3, 1), b = spd_point(0.5, -0.1, 3);
  auto half_dist = [&](const Point& target) -> ProxOperator {
    return [&, target](const std::vector<Point>& x, double eta) {
      return prox_dist_to_point(*m, x[0], target, eta, 2).points;
    };
  };
  auto run = douglas_rachford(*m, half_dist(a), half_dist(b), 0.35, StepSchedule::constant(0.9),
                              {spd_point(1, 0, 1)}, 500);
  EXPECT_LT(distance(*m, run.result[0], principal_midpoint(*m, a, b)), 1e-8);
}

TEST(DouglasRachford, FixedPointExitsEarly) {
  auto m = make_manifold(ManifoldTag::spd(2));
  Point a = spd_point(2, 0.3, 1);
  ProxOperator prox = [&](const std::vector<Point>& x, double eta) {
    return prox_dist_to_point(*m, x[0], a, eta, 2).points;
  };
  auto run = douglas_rachford(*m, prox, prox, 0.35, StepSchedule::constant(0.9), {a}, 100);
  EXPECT_EQ(run.iterations, 1);
  EXPECT_TRUE(run.converged);
  EXPECT_LT(run.trace.back().change, 1e-12);
}

TEST(ParallelDouglasRachford, SingleTermIsProxIteration) {
  auto e = make_manifold(ManifoldTag::euclidean(1));
  ProxOperator prox = [&](const std::vector<Point>& x, double eta) {
    std::vector<Point> out;
    for (const Point& p : x) out.push_back({(p.coords + Vec::Constant(1, eta * 3.0)) / (1.0 + eta)});
    return out;
  };
  auto run = parallel_douglas_rachford(*e, {prox}, 0.35, StepSchedule::constant(0.9),
                                       {{Vec::Constant(1, 0.0)}}, 200);
  EXPECT_NEAR(run.result[0].coords[0], 3.0, 1e-8);
}

TEST(ParallelDouglasRachford, AllDataTermsConvergeToData) {
  auto m = make_manifold(ManifoldTag::spd(2));
  Point f = spd_point(1.5, 0.2, 0.8);
  ProxOperator prox = [&](const std::vector<Point>& x, double eta) {
    return prox_dist_to_point(*m, x[0], f, eta, 2).points;
  };
  auto run = parallel_douglas_rachford(*m, {prox, prox, prox}, 0.35, StepSchedule::constant(0.9),
                                       {spd_point(1, 0, 1)}, 300);
  EXPECT_LT(distance(*m, run.result[0], f), 1e-8);
}

// ---------------------------------------------------------------- subgradient

TEST(Subgradient, MinimizerReturnsAfterOneIteration) {
  auto f = line(ManifoldTag::euclidean(1), {0.5, 0.5, 0.5});
  SolverOptions o;
  o.solver = Solver::Subgradient;
  auto run = subgradient_descent(f, {ModelKind::TV, 0.3}, o);
  EXPECT_EQ(run.iterations, 1);
  EXPECT_TRUE(run.converged);
  EXPECT_EQ(run.result.pixels()[1].coords[0], 0.5);
}

TEST(Subgradient, SinglePixelConvergesToData) {
  auto f = line(ManifoldTag::euclidean(1), {1.7});
  SolverOptions o;
  o.solver = Solver::Subgradient;
  o.max_iterations = 500;
  o.initial = line(ManifoldTag::euclidean(1), {-2.0});
  auto run = subgradient_descent(f, {ModelKind::TV, 0.3}, o);
  EXPECT_NEAR(run.result[0].coords[0], 1.7, 1e-3);
}

TEST(Subgradient, CircleMatchesGridOracle) {
  auto f = circle_1x4();
  ModelConfig c{ModelKind::TV, 0.5};
  SolverOptions o;
  o.solver = Solver::Subgradient;
  o.max_iterations = 5000;
  auto run = subgradient_descent(f, c, o);
  EXPECT_LE(objective(run.result, f, c), circle_tv_oracle(f, 0.5) + 1e-3);
}

// ---------------------------------------------------------------- half-quadratic

TEST(HalfQuadratic, WeightExamples) {
  EXPECT_DOUBLE_EQ((Phi{PhiKind::Phi1, 1.0}.weight(0.0)), 0.5);
  EXPECT_DOUBLE_EQ((Phi{PhiKind::Phi2, 0.1}.weight(0.4)), 0.1 / 0.8);
}

TEST(HalfQuadratic, NoiseFreeConstantIsFixed) {
  auto f = line(ManifoldTag::circle(), {0.4, 0.4, 0.4, 0.4});
  SolverOptions o;
  o.solver = Solver::HalfQuadratic;
  auto run = half_quadratic(f, {ModelKind::TVphi, 0.5}, o);
  for (const Point& p : run.result.pixels()) EXPECT_NEAR(p.coords[0], 0.4, 1e-14);
}

TEST(HalfQuadratic, ObjectiveNeverIncreases) {
  auto f = spd_4x4();
  for (PhiKind k : {PhiKind::Phi1, PhiKind::Phi2, PhiKind::Phi3}) {
    for (int p : {1, 2}) {
      ModelConfig c{ModelKind::TVphi, 0.3, 0.5, p, Phi{k, 0.1}};
      SolverOptions o;
      o.solver = Solver::HalfQuadratic;
      o.max_iterations = 50;
      auto run = half_quadratic(f, c, o);
      for (std::size_t r = 1; r < run.trace.size(); ++r)
        EXPECT_LE(run.trace[r].objective, run.trace[r - 1].objective + 1e-12);
    }
  }
}

// Plain gradient descent on 1/2 |u - f|^2 + alpha sum phi(|u_{k+1} - u_k|).
std::vector<double> smooth_oracle(const std::vector<double>& f, double alpha, const Phi& phi) {
  std::vector<double> u = f;
  for (int it = 0; it < 200000; ++it) {
    std::vector<double> g(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) g[k] = u[k] - f[k];
    for (std::size_t k = 0; k + 1 < u.size(); ++k) {
      const double d = u[k + 1] - u[k];
      const double h = 1e-7;
      const double dphi = (phi.value(d + h) - phi.value(d - h)) / (2 * h);
      g[k] -= alpha * dphi;
      g[k + 1] += alpha * dphi;
    }
    double n = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      u[k] -= 0.05 * g[k];
      n += g[k] * g[k];
    }
    if (std::sqrt(n) < 1e-12) break;
  }
  return u;
}

TEST(HalfQuadratic, MatchesSmoothMinimizer) {
  const std::vector<double> fv{0.0, 1.0, 0.4};
  const Phi phi{PhiKind::Phi1, 0.5};
  auto f = line(ManifoldTag::euclidean(1), fv);
  ModelConfig c{ModelKind::TVphi, 0.3, 0.5, 1, phi};
  SolverOptions o;
  o.solver = Solver::HalfQuadratic;
  o.max_iterations = 3000;
  o.tolerance = 0.0;
  auto run = half_quadratic(f, c, o);
  auto expected = smooth_oracle(fv, 0.3, phi);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(run.result[k].coords[0], expected[k], 1e-6);
}

// ---------------------------------------------------------------- CPPA

TEST(Cppa, EuclideanPairShrinkage) {
  auto f = line(ManifoldTag::euclidean(1), {0.0, 1.0});
  SolverOptions o;
  o.max_iterations = 2000;
  auto run = cppa(f, {ModelKind::TV, 0.2}, o);
  EXPECT_NEAR(run.result[0].coords[0], 0.2, 1e-3);
  EXPECT_NEAR(run.result[1].coords[0], 0.8, 1e-3);
}

TEST(Cppa, TinyAlphaStaysAtData) {
  auto f = circle_1x4();
  SolverOptions o;
  auto run = cppa(f, {ModelKind::TV, 1e-12}, o);
  for (std::size_t i = 0; i < f.size(); ++i)
    EXPECT_NEAR(run.result[i].coords[0], f[i].coords[0], 1e-9);
}

TEST(Cppa, CircleMatchesSubgradient) {
  auto f = circle_1x4();
  ModelConfig c{ModelKind::TV, 0.5};
  SolverOptions o;
  o.max_iterations = 5000;
  auto a = cppa(f, c, o);
  o.solver = Solver::Subgradient;
  auto b = subgradient_descent(f, c, o);
  double d = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    d += std::pow(distance(f.manifold(), a.result[i], b.result[i]), 2);
  EXPECT_LT(std::sqrt(d), 1e-2);
  EXPECT_LE(objective(a.result, f, c), circle_tv_oracle(f, 0.5) + 1e-3);
}

TEST(Cppa, RejectsConstantScheduleInRequiredMode) {
  auto f = circle_1x4();
  SolverOptions o;
  o.schedule = StepSchedule::constant(0.5);
  o.guarantee = Guarantee::Required;
  EXPECT_THROW(cppa(f, {ModelKind::TV, 0.5}, o), std::invalid_argument);
  o.guarantee = Guarantee::BestEffort;
  EXPECT_FALSE(cppa(f, {ModelKind::TV, 0.5}, o).warnings.empty());
}

TEST(Cppa, TraceBounded) {
  auto f = spd_4x4();
  SolverOptions o;
  o.max_iterations = 30;
  auto run = cppa(f, {ModelKind::TVTV2, 0.3, 0.5, 1}, o);
  EXPECT_LE(run.trace.size(), 31u);
  for (const auto& e : run.trace) EXPECT_TRUE(std::isfinite(e.objective));
}

TEST(TermBatches, DisjointFootprintsAndFamilyOrder) {
  auto terms = regularizer_terms({ModelKind::TVTV2, 0.3, 0.5, 1}, 5, 6);
  auto batches = term_batches(terms);
  std::size_t covered = 0;
  int last_family = -1;
  for (const auto& b : batches) {
    std::set<std::size_t> seen;
    const int family = static_cast<int>(terms[b.front()].family);
    EXPECT_GE(family, last_family);
    last_family = family;
    for (std::size_t t : b) {
      EXPECT_EQ(static_cast<int>(terms[t].family), family);
      for (std::size_t px : terms[t].footprint()) EXPECT_TRUE(seen.insert(px).second);
    }
    covered += b.size();
  }
  EXPECT_EQ(covered, terms.size());
}

// ---------------------------------------------------------------- DR drivers

TEST(DouglasRachford, EuclideanPairMatchesCppa) {
  auto f = line(ManifoldTag::euclidean(1), {0.0, 1.0});
  ModelConfig c{ModelKind::TV, 0.2};
  SolverOptions o;
  o.solver = Solver::DR;
  o.max_iterations = 300;
  auto run = douglas_rachford(f, c, o);
  EXPECT_NEAR(run.result[0].coords[0], 0.2, 1e-6);
  EXPECT_NEAR(run.result[1].coords[0], 0.8, 1e-6);
}

TEST(ParallelDouglasRachford, SpdMatchesCppa) {
  auto f = spd_4x4();
  ModelConfig c{ModelKind::TV, 0.5};
  SolverOptions o;
  o.max_iterations = 20000;
  auto a = cppa(f, c, o);
  o.solver = Solver::ParallelDR;
  auto b = parallel_douglas_rachford(f, c, o);
  const double ja = objective(a.result, f, c), jb = objective(b.result, f, c);
  EXPECT_LT(std::abs(ja - jb), 1e-3 * ja);
  EXPECT_FALSE(b.regime.empty());
}

// ---------------------------------------------------------------- dispatch

TEST(Denoise, RejectsUnsupportedPairs) {
  auto f = circle_1x4();
  SolverOptions o;
  o.solver = Solver::HalfQuadratic;
  EXPECT_THROW(denoise(f, {ModelKind::TV, 0.5}, o), std::invalid_argument);
  o.solver = Solver::CPPA;
  EXPECT_THROW(denoise(f, {ModelKind::TVphi, 0.5}, o), std::invalid_argument);
  EXPECT_THROW(denoise(f, {ModelKind::TGV, 0.5}, o), std::invalid_argument);
  o.solver = Solver::GradientDescent;
  EXPECT_THROW(denoise(f, {ModelKind::TV, 0.5}, o), std::invalid_argument);
  o.max_iterations = 0;
  EXPECT_THROW(denoise(f, {ModelKind::TGV, 0.5}, o), std::invalid_argument);
}

TEST(Denoise, TgvGradientDescentDecreasesObjective) {
  auto f = spd_4x4();
  ModelConfig c{ModelKind::TGV, 0.3, 0.5, 1};
  SolverOptions o;
  o.solver = Solver::GradientDescent;
  o.max_iterations = 60;
  auto run = denoise(f, c, o);
  EXPECT_LE(run.trace.back().objective, run.trace.front().objective);
}

TEST(Denoise, BitIdenticalTraces) {
  auto f = spd_4x4();
  for (Solver s : {Solver::Subgradient, Solver::CPPA, Solver::DR, Solver::ParallelDR}) {
    SolverOptions o;
    o.solver = s;
    o.max_iterations = 15;
    o.dr_inner_sweeps = 10;
    ModelConfig c{ModelKind::TV, 0.4};
    auto a = denoise(f, c, o), b = denoise(f, c, o);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t r = 0; r < a.trace.size(); ++r) {
      EXPECT_EQ(a.trace[r].objective, b.trace[r].objective) << to_string(s);
      EXPECT_EQ(a.trace[r].change, b.trace[r].change);
    }
  }
}

TEST(Denoise, WorkerCountDoesNotChangeResult) {
  auto f = spd_4x4();
  SolverOptions o;
  o.max_iterations = 10;
  ModelConfig c{ModelKind::TVTV2, 0.3, 0.5, 1};
  set_worker_count(1);
  auto a = denoise(f, c, o);
  set_worker_count(4);
  auto b = denoise(f, c, o);
  set_worker_count(1);
  for (std::size_t i = 0; i < f.size(); ++i)
    EXPECT_EQ(a.result[i].coords, b.result[i].coords);
}

TEST(NudgeCutLocus, MovesAntipodalNeighbor) {
  auto u = line(ManifoldTag::circle(), {0.0, -std::numbers::pi, 0.5});
  auto prev = line(ManifoldTag::circle(), {0.0, -3.0, 0.5});
  std::string log = nudge_cut_locus(u, 0, &prev);
  EXPECT_FALSE(log.empty());
  EXPECT_NE(u[1].coords[0], -std::numbers::pi);
  EXPECT_NO_THROW(forward_differences(u));
}

}  // namespace
}  // namespace manivar
