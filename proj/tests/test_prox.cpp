#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "manivar/differences.hpp"
#include "manivar/prox.hpp"
#include "prox_oracles.hpp"
#include "test_support.hpp"

namespace manivar {
namespace {

using std::numbers::pi;
using testing::circle_diff_objective;
using testing::circle_dist;
using testing::grid_minimum;
using testing::random_point;

Point pt(std::initializer_list<double> v) {
  Vec c(static_cast<int>(v.size()));
  int i = 0;
  for (double d : v) c[i++] = d;
  return {c};
}

std::vector<double> angles(const ProxResult& r) {
  std::vector<double> out;
  for (const auto& p : r.points) out.push_back(p.coords[0]);
  return out;
}

std::vector<double> angles(const std::vector<Point>& pts) {
  std::vector<double> out;
  for (const auto& p : pts) out.push_back(p.coords[0]);
  return out;
}

TEST(ProxDistToPoint, Examples) {
  auto r1 = make_manifold(ManifoldTag::euclidean(1));
  EXPECT_NEAR(prox_dist_to_point(*r1, pt({0}), pt({1}), 0.2, 1).points[0].coords[0], 0.2, 1e-15);
  EXPECT_NEAR(prox_dist_to_point(*r1, pt({0}), pt({1}), 1.0, 2).points[0].coords[0], 0.5, 1e-15);
  EXPECT_NEAR(prox_dist_to_point(*r1, pt({0}), pt({1}), 1e-9, 1).points[0].coords[0], 0.0, 1e-8);
  EXPECT_EQ(prox_dist_to_point(*r1, pt({0}), pt({1}), 5.0, 1).points[0].coords[0], 1.0);
  EXPECT_EQ(prox_dist_to_point(*r1, pt({1}), pt({1}), 0.5, 1).points[0].coords[0], 1.0);
  EXPECT_THROW(prox_dist_to_point(*r1, pt({0}), pt({1}), 0.0, 1), std::invalid_argument);
  EXPECT_THROW(prox_dist_to_point(*r1, pt({0}), pt({1}), 1.0, 3), std::invalid_argument);
}

TEST(ProxDistToPoint, BeatsGridOracle) {
  auto r1 = make_manifold(ManifoldTag::euclidean(1));
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-2, 2), l(0.05, 3);
  for (int p : {1, 2}) {
    for (int i = 0; i < 20; ++i) {
      double x = u(rng), y = u(rng), lambda = l(rng);
      double q = prox_dist_to_point(*r1, pt({x}), pt({y}), lambda, p).points[0].coords[0];
      auto f = [&](const std::vector<double>& v) {
        double d = std::abs(v[0] - y);
        return 0.5 * (v[0] - x) * (v[0] - x) + lambda * (p == 1 ? d : 0.5 * d * d);
      };
      EXPECT_LE(f({q}), grid_minimum(f, 1, -3, 3, 1e-2) + 1e-6);
    }
  }
}

TEST(ProxDistPair, Examples) {
  auto r1 = make_manifold(ManifoldTag::euclidean(1));
  auto a = prox_dist_pair(*r1, pt({0}), pt({1}), 0.2, 1);
  EXPECT_NEAR(a.points[0].coords[0], 0.2, 1e-15);
  EXPECT_NEAR(a.points[1].coords[0], 0.8, 1e-15);
  auto b = prox_dist_pair(*r1, pt({0}), pt({1}), 10.0, 1);
  EXPECT_NEAR(b.points[0].coords[0], 0.5, 1e-15);
  EXPECT_NEAR(b.points[1].coords[0], 0.5, 1e-15);
  auto c = prox_dist_pair(*r1, pt({0.3}), pt({0.3}), 1.0, 1);
  EXPECT_EQ(c.points[0].coords[0], 0.3);
  EXPECT_EQ(c.points[1].coords[0], 0.3);
}

TEST(ProxDistPair, BeatsGridOracle) {
  auto r1 = make_manifold(ManifoldTag::euclidean(1));
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(-1.5, 1.5), l(0.05, 2);
  for (int p : {1, 2}) {
    for (int i = 0; i < 10; ++i) {
      double x = u(rng), y = u(rng), lambda = l(rng);
      auto r = prox_dist_pair(*r1, pt({x}), pt({y}), lambda, p);
      auto f = [&](const std::vector<double>& v) {
        double d = std::abs(v[0] - v[1]);
        return 0.5 * ((v[0] - x) * (v[0] - x) + (v[1] - y) * (v[1] - y)) +
               lambda * (p == 1 ? d : 0.5 * d * d);
      };
      EXPECT_LE(f({r.points[0].coords[0], r.points[1].coords[0]}),
                grid_minimum(f, 2, -2, 2, 0.05) + 1e-6);
    }
  }
}

TEST(ProxDist, NonexpansiveOnSpd) {
  auto m = make_manifold(ManifoldTag::spd(2));
  auto m2 = make_manifold(ManifoldTag::power(ManifoldTag::spd(2), 2));
  std::mt19937_64 rng(33);
  for (int i = 0; i < 200; ++i) {
    Point y = random_point(*m, rng), a = random_point(*m, rng), b = random_point(*m, rng);
    for (int p : {1, 2}) {
      Point pa = prox_dist_to_point(*m, a, y, 0.4, p).points[0];
      Point pb = prox_dist_to_point(*m, b, y, 0.4, p).points[0];
      EXPECT_LE(distance(*m, pa, pb), distance(*m, a, b) + 1e-10);

      Point a2 = random_point(*m, rng), b2 = random_point(*m, rng);
      auto ra = prox_dist_pair(*m, a, a2, 0.4, p), rb = prox_dist_pair(*m, b, b2, 0.4, p);
      auto join = [](const Point& s, const Point& t) {
        Vec c(s.coords.size() + t.coords.size());
        c << s.coords, t.coords;
        return Point{c};
      };
      EXPECT_LE(distance(*m2, join(ra.points[0], ra.points[1]), join(rb.points[0], rb.points[1])),
                distance(*m2, join(a, a2), join(b, b2)) + 1e-10);
    }
  }
}

TEST(ProxDist, MovesMonotonicallyWithLambda) {
  auto m = make_manifold(ManifoldTag::spd(2));
  std::mt19937_64 rng(34);
  Point x = random_point(*m, rng), y = random_point(*m, rng);
  double prev = 0.0;
  for (double lambda : {0.01, 0.1, 0.3, 1.0, 3.0, 10.0}) {
    double d = distance(*m, x, prox_dist_to_point(*m, x, y, lambda, 1).points[0]);
    EXPECT_GE(d, prev - 1e-14);
    prev = d;
  }
  EXPECT_NEAR(prev, distance(*m, x, y), 1e-12);
  auto r = prox_dist_pair(*m, x, y, 100.0, 1);
  EXPECT_LT(distance(*m, r.points[0], r.points[1]), 1e-10);
}

TEST(ProxCircleDiff, Examples) {
  auto a = prox_circle_diff({0, 0, 0}, 0.7, 2, 1);
  EXPECT_EQ(angles(a), (std::vector<double>{0, 0, 0}));
  auto b = prox_circle_diff({0, 1}, 0.2, 1, 1);
  EXPECT_NEAR(b.points[0].coords[0], 0.2, 1e-15);
  EXPECT_NEAR(b.points[1].coords[0], 0.8, 1e-15);
  EXPECT_FALSE(b.multivalued);
  EXPECT_FALSE(b.alternatives.has_value());

  // (6)_{2pi} < 0: the two angles move apart in angle value, i.e. toward each
  // other across the +-pi seam.
  auto c = prox_circle_diff({-3, 3}, 0.1, 1, 1);
  EXPECT_NEAR(c.points[0].coords[0], -3.1, 1e-14);
  EXPECT_NEAR(c.points[1].coords[0], 3.1, 1e-14);
  EXPECT_THROW(prox_circle_diff({0, 1, 2}, 0.1, 1, 1), std::invalid_argument);
}

TEST(ProxCircleDiff, BoundaryCaseIsTwoFold) {
  auto r = prox_circle_diff({0.0, -pi}, 0.3, 1, 1);
  ASSERT_TRUE(r.multivalued);
  ASSERT_TRUE(r.alternatives.has_value());
  double f_plus = circle_diff_objective({0.0, -pi}, angles(r), 0.3, 1);
  double f_minus = circle_diff_objective({0.0, -pi}, angles(*r.alternatives), 0.3, 1);
  EXPECT_NEAR(f_plus, f_minus, 1e-14);
  EXPECT_NE(r.points[0].coords[0], (*r.alternatives)[0].coords[0]);
}

// Draws angles whose weighted sum is in the interior or exactly on the
// boundary |(<x, w>)_{2pi}| = pi.
std::vector<double> circle_instance(int order, bool boundary, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-pi, pi);
  std::vector<double> x(order + 1);
  for (auto& a : x) a = u(rng);
  if (boundary) {
    if (order == 1) x[1] = wrap_angle(x[0] + pi);
    else x[2] = wrap_angle(pi - x[0] + 2 * x[1]);
  }
  return x;
}

TEST(ProxCircleDiff, AllBranchesBeatGridOracle) {
  std::mt19937_64 rng(35);
  std::uniform_real_distribution<double> l(0.05, 1.5);
  for (int order : {1, 2}) {
    for (int power : {1, 2}) {
      for (bool boundary : {false, true}) {
        for (int i = 0; i < 5; ++i) {
          auto x = circle_instance(order, boundary, rng);
          double lambda = l(rng);
          auto r = prox_circle_diff(x, lambda, order, power);
          EXPECT_EQ(r.multivalued, boundary);
          auto f = [&](const std::vector<double>& u) {
            return circle_diff_objective(x, u, lambda, power);
          };
          double oracle = grid_minimum(f, order + 1, -pi, pi, order == 1 ? 0.02 : 0.1);
          EXPECT_LE(f(angles(r)), oracle + 1e-6) << order << power << boundary;
          if (boundary) EXPECT_LE(f(angles(*r.alternatives)), oracle + 1e-6);
        }
      }
    }
  }
}

// On S1 both midpoints of a pair are admissible; d11 takes the closer pair.
double circle_mixed_min(const std::vector<double>& u) {
  double best = 1e300;
  for (double s1 : {0.0, pi})
    for (double s2 : {0.0, pi}) {
      double m1 = u[0] + 0.5 * wrap_angle(u[2] - u[0]) + s1;
      double m2 = u[1] + 0.5 * wrap_angle(u[3] - u[1]) + s2;
      best = std::min(best, circle_dist(m1, m2));
    }
  return best;
}

TEST(ProxMixedSecondOrder, CircleClosedFormBeatsGridOracle) {
  auto circle = make_manifold(ManifoldTag::circle());
  std::mt19937_64 rng(40);
  std::uniform_real_distribution<double> u(-pi, pi), l(0.05, 1.0);
  for (int p : {1, 2}) {
    for (int i = 0; i < 3; ++i) {
      std::vector<double> x(4);
      for (auto& a : x) a = u(rng);
      const double lambda = l(rng);
      auto pt = [&](int k) { return Point{Vec::Constant(1, x[k])}; };
      auto r = prox_mixed_second_order(*circle, pt(0), pt(1), pt(2), pt(3), lambda, p);
      auto f = [&](const std::vector<double>& q) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k) s += 0.5 * std::pow(circle_dist(x[k], q[k]), 2);
        double d = circle_mixed_min(q);
        return s + lambda * std::pow(d, p);
      };
      EXPECT_LE(f(angles(r)), grid_minimum(f, 4, -pi, pi, 0.2) + 1e-6) << p;
    }
  }
}

TEST(ProxCircleData, MatchesGeodesicFormAndOracle) {
  auto circle = make_manifold(ManifoldTag::circle());
  std::mt19937_64 rng(36);
  std::uniform_real_distribution<double> u(-pi, pi), l(0.05, 3);
  for (int i = 0; i < 20; ++i) {
    double x = u(rng), y = u(rng), lambda = l(rng);
    double q = prox_circle_data(x, y, lambda).points[0].coords[0];
    double g = prox_dist_to_point(*circle, pt({x}), pt({y}), lambda, 2).points[0].coords[0];
    EXPECT_LT(circle_dist(q, g), 1e-12);
    auto f = [&](const std::vector<double>& v) {
      double a = circle_dist(x, v[0]), b = circle_dist(v[0], y);
      return 0.5 * a * a + 0.5 * lambda * b * b;
    };
    EXPECT_LE(f({q}), grid_minimum(f, 1, -pi, pi, 1e-2) + 1e-6);
  }
}

TEST(ProxSecondOrder, CollinearTripleIsFixed) {
  auto sphere = make_manifold(ManifoldTag::sphere2());
  Point x = pt({1, 0, 0}), z = pt({0, 1, 0});
  Point y = principal_midpoint(*sphere, x, z);
  auto r = prox_second_order(*sphere, x, y, z, 0.5, 1);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(distance(*sphere, r.points[0], x), 1e-12);
  EXPECT_LT(distance(*sphere, r.points[1], y), 1e-12);
  EXPECT_LT(distance(*sphere, r.points[2], z), 1e-12);
}

TEST(ProxSecondOrder, MatchesEuclideanShrinkage) {
  auto r2 = make_manifold(ManifoldTag::euclidean(2));
  std::mt19937_64 rng(37);
  std::normal_distribution<double> n(0, 1);
  for (int p : {1, 2}) {
    for (int i = 0; i < 20; ++i) {
      Eigen::Vector2d a(n(rng), n(rng)), b(n(rng), n(rng)), c(n(rng), n(rng));
      double lambda = 0.1 + std::abs(n(rng));
      auto r = prox_second_order(*r2, {a}, {b}, {c}, lambda, p);
      // Oracle: with A = (1/2, -1, 1/2) (x) I we have A A^T = (3/2) I.
      Eigen::Vector2d res = 0.5 * (a + c) - b;
      double rn = res.norm(), s;
      if (p == 1) s = std::min(lambda, rn / 1.5) / rn;
      else s = 2 * lambda / (1 + 3 * lambda);
      Eigen::Vector2d ea = a - s * 0.5 * res, eb = b + s * res, ec = c - s * 0.5 * res;
      EXPECT_LT((r.points[0].coords - ea).norm(), 1e-9);
      EXPECT_LT((r.points[1].coords - eb).norm(), 1e-9);
      EXPECT_LT((r.points[2].coords - ec).norm(), 1e-9);
    }
  }
}

TEST(ProxSecondOrder, CircleRoutesToClosedForm) {
  auto circle = make_manifold(ManifoldTag::circle());
  auto r = prox_second_order(*circle, pt({0.1}), pt({0.9}), pt({0.3}), 0.4, 1);
  auto e = prox_circle_diff({0.1, 0.9, 0.3}, 0.2, 2, 1);
  EXPECT_EQ(angles(r), angles(e));
}

// Local optimality on curved spaces: random small perturbations of the
// output never decrease the objective.
template <typename Objective>
void expect_local_minimum(const Manifold& m, const std::vector<Point>& q, Objective f,
                          std::mt19937_64& rng) {
  double f0 = f(q);
  for (int k = 0; k < 50; ++k) {
    std::vector<Point> moved = q;
    for (auto& p : moved) p = exp(m, p, testing::random_tangent(m, p, rng, 1e-4));
    EXPECT_GE(f(moved), f0 - 1e-12);
  }
}

TEST(ProxSecondOrder, LocallyOptimalOnCurvedSpaces) {
  std::mt19937_64 rng(38);
  for (const auto& tag : {ManifoldTag::sphere2(), ManifoldTag::spd(2), ManifoldTag::rotations3()}) {
    auto m = make_manifold(tag);
    for (int p : {1, 2}) {
      for (int i = 0; i < 5; ++i) {
        std::vector<Point> x = {random_point(*m, rng, 0.8), random_point(*m, rng, 0.8),
                                random_point(*m, rng, 0.8)};
        const double lambda = 0.3;
        auto r = prox_second_order(*m, x[0], x[1], x[2], lambda, p);
        EXPECT_TRUE(r.converged) << tag.to_string();
        auto f = [&](const std::vector<Point>& q) {
          double s = 0.0;
          for (int k = 0; k < 3; ++k) s += 0.5 * std::pow(distance(*m, x[k], q[k]), 2);
          double d = second_diff(*m, q[0], q[1], q[2]).value;
          return s + lambda * std::pow(d, p);
        };
        expect_local_minimum(*m, r.points, f, rng);
      }
    }
  }
}

TEST(ProxMixedSecondOrder, LocallyOptimal) {
  std::mt19937_64 rng(39);
  for (const auto& tag : {ManifoldTag::euclidean(2), ManifoldTag::sphere2(), ManifoldTag::spd(2)}) {
    auto m = make_manifold(tag);
    for (int i = 0; i < 5; ++i) {
      std::vector<Point> x;
      for (int k = 0; k < 4; ++k) x.push_back(random_point(*m, rng, 0.8));
      auto r = prox_mixed_second_order(*m, x[0], x[1], x[2], x[3], 0.25, 1);
      EXPECT_TRUE(r.converged);
      auto f = [&](const std::vector<Point>& q) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k) s += 0.5 * std::pow(distance(*m, x[k], q[k]), 2);
        return s + 0.25 * mixed_second_diff(*m, q[0], q[1], q[2], q[3]).value;
      };
      expect_local_minimum(*m, r.points, f, rng);
    }
  }
}

}  // namespace
}  // namespace manivar
