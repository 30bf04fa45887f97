#include "manivar/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "manivar/parallel.hpp"

namespace manivar {

void write_mvd(std::ostream& out, const ManifoldImage& u) {
  out << "MVD1\n" << u.tag().to_string() << '\n' << u.n1() << ' ' << u.n2() << '\n';
  char buf[32];
  for (const Point& p : u.pixels()) {
    for (Eigen::Index k = 0; k < p.coords.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", p.coords[k]);
      if (k) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

void write_mvd(const std::string& path, const ManifoldImage& u) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
  write_mvd(out, u);
  if (!out) throw std::invalid_argument("failed writing '" + path + "'");
}

ManifoldImage read_mvd(std::istream& in) {
  std::string magic, tag_line;
  if (!std::getline(in, magic) || magic != "MVD1")
    throw std::invalid_argument("not an MVD1 file (bad magic)");
  if (!std::getline(in, tag_line)) throw std::invalid_argument("MVD1: missing tag line");
  ManifoldPtr m = make_manifold(ManifoldTag::parse(tag_line));
  long n1 = 0, n2 = 0;
  if (!(in >> n1 >> n2) || n1 <= 0 || n2 <= 0)
    throw std::invalid_argument("MVD1: bad image dimensions");
  const std::size_t count = static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2);
  std::vector<Point> px(count);
  std::string token;
  for (std::size_t i = 0; i < count; ++i) {
    Vec c(m->chart_size());
    for (int k = 0; k < c.size(); ++k) {
      if (!(in >> token))
        throw std::invalid_argument("MVD1: expected " + std::to_string(count * m->chart_size()) +
                                    " coordinates, file ends early");
      std::size_t used = 0;
      try {
        c[k] = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size()) throw std::invalid_argument("MVD1: bad coordinate '" + token + "'");
    }
    px[i] = {c};
  }
  if (in >> token) throw std::invalid_argument("MVD1: trailing data after the last pixel");
  return ManifoldImage(m, static_cast<int>(n1), static_cast<int>(n2), std::move(px));
}

ManifoldImage read_mvd(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  return read_mvd(in);
}

void write_trace_csv(const std::string& path, const std::vector<TraceEntry>& trace) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
  out << "iteration,objective,change\n";
  char buf[96];
  for (const auto& e : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", e.iteration, e.objective, e.change);
    out << buf;
  }
}

PhantomKind parse_phantom(const std::string& name) {
  if (name == "s1-blocks") return PhantomKind::S1Blocks;
  if (name == "s2-patches") return PhantomKind::S2Patches;
  if (name == "spd-gradient") return PhantomKind::SPDGradient;
  throw std::invalid_argument("unknown phantom '" + name +
                              "' (expected s1-blocks, s2-patches, spd-gradient)");
}

namespace {

using std::numbers::pi;

Point angle(double a) { return {Vec::Constant(1, wrap_angle(a))}; }

Vec sym_to_vec(const Eigen::MatrixXd& a) {
  Vec v(a.size());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) v[r * a.cols() + c] = a(r, c);
  return v;
}

}  // namespace

ManifoldImage phantom(PhantomKind kind, int n1, int n2) {
  if (n1 <= 0 || n2 <= 0) throw std::invalid_argument("phantom size must be positive");
  std::vector<Point> px;
  px.reserve(static_cast<std::size_t>(n1) * n2);
  switch (kind) {
    case PhantomKind::S1Blocks: {
      // Upper half (small i2): four constant blocks with jumps of 2, 2 and 1.5.
      // Lower half: a ramp winding once around the circle in x, and a ramp
      // in y on its right quarter.
      const double levels[4] = {-2.5, -0.5, 1.5, 3.0};
      for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < n2; ++i2) {
          const double x = (i1 + 0.5) / n1, y = (i2 + 0.5) / n2;
          if (y < 0.5)
            px.push_back(angle(levels[std::min(3, static_cast<int>(4 * x))]));
          else if (x < 0.75)
            px.push_back(angle(-pi + 2 * pi * x / 0.75));
          else
            px.push_back(angle(1.0 - 2.0 * (y - 0.5)));
        }
      return ManifoldImage(make_manifold(ManifoldTag::circle()), n1, n2, std::move(px));
    }
    case PhantomKind::S2Patches: {
      // 2 x 2 tiles, each a ramp along a different great circle.
      auto m = make_manifold(ManifoldTag::sphere2());
      const Vec centers[4] = {Vec::Unit(3, 2), Vec::Unit(3, 0), Vec::Unit(3, 1), -Vec::Unit(3, 2)};
      const Vec dirs[4] = {Vec::Unit(3, 0), Vec::Unit(3, 1), Vec::Unit(3, 2), Vec::Unit(3, 1)};
      for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < n2; ++i2) {
          const double x = (i1 + 0.5) / n1, y = (i2 + 0.5) / n2;
          const int tile = (x < 0.5 ? 0 : 2) + (y < 0.5 ? 0 : 1);
          const double t = tile % 2 == 0 ? 2 * x - (x < 0.5 ? 0.5 : 1.5) : 2 * y - 1.5;
          px.push_back({m->exp_map(centers[tile], 1.2 * t * dirs[tile])});
        }
      return ManifoldImage(m, n1, n2, std::move(px));
    }
    case PhantomKind::SPDGradient: {
      // diag(e^{a}, e^{b}) with a, b linear in x and y (a geodesic grid);
      // the right half is rotated by 45 degrees, giving a jump.
      auto m = make_manifold(ManifoldTag::spd(2));
      Eigen::Matrix2d r;
      r << std::cos(pi / 4), -std::sin(pi / 4), std::sin(pi / 4), std::cos(pi / 4);
      for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < n2; ++i2) {
          const double x = (i1 + 0.5) / n1, y = (i2 + 0.5) / n2;
          Eigen::Matrix2d d = Eigen::Vector2d(std::exp(1.5 * x), std::exp(-1.0 + y)).asDiagonal();
          Eigen::MatrixXd a = y < 0.5 ? Eigen::Matrix2d(d) : Eigen::Matrix2d(r * d * r.transpose());
          a = 0.5 * (a + a.transpose()).eval();
          px.push_back({sym_to_vec(a)});
        }
      return ManifoldImage(m, n1, n2, std::move(px));
    }
  }
  throw std::invalid_argument("unknown phantom");
}

ManifoldImage add_noise(const ManifoldImage& u, const NoiseSpec& spec) {
  if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma))
    throw std::invalid_argument("sigma must be finite and non-negative");
  if (spec.sigma == 0.0) return u;
  const Manifold& m = u.manifold();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, spec.sigma);
  std::vector<Point> px(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    Vec v = m.zero_tangent();
    for (const Vec& e : m.tangent_basis(u[i].coords)) v += normal(rng) * e;
    Vec y = m.exp_map(u[i].coords, v);
    if (m.tag().kind == ManifoldTag::Kind::Circle) y[0] = wrap_angle(y[0]);
    px[i] = {y};
  }
  return ManifoldImage(u.manifold_ptr(), u.n1(), u.n2(), std::move(px));
}

double mse(const ManifoldImage& u, const ManifoldImage& v) {
  u.require_compatible(v, "mse");
  std::vector<double> d(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    double t = u.manifold().dist(u[i].coords, v[i].coords);
    d[i] = t * t;
  }
  return pairwise_sum(d) / static_cast<double>(u.size());
}

}  // namespace manivar
