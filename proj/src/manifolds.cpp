#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "manivar/manifold.hpp"
#include "spd_linalg.hpp"

namespace manivar {

double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  double r = std::fmod(a + pi, 2.0 * pi);
  if (r < 0) r += 2.0 * pi;
  double w = r - pi;
  if (w >= pi) w -= 2.0 * pi;
  return w;
}

namespace {

constexpr double kPi = std::numbers::pi;

class Euclidean final : public Manifold {
 public:
  explicit Euclidean(int m) : Manifold(ManifoldTag::euclidean(m)), m_(m) {}

  int dimension() const override { return m_; }
  int chart_size() const override { return m_; }
  int tangent_size() const override { return m_; }
  double injectivity_radius() const override { return std::numeric_limits<double>::infinity(); }
  CurvatureSign curvature_sign() const override { return CurvatureSign::Flat; }

  void check_point(const Vec& x) const override {
    if (x.size() != m_) throw std::invalid_argument("R(m) point has wrong size");
    if (!x.allFinite()) throw std::invalid_argument("R(m) point is not finite");
  }
  Vec exp_map(const Vec& x, const Vec& v) const override { return x + v; }
  Vec log_map(const Vec& x, const Vec& y) const override { return y - x; }
  double dist(const Vec& x, const Vec& y) const override { return (y - x).norm(); }
  double metric(const Vec&, const Vec& v, const Vec& w) const override { return v.dot(w); }
  Vec transport_along(const Vec&, const Vec&, double, const Vec& xi) const override { return xi; }
  std::vector<Vec> tangent_basis(const Vec&) const override {
    std::vector<Vec> b;
    for (int i = 0; i < m_; ++i) b.push_back(Vec::Unit(m_, i));
    return b;
  }
  CurvatureFrame curvature_frame(const Vec&, const Vec& v) const override {
    CurvatureFrame f;
    double n = v.norm();
    if (n == 0.0) {
      for (int i = 0; i < m_; ++i) f.vectors.push_back(Vec::Unit(m_, i));
    } else {
      // Gram-Schmidt of {v, e_0, e_1, ...}
      f.vectors.push_back(v / n);
      for (int i = 0; i < m_ && static_cast<int>(f.vectors.size()) < m_; ++i) {
        Vec e = Vec::Unit(m_, i);
        for (const auto& q : f.vectors) e -= q.dot(e) * q;
        double en = e.norm();
        if (en > 1e-8) f.vectors.push_back(e / en);
      }
    }
    f.kappa.assign(f.vectors.size(), 0.0);
    return f;
  }

 private:
  int m_;
};

class Circle final : public Manifold {
 public:
  Circle() : Manifold(ManifoldTag::circle()) {}

  int dimension() const override { return 1; }
  int chart_size() const override { return 1; }
  int tangent_size() const override { return 1; }
  double injectivity_radius() const override { return kPi; }
  CurvatureSign curvature_sign() const override { return CurvatureSign::Flat; }

  void check_point(const Vec& x) const override {
    if (x.size() != 1) throw std::invalid_argument("S1 point has wrong size");
    if (!(x[0] >= -kPi && x[0] < kPi)) throw std::invalid_argument("S1 angle outside [-pi, pi)");
  }
  Vec exp_map(const Vec& x, const Vec& v) const override {
    return Vec::Constant(1, wrap_angle(x[0] + v[0]));
  }
  Vec log_map(const Vec& x, const Vec& y) const override {
    double d = wrap_angle(y[0] - x[0]);
    if (std::abs(std::abs(d) - kPi) <= 1e-12) throw CutLocusError("S1: points are antipodal");
    return Vec::Constant(1, d);
  }
  Vec log_any(const Vec& x, const Vec& y) const override {
    return Vec::Constant(1, wrap_angle(y[0] - x[0]));
  }
  double dist(const Vec& x, const Vec& y) const override {
    return std::abs(wrap_angle(y[0] - x[0]));
  }
  double metric(const Vec&, const Vec& v, const Vec& w) const override { return v[0] * w[0]; }
  Vec transport_along(const Vec&, const Vec&, double, const Vec& xi) const override { return xi; }
  std::vector<Vec> tangent_basis(const Vec&) const override { return {Vec::Ones(1)}; }
  CurvatureFrame curvature_frame(const Vec&, const Vec& v) const override {
    return {{Vec::Constant(1, v[0] < 0 ? -1.0 : 1.0)}, {0.0}};
  }
};

class Sphere2 final : public Manifold {
 public:
  Sphere2() : Manifold(ManifoldTag::sphere2()) {}

  int dimension() const override { return 2; }
  int chart_size() const override { return 3; }
  int tangent_size() const override { return 3; }
  double injectivity_radius() const override { return kPi; }
  CurvatureSign curvature_sign() const override { return CurvatureSign::NonNegative; }

  void check_point(const Vec& x) const override {
    if (x.size() != 3) throw std::invalid_argument("S2 point has wrong size");
    if (!x.allFinite() || std::abs(x.norm() - 1.0) > 1e-12)
      throw std::invalid_argument("S2 point is not a unit vector");
  }
  void check_tangent(const Vec& x, const Vec& v) const override {
    if (v.size() != 3) throw std::invalid_argument("S2 tangent has wrong size");
    if (std::abs(x.dot(v)) > 1e-10 * std::max(1.0, v.norm()))
      throw std::invalid_argument("S2 tangent is not orthogonal to its base");
  }
  Vec exp_map(const Vec& x, const Vec& v) const override {
    double t = v.norm();
    if (t == 0.0) return x;
    Vec y = std::cos(t) * x + (std::sin(t) / t) * v;
    return y / y.norm();
  }
  Vec log_map(const Vec& x, const Vec& y) const override {
    double c = x.dot(y);
    if (c <= -1.0 + 1e-12) throw CutLocusError("S2: points are antipodal");
    Vec w = y - c * x;
    double s = w.norm();
    if (s == 0.0) return Vec::Zero(3);
    double theta = std::atan2(s, c);
    Vec v = (theta / s) * w;
    return v - x.dot(v) * x;
  }
  Vec log_any(const Vec& x, const Vec& y) const override {
    if (x.dot(y) <= -1.0 + 1e-12) return kPi * tangent_basis(x)[0];
    return log_map(x, y);
  }
  double dist(const Vec& x, const Vec& y) const override {
    Eigen::Vector3d a = x, b = y;
    return std::atan2(a.cross(b).norm(), a.dot(b));
  }
  double metric(const Vec&, const Vec& v, const Vec& w) const override { return v.dot(w); }
  Vec transport_along(const Vec& x, const Vec& v, double t, const Vec& xi) const override {
    double vn = v.norm();
    if (vn == 0.0) return xi;
    Vec n = v / vn;
    double theta = t * vn;
    double a = n.dot(xi);
    return xi - a * n + a * (std::cos(theta) * n - std::sin(theta) * x);
  }
  std::vector<Vec> tangent_basis(const Vec& x) const override {
    Eigen::Vector3d p = x;
    int k = 0;
    p.cwiseAbs().minCoeff(&k);
    Eigen::Vector3d e1 = p.cross(Eigen::Vector3d::Unit(k)).normalized();
    Eigen::Vector3d e2 = p.cross(e1);
    return {Vec(e1), Vec(e2)};
  }
  CurvatureFrame curvature_frame(const Vec& x, const Vec& v) const override {
    double vn = v.norm();
    if (vn == 0.0) return {tangent_basis(x), {0.0, 0.0}};
    Eigen::Vector3d n = v / vn;
    Eigen::Vector3d p = x;
    Eigen::Vector3d m = p.cross(n);
    return {{Vec(n), Vec(m)}, {0.0, vn * vn}};
  }
};

class Spd final : public Manifold {
 public:
  explicit Spd(int d) : Manifold(ManifoldTag::spd(d)), d_(d) {}

  int dimension() const override { return d_ * (d_ + 1) / 2; }
  int chart_size() const override { return d_ * d_; }
  int tangent_size() const override { return d_ * d_; }
  double injectivity_radius() const override { return std::numeric_limits<double>::infinity(); }
  CurvatureSign curvature_sign() const override { return CurvatureSign::NonPositive; }

  void check_point(const Vec& x) const override {
    if (x.size() != d_ * d_) throw std::invalid_argument("SPD point has wrong size");
    Mat a = spd::to_matrix(x, d_);
    if (!a.allFinite() || (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, a.norm()))
      throw std::invalid_argument("SPD point is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("SPD point is not positive definite");
  }
  void check_tangent(const Vec&, const Vec& v) const override {
    if (v.size() != d_ * d_) throw std::invalid_argument("SPD tangent has wrong size");
    Mat a = spd::to_matrix(v, d_);
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, a.norm()))
      throw std::invalid_argument("SPD tangent is not symmetric");
  }

  Vec exp_map(const Vec& x, const Vec& v) const override {
    spd::Roots r(spd::to_matrix(x, d_));
    Mat a = spd::symmetrize(r.inv_sqrt * spd::to_matrix(v, d_) * r.inv_sqrt);
    return spd::to_vec(spd::symmetrize(r.sqrt * spd::sym_exp(a) * r.sqrt));
  }
  Vec log_map(const Vec& x, const Vec& y) const override {
    spd::Roots r(spd::to_matrix(x, d_));
    Mat b = spd::symmetrize(r.inv_sqrt * spd::to_matrix(y, d_) * r.inv_sqrt);
    return spd::to_vec(spd::symmetrize(r.sqrt * spd::sym_log(b) * r.sqrt));
  }
  double dist(const Vec& x, const Vec& y) const override {
    // Identical charts give exactly zero rather than eigenvalue round-off.
    if (x == y) return 0.0;
    spd::Roots r(spd::to_matrix(x, d_));
    Mat b = spd::symmetrize(r.inv_sqrt * spd::to_matrix(y, d_) * r.inv_sqrt);
    Eigen::SelfAdjointEigenSolver<Mat> es(b);
    return es.eigenvalues().array().log().matrix().norm();
  }
  double metric(const Vec& x, const Vec& v, const Vec& w) const override {
    Eigen::LLT<Mat> llt(spd::to_matrix(x, d_));
    Mat a = llt.solve(spd::to_matrix(v, d_));
    Mat b = llt.solve(spd::to_matrix(w, d_));
    return (a * b).trace();
  }
  Vec transport_along(const Vec& x, const Vec& v, double t, const Vec& xi) const override {
    spd::Roots r(spd::to_matrix(x, d_));
    Mat a = spd::symmetrize(r.inv_sqrt * spd::to_matrix(v, d_) * r.inv_sqrt);
    Mat e = r.sqrt * spd::sym_exp(0.5 * t * a) * r.inv_sqrt;
    return spd::to_vec(spd::symmetrize(e * spd::to_matrix(xi, d_) * e.transpose()));
  }
  std::vector<Vec> tangent_basis(const Vec& x) const override {
    spd::Roots r(spd::to_matrix(x, d_));
    std::vector<Vec> out;
    for (const Mat& e : unit_basis(Mat::Identity(d_, d_))) {
      out.push_back(spd::to_vec(spd::symmetrize(r.sqrt * e * r.sqrt)));
    }
    return out;
  }
  CurvatureFrame curvature_frame(const Vec& x, const Vec& v) const override {
    spd::Roots r(spd::to_matrix(x, d_));
    Mat a = spd::symmetrize(r.inv_sqrt * spd::to_matrix(v, d_) * r.inv_sqrt);
    CurvatureFrame f;
    if (a.norm() == 0.0) {
      f.vectors = tangent_basis(x);
      f.kappa.assign(f.vectors.size(), 0.0);
      return f;
    }
    // In the eigenbasis U of a = U diag(l) U^T, the symmetric units E_ij are
    // eigenvectors of R(., a) a with eigenvalue -(l_i - l_j)^2 / 4. The diagonal
    // block (all eigenvalue 0) is re-orthonormalized to start with a / |a|.
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    const Mat& u = es.eigenvectors();
    const Vec& l = es.eigenvalues();
    std::vector<Vec> diag;
    diag.push_back(l / l.norm());
    for (int i = 0; i < d_ && static_cast<int>(diag.size()) < d_; ++i) {
      Vec e = Vec::Unit(d_, i);
      for (const auto& q : diag) e -= q.dot(e) * q;
      double en = e.norm();
      if (en > 1e-8) diag.push_back(e / en);
    }
    auto push = [&](const Mat& e, double kappa) {
      f.vectors.push_back(spd::to_vec(spd::symmetrize(r.sqrt * u * e * u.transpose() * r.sqrt)));
      f.kappa.push_back(kappa);
    };
    for (const Vec& c : diag) push(c.asDiagonal().toDenseMatrix(), 0.0);
    for (int i = 0; i < d_; ++i) {
      for (int j = i + 1; j < d_; ++j) {
        Mat e = Mat::Zero(d_, d_);
        e(i, j) = e(j, i) = 1.0 / std::sqrt(2.0);
        double gap = l[i] - l[j];
        push(e, -0.25 * gap * gap);
      }
    }
    return f;
  }

 private:
  using Mat = Eigen::MatrixXd;

  // Orthonormal symmetric units (Frobenius), upper triangle in row-major order.
  std::vector<Mat> unit_basis(const Mat&) const {
    std::vector<Mat> out;
    for (int i = 0; i < d_; ++i) {
      for (int j = i; j < d_; ++j) {
        Mat e = Mat::Zero(d_, d_);
        if (i == j) {
          e(i, i) = 1.0;
        } else {
          e(i, j) = e(j, i) = 1.0 / std::sqrt(2.0);
        }
        out.push_back(e);
      }
    }
    return out;
  }

  int d_;
};

// SO(3) -----------------------------------------------------------------------

using Mat3 = Eigen::Matrix3d;
using RowMat3 = Eigen::Matrix<double, 3, 3, Eigen::RowMajor>;

Mat3 to_mat3(const Vec& x) { return Eigen::Map<const RowMat3>(x.data()); }

Vec from_mat3(const Mat3& m) {
  Vec out(9);
  Eigen::Map<RowMat3>(out.data()) = m;
  return out;
}

Mat3 hat(const Eigen::Vector3d& w) {
  Mat3 m;
  m << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return m;
}

Mat3 so3_exp(const Eigen::Vector3d& w) {
  double t = w.norm();
  Mat3 k = hat(w);
  double a, b;
  if (t < 1e-6) {
    a = 1.0 - t * t / 6.0;
    b = 0.5 - t * t / 24.0;
  } else {
    a = std::sin(t) / t;
    b = (1.0 - std::cos(t)) / (t * t);
  }
  return Mat3::Identity() + a * k + b * k * k;
}

// Rotation angle in [0, pi] and the rotation vector; throws near angle pi.
Eigen::Vector3d so3_log(const Mat3& q) {
  Eigen::Vector3d s(q(2, 1) - q(1, 2), q(0, 2) - q(2, 0), q(1, 0) - q(0, 1));
  double sin_t = 0.5 * s.norm();
  double cos_t = std::clamp(0.5 * (q.trace() - 1.0), -1.0, 1.0);
  double t = std::atan2(sin_t, cos_t);
  if (t >= kPi - 1e-12) throw CutLocusError("SO3: rotation angle is pi");
  if (t < 1e-6) return (0.5 + t * t / 12.0) * s;
  if (t < kPi - 1e-4) return (t / (2.0 * sin_t)) * s;
  // Close to pi: axis from the symmetric part, sign from the skew part.
  Mat3 sym = 0.5 * (q + q.transpose()) - cos_t * Mat3::Identity();
  sym /= (1.0 - cos_t);
  int k = 0;
  sym.diagonal().maxCoeff(&k);
  Eigen::Vector3d axis = sym.col(k) / std::sqrt(std::max(sym(k, k), 1e-300));
  axis.normalize();
  if (axis.dot(s) < 0) axis = -axis;
  return t * axis;
}

class Rotations3 final : public Manifold {
 public:
  Rotations3() : Manifold(ManifoldTag::rotations3()) {}

  int dimension() const override { return 3; }
  int chart_size() const override { return 9; }
  int tangent_size() const override { return 3; }
  double injectivity_radius() const override { return kPi; }
  CurvatureSign curvature_sign() const override { return CurvatureSign::NonNegative; }

  void check_point(const Vec& x) const override {
    if (x.size() != 9) throw std::invalid_argument("SO3 point has wrong size");
    Mat3 r = to_mat3(x);
    if (!r.allFinite() || (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-10 ||
        std::abs(r.determinant() - 1.0) > 1e-10)
      throw std::invalid_argument("SO3 point is not a rotation matrix");
  }
  Vec exp_map(const Vec& x, const Vec& v) const override {
    return from_mat3(to_mat3(x) * so3_exp(Eigen::Vector3d(v)));
  }
  Vec log_map(const Vec& x, const Vec& y) const override {
    return Vec(so3_log(to_mat3(x).transpose() * to_mat3(y)));
  }
  Vec log_any(const Vec& x, const Vec& y) const override {
    Mat3 q = to_mat3(x).transpose() * to_mat3(y);
    try {
      return Vec(so3_log(q));
    } catch (const CutLocusError&) {
      // Half-turn: the axis is the unit eigenvector of (q + I) / 2 up to sign.
      Mat3 sym = 0.5 * (q + Mat3::Identity());
      int k = 0;
      sym.diagonal().maxCoeff(&k);
      Eigen::Vector3d axis = sym.col(k).normalized();
      int j = 0;
      axis.cwiseAbs().maxCoeff(&j);
      if (axis[j] < 0) axis = -axis;
      return Vec(kPi * axis);
    }
  }
  double dist(const Vec& x, const Vec& y) const override {
    if (x == y) return 0.0;
    Mat3 q = to_mat3(x).transpose() * to_mat3(y);
    Eigen::Vector3d s(q(2, 1) - q(1, 2), q(0, 2) - q(2, 0), q(1, 0) - q(0, 1));
    return std::atan2(0.5 * s.norm(), std::clamp(0.5 * (q.trace() - 1.0), -1.0, 1.0));
  }
  double metric(const Vec&, const Vec& v, const Vec& w) const override { return v.dot(w); }
  Vec transport_along(const Vec&, const Vec& v, double t, const Vec& xi) const override {
    // Body coordinates of a parallel field obey w' = -(v x w) / 2.
    return Vec(so3_exp(Eigen::Vector3d(-0.5 * t * v)) * Eigen::Vector3d(xi));
  }
  std::vector<Vec> tangent_basis(const Vec&) const override {
    return {Vec::Unit(3, 0), Vec::Unit(3, 1), Vec::Unit(3, 2)};
  }
  CurvatureFrame curvature_frame(const Vec& x, const Vec& v) const override {
    double vn = v.norm();
    if (vn == 0.0) return {tangent_basis(x), {0.0, 0.0, 0.0}};
    Eigen::Vector3d n = v / vn;
    int k = 0;
    n.cwiseAbs().minCoeff(&k);
    Eigen::Vector3d e1 = n.cross(Eigen::Vector3d::Unit(k)).normalized();
    Eigen::Vector3d e2 = n.cross(e1);
    double kappa = 0.25 * vn * vn;
    return {{Vec(n), Vec(e1), Vec(e2)}, {0.0, kappa, kappa}};
  }
};

// Products --------------------------------------------------------------------

class ProductManifold final : public Manifold {
 public:
  ProductManifold(ManifoldTag tag, std::vector<ManifoldPtr> factors)
      : Manifold(std::move(tag)), factors_(std::move(factors)) {
    int c = 0, t = 0;
    for (const auto& f : factors_) {
      chart_offsets_.push_back(c);
      tangent_offsets_.push_back(t);
      c += f->chart_size();
      t += f->tangent_size();
      dim_ += f->dimension();
    }
    chart_ = c;
    tangent_ = t;
  }

  int dimension() const override { return dim_; }
  int chart_size() const override { return chart_; }
  int tangent_size() const override { return tangent_; }
  double injectivity_radius() const override {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& f : factors_) r = std::min(r, f->injectivity_radius());
    return r;
  }
  CurvatureSign curvature_sign() const override {
    bool pos = false, neg = false;
    for (const auto& f : factors_) {
      auto s = f->curvature_sign();
      pos |= (s == CurvatureSign::NonNegative || s == CurvatureSign::Mixed);
      neg |= (s == CurvatureSign::NonPositive || s == CurvatureSign::Mixed);
    }
    if (pos && neg) return CurvatureSign::Mixed;
    if (pos) return CurvatureSign::NonNegative;
    if (neg) return CurvatureSign::NonPositive;
    return CurvatureSign::Flat;
  }

  void check_point(const Vec& x) const override {
    if (x.size() != chart_) throw std::invalid_argument("product point has wrong size");
    for (std::size_t k = 0; k < factors_.size(); ++k) factors_[k]->check_point(cseg(x, k));
  }
  void check_tangent(const Vec& x, const Vec& v) const override {
    if (v.size() != tangent_) throw std::invalid_argument("product tangent has wrong size");
    for (std::size_t k = 0; k < factors_.size(); ++k)
      factors_[k]->check_tangent(cseg(x, k), tseg(v, k));
  }
  Vec exp_map(const Vec& x, const Vec& v) const override {
    Vec out(chart_);
    for (std::size_t k = 0; k < factors_.size(); ++k)
      out.segment(chart_offsets_[k], factors_[k]->chart_size()) =
          factors_[k]->exp_map(cseg(x, k), tseg(v, k));
    return out;
  }
  Vec log_map(const Vec& x, const Vec& y) const override {
    Vec out(tangent_);
    for (std::size_t k = 0; k < factors_.size(); ++k) {
      try {
        out.segment(tangent_offsets_[k], factors_[k]->tangent_size()) =
            factors_[k]->log_map(cseg(x, k), cseg(y, k));
      } catch (const CutLocusError& e) {
        throw e.with_index(k);
      }
    }
    return out;
  }
  Vec log_any(const Vec& x, const Vec& y) const override {
    Vec out(tangent_);
    for (std::size_t k = 0; k < factors_.size(); ++k)
      out.segment(tangent_offsets_[k], factors_[k]->tangent_size()) =
          factors_[k]->log_any(cseg(x, k), cseg(y, k));
    return out;
  }
  double dist(const Vec& x, const Vec& y) const override {
    double s = 0.0;
    for (std::size_t k = 0; k < factors_.size(); ++k) {
      double d = factors_[k]->dist(cseg(x, k), cseg(y, k));
      s += d * d;
    }
    return std::sqrt(s);
  }
  double metric(const Vec& x, const Vec& v, const Vec& w) const override {
    double s = 0.0;
    for (std::size_t k = 0; k < factors_.size(); ++k)
      s += factors_[k]->metric(cseg(x, k), tseg(v, k), tseg(w, k));
    return s;
  }
  Vec transport_along(const Vec& x, const Vec& v, double t, const Vec& xi) const override {
    Vec out(tangent_);
    for (std::size_t k = 0; k < factors_.size(); ++k)
      out.segment(tangent_offsets_[k], factors_[k]->tangent_size()) =
          factors_[k]->transport_along(cseg(x, k), tseg(v, k), t, tseg(xi, k));
    return out;
  }
  std::vector<Vec> tangent_basis(const Vec& x) const override {
    std::vector<Vec> out;
    for (std::size_t k = 0; k < factors_.size(); ++k) {
      for (const Vec& b : factors_[k]->tangent_basis(cseg(x, k))) out.push_back(embed(b, k));
    }
    return out;
  }
  CurvatureFrame curvature_frame(const Vec& x, const Vec& v) const override {
    // The curvature operator of a product is block diagonal.
    CurvatureFrame out;
    for (std::size_t k = 0; k < factors_.size(); ++k) {
      CurvatureFrame f = factors_[k]->curvature_frame(cseg(x, k), tseg(v, k));
      for (std::size_t j = 0; j < f.vectors.size(); ++j) {
        out.vectors.push_back(embed(f.vectors[j], k));
        out.kappa.push_back(f.kappa[j]);
      }
    }
    return out;
  }

 private:
  Vec cseg(const Vec& x, std::size_t k) const {
    return x.segment(chart_offsets_[k], factors_[k]->chart_size());
  }
  Vec tseg(const Vec& v, std::size_t k) const {
    return v.segment(tangent_offsets_[k], factors_[k]->tangent_size());
  }
  Vec embed(const Vec& b, std::size_t k) const {
    Vec out = Vec::Zero(tangent_);
    out.segment(tangent_offsets_[k], factors_[k]->tangent_size()) = b;
    return out;
  }

  std::vector<ManifoldPtr> factors_;
  std::vector<int> chart_offsets_;
  std::vector<int> tangent_offsets_;
  int chart_ = 0;
  int tangent_ = 0;
  int dim_ = 0;
};

}  // namespace

void Manifold::check_tangent(const Vec&, const Vec& v) const {
  if (v.size() != tangent_size()) throw std::invalid_argument("tangent vector has wrong size");
  if (!v.allFinite()) throw std::invalid_argument("tangent vector is not finite");
}

ManifoldPtr make_manifold(const ManifoldTag& tag) {
  tag.validate();
  switch (tag.kind) {
    case ManifoldTag::Kind::Euclidean:
      return std::make_shared<Euclidean>(tag.size);
    case ManifoldTag::Kind::Circle:
      return std::make_shared<Circle>();
    case ManifoldTag::Kind::Sphere2:
      return std::make_shared<Sphere2>();
    case ManifoldTag::Kind::SPD:
      return std::make_shared<Spd>(tag.size);
    case ManifoldTag::Kind::Rotations3:
      return std::make_shared<Rotations3>();
    case ManifoldTag::Kind::Product: {
      std::vector<ManifoldPtr> f;
      for (const auto& c : tag.children) f.push_back(make_manifold(c));
      return std::make_shared<ProductManifold>(tag, std::move(f));
    }
    case ManifoldTag::Kind::Power: {
      ManifoldPtr base = make_manifold(tag.children.front());
      return std::make_shared<ProductManifold>(tag, std::vector<ManifoldPtr>(tag.size, base));
    }
  }
  throw std::invalid_argument("unknown manifold kind");
}

}  // namespace manivar
