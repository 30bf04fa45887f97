#pragma once

#include <Eigen/Dense>

namespace manivar::spd {

using Mat = Eigen::MatrixXd;

inline Mat to_matrix(const Eigen::VectorXd& v, int d) {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      v.data(), d, d);
}

inline Eigen::VectorXd to_vec(const Mat& m) {
  Eigen::VectorXd out(m.size());
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      out.data(), m.rows(), m.cols()) = m;
  return out;
}

inline Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

template <typename F>
Mat sym_apply(const Mat& a, F f) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  Eigen::VectorXd l = es.eigenvalues().unaryExpr(f);
  return es.eigenvectors() * l.asDiagonal() * es.eigenvectors().transpose();
}

inline Mat sym_exp(const Mat& a) {
  return sym_apply(a, [](double x) { return std::exp(x); });
}
inline Mat sym_log(const Mat& a) {
  return sym_apply(a, [](double x) { return std::log(x); });
}

/// Square root and inverse square root of an SPD matrix from one eigendecomposition.
struct Roots {
  Mat sqrt;
  Mat inv_sqrt;

  explicit Roots(const Mat& x) {
    Eigen::SelfAdjointEigenSolver<Mat> es(x);
    Eigen::VectorXd s = es.eigenvalues().cwiseSqrt();
    const Mat& u = es.eigenvectors();
    sqrt = u * s.asDiagonal() * u.transpose();
    inv_sqrt = u * s.cwiseInverse().asDiagonal() * u.transpose();
  }
};

}  // namespace manivar::spd
