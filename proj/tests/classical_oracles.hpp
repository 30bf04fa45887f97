// Textbook finite-difference functionals for vector-valued images, used as
// independent oracles on Euclidean tags.
#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "manivar/image.hpp"

namespace manivar::testing {

using VImage = std::vector<Vec>;

inline VImage coords_of(const ManifoldImage& u) {
  VImage out;
  for (const auto& p : u.pixels()) out.push_back(p.coords);
  return out;
}

inline double classical_tv(const VImage& u, int n1, int n2, int p) {
  double s = 0.0;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      double dx = i + 1 < n1 ? (u[(i + 1) * n2 + j] - u[i * n2 + j]).norm() : 0.0;
      double dy = j + 1 < n2 ? (u[i * n2 + j + 1] - u[i * n2 + j]).norm() : 0.0;
      s += p == 1 ? dx + dy : std::hypot(dx, dy);
    }
  return s;
}

inline double classical_tv2(const VImage& u, int n1, int n2, int p) {
  auto U = [&](int i, int j) { return u[i * n2 + j]; };
  double s = 0.0;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      double h[4] = {0, 0, 0, 0};
      if (i > 0 && i + 1 < n1) h[0] = 0.5 * (U(i + 1, j) - 2 * U(i, j) + U(i - 1, j)).norm();
      if (j > 0 && j + 1 < n2) h[1] = 0.5 * (U(i, j + 1) - 2 * U(i, j) + U(i, j - 1)).norm();
      if (j > 0 && j + 1 < n2 && i + 1 < n1)
        h[2] = 0.5 * (U(i, j) - U(i + 1, j) - U(i, j - 1) + U(i + 1, j - 1)).norm();
      if (i > 0 && i + 1 < n1 && j + 1 < n2)
        h[3] = 0.5 * (U(i, j) - U(i, j + 1) - U(i - 1, j) + U(i - 1, j + 1)).norm();
      s += p == 1 ? h[0] + h[1] + h[2] + h[3]
                  : std::sqrt(h[0] * h[0] + h[1] * h[1] + h[2] * h[2] + h[3] * h[3]);
    }
  return s;
}

// Flat TGV terms: forward differences of u and plain backward differences of xi.
inline std::pair<double, double> classical_tgv_terms(const VImage& u, const VImage& x, const VImage& y,
                                              int n1, int n2, int p) {
  double r1 = 0.0, r2 = 0.0;
  auto combine = [p](const std::vector<double>& n) {
    double s = 0.0;
    for (double v : n) s += p == 1 ? v : v * v;
    return p == 1 ? s : std::sqrt(s);
  };
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      int k = i * n2 + j;
      Vec gx = i + 1 < n1 ? Vec(u[k + n2] - u[k]) : Vec::Zero(u[k].size());
      Vec gy = j + 1 < n2 ? Vec(u[k + 1] - u[k]) : Vec::Zero(u[k].size());
      r1 += combine({(gx - x[k]).norm(), (gy - y[k]).norm()});
      std::vector<double> n;
      if (i > 0 && i + 1 < n1) {
        n.push_back((x[k] - x[k - n2]).norm());
        n.push_back((y[k] - y[k - n2]).norm());
      }
      if (j > 0 && j + 1 < n2) {
        n.push_back((x[k] - x[k - 1]).norm());
        n.push_back((y[k] - y[k - 1]).norm());
      }
      r2 += combine(n);
    }
  return {r1, r2};
}

}  // namespace manivar::testing
