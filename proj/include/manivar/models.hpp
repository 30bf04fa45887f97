#pragma once

#include <array>
#include <string>
#include <vector>

#include "manivar/image.hpp"

namespace manivar {

enum class ModelKind { TV, TVphi, TV2only, TVTV2, TGV };

/// Smooth even penalties for TV_phi; each comes with the half-quadratic
/// weight s(t) = phi'(t) / (2t).
enum class PhiKind { Phi1, Phi2, Phi3 };

struct Phi {
  PhiKind kind = PhiKind::Phi1;
  double eps = 0.01;

  /// phi1 = sqrt(t^2 + eps^2), phi2 = Huber, phi3 = 1 - exp(-eps^2 t^2).
  double value(double t) const;
  double weight(double t) const;
};

struct ModelConfig {
  ModelKind model = ModelKind::TV;
  double alpha = 0.1;
  double beta = 0.5;
  int p = 1;
  Phi phi{};

  /// Throws std::invalid_argument on alpha <= 0, beta outside (0, 1),
  /// p outside {1, 2} or eps <= 0.
  void validate() const;
};

ModelKind parse_model(const std::string& name);
std::string to_string(ModelKind kind);

/// One elementary difference on the pixel grid:
///   First:  dist(u[a], u[b])
///   Second: d2(u[a], u[b], u[c])
///   Mixed:  d11(u[a], u[b], u[c], u[d])
struct Difference {
  enum class Kind { First, Second, Mixed };
  Kind kind = Kind::First;
  std::array<std::size_t, 4> pixels{};

  int arity() const { return kind == Kind::First ? 2 : kind == Kind::Second ? 3 : 4; }
};

/// Which family a regularizer term belongs to; solvers sweep families in this order.
enum class TermFamily { X, Y, Group, SecondOrder };

/// weight * (sum_k h_k^p)^(1/p) over the elementary differences h_k in `parts`.
struct RegularizerTerm {
  double weight = 1.0;
  int p = 1;
  TermFamily family = TermFamily::X;
  std::vector<Difference> parts;

  /// Distinct pixels touched by the term, in first-seen order.
  std::vector<std::size_t> footprint() const;
};

/// TV terms: one per edge for p = 1 (x-edges, then y-edges), one per pixel
/// with forward neighbors for p = 2.
std::vector<RegularizerTerm> tv_terms(int n1, int n2, int p, double weight = 1.0);
/// TV2 terms built from d_xx, d_yy, d_xy, d_yx; one per stencil for p = 1,
/// one per pixel for p = 2.
std::vector<RegularizerTerm> tv2_terms(int n1, int n2, int p, double weight = 1.0);
/// The regularizer of a TV, TV2only or TVTV2 configuration, scaled by alpha.
std::vector<RegularizerTerm> regularizer_terms(const ModelConfig& config, int n1, int n2);

double difference_value(const Manifold& m, const std::vector<Point>& u, const Difference& d,
                        bool* tie = nullptr);
double term_value(const Manifold& m, const std::vector<Point>& u, const RegularizerTerm& t);
/// Adds a Riemannian (sub)gradient of the term to grad, one tangent vector per
/// pixel. Zero contributions at kinks and midpoint ties.
void accumulate_term_gradient(const Manifold& m, const std::vector<Point>& u,
                              const RegularizerTerm& t, std::vector<Vec>& grad);
/// Sum of term values, summed pairwise (deterministic for any worker count).
double terms_value(const Manifold& m, const std::vector<Point>& u,
                   const std::vector<RegularizerTerm>& terms);

double data_term(const ManifoldImage& u, const ManifoldImage& f);

/// log_{u_i}(u_{i+(1,0)}) and log_{u_i}(u_{i+(0,1)}), zero at the last row /
/// column. Throws CutLocusError carrying the pixel index.
TangentField forward_differences(const ManifoldImage& u);

double tv(const ManifoldImage& u, int p);
double tv_phi(const ManifoldImage& u, const Phi& phi, int p);

/// d_xx, d_yy, d_xy, d_yx at pixel `i`, zero where the stencil leaves the grid.
/// The mixed differences pair the diagonals of the 2 x 2 block, so that they
/// reduce to the classical mixed difference on flat spaces.
std::array<double, 4> second_differences_at(const ManifoldImage& u, std::size_t i);
double tv2(const ManifoldImage& u, int p);
double tv_tv2(const ManifoldImage& u, double beta, int p);

struct TgvTerms {
  double r1 = 0.0;
  double r2 = 0.0;
};

/// R1(u, xi) and R2(xi) with pole-ladder backward differences.
TgvTerms tgv_terms(const TangentField& xi, int p);

/// Gradients of beta R1 + (1 - beta) R2; u-gradients treat xi as carried
/// along by parallel transport.
struct TgvGradient {
  std::vector<Vec> u;
  std::vector<Vec> x;
  std::vector<Vec> y;
};

/// beta * R1 + (1 - beta) * R2 with every norm |v| replaced by
/// sqrt(|v|^2 + eps^2) (per norm for p = 1, per pixel group for p = 2).
/// eps = 0 gives the exact value and a subgradient. Gradients are written when
/// the pointers are non-null.
double tgv_smoothed(const TangentField& xi, double beta, int p, double eps,
                    std::vector<Vec>* grad_u, TgvGradient* grad_xi);

struct TgvOptions {
  int max_iterations = 300;
  /// Smoothing levels for continuation, coarse to fine.
  std::vector<double> smoothing{1e-1, 1e-2, 1e-3, 1e-4, 1e-6};
  double gradient_tolerance = 1e-9;
};

struct TgvResult {
  double value = 0.0;
  TangentField xi;
  bool converged = true;
};

/// inf over xi of beta R1 + (1 - beta) R2, approximated by gradient descent
/// over the tangent fields. The returned value is the smallest exact value
/// seen, so it never exceeds the xi = 0 value beta * TV(u).
TgvResult tgv(const ManifoldImage& u, double beta, int p, const TgvOptions& options = {});

/// data_term + alpha * regularizer. TGV runs the inner minimization over xi.
double objective(const ManifoldImage& u, const ManifoldImage& f, const ModelConfig& config);

}  // namespace manivar
