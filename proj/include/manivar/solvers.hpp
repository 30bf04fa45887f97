#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "manivar/image.hpp"
#include "manivar/models.hpp"
#include "manivar/prox.hpp"

namespace manivar {

/// Step sizes tau_r, r = 0, 1, ...
struct StepSchedule {
  enum class Kind { Harmonic, Constant, Custom };
  Kind kind = Kind::Harmonic;
  double tau0 = 4.0;
  /// Custom steps; past the end the last value repeats.
  std::vector<double> values;

  static StepSchedule harmonic(double tau0) { return {Kind::Harmonic, tau0, {}}; }
  static StepSchedule constant(double tau) { return {Kind::Constant, tau, {}}; }
  static StepSchedule custom(std::vector<double> v) { return {Kind::Custom, 0.0, std::move(v)}; }

  double operator()(int r) const;
  /// True only for harmonic schedules (square summable, not summable).
  bool in_l2_minus_l1() const { return kind == Kind::Harmonic; }
};

enum class Guarantee { Required, BestEffort };

/// Checks a schedule for the subgradient method and CPPA. In Required mode a
/// schedule outside l2 \ l1 throws std::invalid_argument; in BestEffort mode it
/// is accepted and a warning is appended.
void validate_step_schedule(const StepSchedule& s, Guarantee mode,
                            std::vector<std::string>& warnings);
/// Checks the DR relaxation: sum tau_r (1 - tau_r) must diverge. Constant
/// tau in (0, 1) passes; custom lists are accepted with a warning.
void validate_relaxation(const StepSchedule& s, std::vector<std::string>& warnings);

enum class Solver { Subgradient, HalfQuadratic, CPPA, DR, ParallelDR, GradientDescent };

Solver parse_solver(const std::string& name);
std::string to_string(Solver s);

struct TraceEntry {
  int iteration = 0;
  double objective = 0.0;
  /// sqrt(sum_i dist^2) between consecutive iterates.
  double change = 0.0;
};

struct SolverRun {
  Solver solver = Solver::CPPA;
  ManifoldImage result;
  std::vector<TraceEntry> trace;
  bool converged = false;
  int iterations = 0;
  std::vector<std::string> warnings;
  /// Which convergence theory covers the run, if any.
  std::string regime;
};

struct SolverOptions {
  Solver solver = Solver::CPPA;
  StepSchedule schedule = StepSchedule::harmonic(4.0);
  Guarantee guarantee = Guarantee::BestEffort;
  /// DR prox scale.
  double eta = 0.35;
  /// DR relaxation tau_r.
  StepSchedule relaxation = StepSchedule::constant(0.9);
  int max_iterations = 400;
  /// Relative objective change, required over `patience` consecutive sweeps.
  double tolerance = 1e-8;
  int patience = 5;
  /// Inexact CPPA: numerical proxes stop at eps0 / (r + 1)^2 / K. 0 keeps the
  /// default prox tolerance.
  double inexact_eps0 = 0.0;
  /// Half-quadratic inner gradient steps per outer iteration.
  int inner_steps = 20;
  /// Iterations of the inner parallel DR computing the prox of eta * alpha * R for DR.
  int dr_inner_sweeps = 100;
  /// Starting image; defaults to f.
  std::optional<ManifoldImage> initial;
};

// ---------------------------------------------------------------- building blocks

struct KarcherResult {
  Point mean;
  int iterations = 0;
  /// Set when uniqueness is not guaranteed (sphere data outside a ball of radius pi/2).
  std::optional<std::string> warning;
};

/// Weighted Karcher mean by gradient descent to gradient norm 1e-10. Throws
/// ConvergenceError after 1000 iterations.
KarcherResult karcher_mean(const Manifold& m, const std::vector<Point>& points,
                           const std::vector<double>& weights = {});

/// A proximal map on a tuple of points: x -> prox_{eta phi}(x).
using ProxOperator = std::function<std::vector<Point>(const std::vector<Point>&, double eta)>;

/// exp_{p}(-log_{p} x) componentwise with p = prox_{eta phi}(x).
std::vector<Point> reflect_prox(const Manifold& m, const ProxOperator& prox, double eta,
                                const std::vector<Point>& x);

struct SplittingRun {
  std::vector<Point> result;
  std::vector<TraceEntry> trace;
  bool converged = false;
  int iterations = 0;
  std::vector<std::string> warnings;
};

using ObjectiveFn = std::function<double(const std::vector<Point>&)>;

/// t <- gamma(t, R_{eta phi} R_{eta psi} t; tau_r), output prox_{eta psi}(t).
/// Exits once the iterate change drops below 1e-12.
SplittingRun douglas_rachford(const Manifold& m, const ProxOperator& phi, const ProxOperator& psi,
                              double eta, const StepSchedule& relaxation,
                              const std::vector<Point>& t0, int max_iterations,
                              const ObjectiveFn& objective = {});

/// DR on the product of K copies: reflection at the diagonal (pointwise
/// Karcher mean, then geodesic reflection) followed by the separable
/// reflection at Phi = sum_k phi_k(x_k). Output is the Karcher mean of the
/// copies. Convergence is only covered by theory for constant-curvature tags.
SplittingRun parallel_douglas_rachford(const Manifold& m, const std::vector<ProxOperator>& terms,
                                       double eta, const StepSchedule& relaxation,
                                       const std::vector<Point>& u0, int max_iterations,
                                       const ObjectiveFn& objective = {});

/// prox_{lambda * term} applied to the term's footprint pixels of u (in place).
/// Returns false when a numerical prox ran out of iterations.
bool apply_term_prox(const Manifold& m, std::vector<Point>& u, const RegularizerTerm& term,
                     double lambda, const NumericalProxOptions& options = {});

/// Groups terms into batches with pairwise disjoint footprints: families in
/// the order X, Y, Group, SecondOrder, greedy colouring within each family.
std::vector<std::vector<std::size_t>> term_batches(const std::vector<RegularizerTerm>& terms);

// ---------------------------------------------------------------- solvers

/// Riemannian subgradient method with normalized steps
/// x <- exp_x(-tau_r s / |s|); returns the best iterate seen.
SolverRun subgradient_descent(const ManifoldImage& f, const ModelConfig& config,
                              const SolverOptions& options);

/// Alternating minimization of the half-quadratic form of TV_phi.
/// Throws std::logic_error if J_phi increases by more than 1e-12.
SolverRun half_quadratic(const ManifoldImage& f, const ModelConfig& config,
                         const SolverOptions& options);

/// Cyclic proximal point algorithm with lambda = tau_r * term weight.
SolverRun cppa(const ManifoldImage& f, const ModelConfig& config, const SolverOptions& options);

/// Two-term DR with phi = data term, psi = alpha R; the prox of psi is
/// computed by an inner parallel DR over the data term and the term batches.
SolverRun douglas_rachford(const ManifoldImage& f, const ModelConfig& config,
                           const SolverOptions& options);

/// Parallel DR with phi_1 = data term and phi_k = the CPPA batches of R.
SolverRun parallel_douglas_rachford(const ManifoldImage& f, const ModelConfig& config,
                                    const SolverOptions& options);

/// Joint gradient descent over (u, xi) for the TGV model, on the smoothed
/// objective with continuation.
SolverRun tgv_gradient_descent(const ManifoldImage& f, const ModelConfig& config,
                               const SolverOptions& options);

/// Dispatches on options.solver; throws std::invalid_argument for solver /
/// model combinations that are not supported.
SolverRun denoise(const ManifoldImage& f, const ModelConfig& config, const SolverOptions& options);

/// Moves the neighbors of `index` that sit on the cut locus (or the pixel
/// itself) by 1e-9 toward `previous`. Returns a log line.
std::string nudge_cut_locus(ManifoldImage& u, std::size_t index, const ManifoldImage* previous);

}  // namespace manivar
