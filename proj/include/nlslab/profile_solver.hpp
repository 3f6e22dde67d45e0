#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nlslab/grid.hpp"
#include "nlslab/model.hpp"

namespace nlslab {

/// (|z|^2 + eps^2)^{(m-1)/2} z, with the convention 0 at z = 0 when eps = 0.
cplx sublinear_term(cplx z, double m, double reg_eps);

struct SolverOptions {
  double theta = 1.0;  // initial (and maximal) damping factor
  double tol = 1e-8;   // absolute discrete L2 residual of the unregularized equation
  int max_iter = 5000;
  int continuation_steps = 8;  // geometric amplitude ramp from 10% to 100%
  std::vector<double> reg_schedule{1e-2, 1e-4, 1e-8, 0.0};
  /// Relative update size that ends a regularized stage.
  double stage_tol = 1e-10;
};

/// Stationary problem -Δg + a|g|^{m-1}g + b g + c|x|^2 g = G on a grid with
/// Dirichlet boundary.
struct ProfileProblem {
  ModelParams params;
  DerivedCoefficients coeffs;
  ComplexField forcing;  // G
  SolverOptions options;

  const GridPtr& grid_ptr() const { return forcing.grid_ptr(); }
  const Grid& grid() const { return forcing.grid(); }
};

ProfileProblem make_problem(const ModelParams& params, ComplexField forcing, SolverOptions options = {});

struct IterationRecord {
  int iteration;
  double residual;
  double theta;
  double reg_eps;
};

struct ProfileSolution {
  ComplexField g;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> history;
};

/// Left-hand side of the stationary equation evaluated with regularization
/// reg_eps (zero on Dirichlet nodes).
ComplexField apply_equation(const ProfileProblem& problem, const ComplexField& g, double reg_eps = 0.0);

/// Discrete L2 norm of the unregularized equation defect over interior nodes.
double residual(const ProfileProblem& problem, const ComplexField& g);

/// Damped lagged-coefficient iteration
///   g <- (1-θ) g + θ (L + a W(g))^{-1} G_s,  W(g) = (|g|^2+ε^2)^{(m-1)/2},
/// with amplitude continuation G_s = s G and the ε-schedule of the options.
/// Stops on the unregularized residual. Non-convergence is reported through
/// `converged == false` with the best iterate; a singular operator throws
/// LabError(singular_operator).
ProfileSolution solve_profile(const ProfileProblem& problem, const ComplexField& initial_guess);
ProfileSolution solve_profile(const ProfileProblem& problem);

/// Throws LabError(non_convergence) unless the solution converged.
const ProfileSolution& require_converged(const ProfileSolution& sol);

struct UniquenessReport {
  std::vector<ProfileSolution> solutions;
  std::vector<int> iterations;
  double max_pairwise_distance = 0.0;  // discrete L2
  bool all_converged = true;
  bool in_uniqueness_regime = false;
};

/// Solves from every guess, without continuation and with eps = 0 only, and
/// compares the converged profiles.
/// Throws LabError(non_convergence) if any guess fails.
UniquenessReport uniqueness_probe(const ProfileProblem& problem, std::span<const ComplexField> guesses);

/// Deterministic pseudo-random initial fields (Dirichlet-compatible).
std::vector<ComplexField> random_guesses(const GridPtr& grid, std::size_t count, double scale, std::uint64_t seed);

enum class Parity { even, odd };

/// Asymmetry ‖g(x) ∓ g(-x)‖ of the solution obtained from a guess of the
/// same parity (interval grids only).
double symmetry_check(const ProfileProblem& problem, Parity parity);
double parity_defect(const ComplexField& g, Parity parity);

/// ‖g‖_{H1} = sqrt(‖g‖² + ‖∇g‖²) with the discrete gradient.
double h1_norm(const ComplexField& g);

std::string history_to_json(const ProfileSolution& sol);

}  // namespace nlslab
