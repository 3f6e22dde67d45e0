#include "nlslab/profile_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <json.hpp>

#include "nlslab/error.hpp"

namespace nlslab {

namespace {

// Lagged coefficient where |z| and eps both vanish; large enough to pin the
// node to zero, small enough to keep the tridiagonal solve finite.
constexpr double weight_cap = 1e150;

double lagged_weight(cplx z, double m, double eps) {
  const double r2 = std::norm(z) + eps * eps;
  if (r2 <= 0.0) return weight_cap;
  return std::min(std::pow(r2, 0.5 * (m - 1.0)), weight_cap);
}

bool is_zero(const ComplexField& f) {
  for (const auto& v : f.values()) {
    if (v != cplx{}) return false;
  }
  return true;
}

double interior_l2(const ComplexField& f) {
  const auto& grid = f.grid();
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!grid.is_boundary(i)) sum += grid.weight(i) * std::norm(f[i]);
  }
  return std::sqrt(sum);
}

double stage_residual(const LinearOperator& base, const ProfileProblem& problem, const ComplexField& g,
                      const ComplexField& target, double eps) {
  ComplexField r = base.apply(g);
  const double m = problem.params.m();
  const cplx a = problem.params.a();
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (problem.grid().is_boundary(i)) continue;
    r[i] += a * sublinear_term(g[i], m, eps) - target[i];
  }
  return interior_l2(r);
}

}  // namespace

cplx sublinear_term(cplx z, double m, double reg_eps) {
  const double r2 = std::norm(z) + reg_eps * reg_eps;
  if (r2 <= 0.0) return 0.0;
  return std::pow(r2, 0.5 * (m - 1.0)) * z;
}

ProfileProblem make_problem(const ModelParams& params, ComplexField forcing, SolverOptions options) {
  for (const auto& v : forcing.values()) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw LabError(ErrorKind::invalid_domain, "forcing contains non-finite values");
    }
  }
  if (!(options.tol > 0.0)) throw LabError(ErrorKind::invalid_domain, "solver tolerance must be positive");
  if (!(options.theta > 0.0 && options.theta <= 1.0)) {
    throw LabError(ErrorKind::invalid_domain, "damping theta must lie in (0,1]");
  }
  if (options.reg_schedule.empty() || options.reg_schedule.back() != 0.0) {
    options.reg_schedule.push_back(0.0);
  }
  return ProfileProblem{params, derive_coefficients(params), std::move(forcing), std::move(options)};
}

ComplexField apply_equation(const ProfileProblem& problem, const ComplexField& g, double reg_eps) {
  const LinearOperator base = assemble_operator(problem.grid_ptr(), problem.coeffs.b, problem.coeffs.c);
  ComplexField out = base.apply(g);
  const double m = problem.params.m();
  const cplx a = problem.params.a();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!problem.grid().is_boundary(i)) out[i] += a * sublinear_term(g[i], m, reg_eps);
  }
  return out;
}

double residual(const ProfileProblem& problem, const ComplexField& g) {
  ComplexField r = apply_equation(problem, g, 0.0);
  r -= problem.forcing;
  return interior_l2(r);
}

ProfileSolution solve_profile(const ProfileProblem& problem, const ComplexField& initial_guess) {
  const auto& opt = problem.options;
  const auto& grid = problem.grid();
  const double m = problem.params.m();
  const cplx a = problem.params.a();
  const LinearOperator base = assemble_operator(problem.grid_ptr(), problem.coeffs.b, problem.coeffs.c);

  const bool zero_data = is_zero(problem.forcing);
  std::vector<double> amplitudes;
  if (zero_data || opt.continuation_steps <= 1) {
    amplitudes.push_back(1.0);
  } else {
    for (int j = 0; j < opt.continuation_steps; ++j) {
      amplitudes.push_back(0.1 * std::pow(10.0, static_cast<double>(j) / (opt.continuation_steps - 1)));
    }
    amplitudes.back() = 1.0;
  }
  std::vector<double> schedule = zero_data ? std::vector<double>{0.0} : opt.reg_schedule;

  ProfileSolution sol;
  ComplexField g = initial_guess;
  g.apply_dirichlet();
  sol.g = g;
  sol.residual_norm = std::numeric_limits<double>::infinity();

  double theta = opt.theta;
  int iter = 0;
  const int non_final_cap = std::max(1, std::min(200, opt.max_iter / 4));
  std::vector<cplx> shift(grid.size());

  for (std::size_t ai = 0; ai < amplitudes.size(); ++ai) {
    ComplexField target = amplitudes[ai] * problem.forcing;
    for (std::size_t si = 0; si < schedule.size(); ++si) {
      const double eps = schedule[si];
      const bool final_stage = ai + 1 == amplitudes.size() && si + 1 == schedule.size();
      double prev = std::numeric_limits<double>::infinity();
      int decreases = 0;
      theta = opt.theta;
      int stage_iter = 0;
      while (iter < opt.max_iter && (final_stage || stage_iter < non_final_cap)) {
        for (std::size_t i = 0; i < g.size(); ++i) shift[i] = a * lagged_weight(g[i], m, eps);
        const ComplexField solved = base.shifted(shift).solve(target);
        ComplexField next = (1.0 - theta) * g;
        next += theta * solved;
        ++iter;
        ++stage_iter;

        double update = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) update += grid.weight(i) * std::norm(next[i] - g[i]);
        update = std::sqrt(update);
        g = std::move(next);

        const double stage_res = stage_residual(base, problem, g, target, eps);
        const double res = final_stage ? stage_res : stage_residual(base, problem, g, target, 0.0);
        sol.history.push_back({iter, res, theta, eps});

        if (ai + 1 == amplitudes.size() && eps == 0.0 && res < sol.residual_norm) {
          sol.residual_norm = res;
          sol.g = g;
        }
        if (final_stage && res <= opt.tol) {
          sol.converged = true;
          break;
        }
        if (!final_stage && update <= opt.stage_tol * std::max(l2_norm(g), 1e-300)) break;

        if (stage_res > prev) {
          theta = std::max(0.5 * theta, 1.0 / 1024.0);
          decreases = 0;
        } else if (++decreases >= 5) {
          theta = opt.theta;
          decreases = 0;
        }
        prev = stage_res;
      }
      if (sol.converged || iter >= opt.max_iter) break;
    }
    if (sol.converged || iter >= opt.max_iter) break;
  }

  sol.iterations = iter;
  if (!std::isfinite(sol.residual_norm)) {
    sol.g = g;
    sol.residual_norm = residual(problem, g);
  }
  return sol;
}

ProfileSolution solve_profile(const ProfileProblem& problem) {
  return solve_profile(problem, ComplexField(problem.grid_ptr()));
}

const ProfileSolution& require_converged(const ProfileSolution& sol) {
  if (!sol.converged) {
    throw LabError(ErrorKind::non_convergence,
                   "profile iteration stopped at residual " + std::to_string(sol.residual_norm) + " after " +
                       std::to_string(sol.iterations) + " iterations");
  }
  return sol;
}

UniquenessReport uniqueness_probe(const ProfileProblem& problem, std::span<const ComplexField> guesses) {
  UniquenessReport report;
  const cplx a = problem.params.a();
  report.in_uniqueness_regime = a.real() > 0.0 && a.imag() == 0.0 &&
                                problem.grid().radius() <= uniqueness_radius(problem.params);
  // Continuation and the regularized stages would erase the guess before the
  // eps = 0 stage; each guess starts directly on the full problem.
  ProfileProblem direct = problem;
  direct.options.reg_schedule = {0.0};
  direct.options.continuation_steps = 1;
  for (const auto& guess : guesses) {
    ProfileSolution sol = solve_profile(direct, guess);
    require_converged(sol);
    report.iterations.push_back(sol.iterations);
    report.solutions.push_back(std::move(sol));
  }
  for (std::size_t i = 0; i < report.solutions.size(); ++i) {
    for (std::size_t j = i + 1; j < report.solutions.size(); ++j) {
      const double d = l2_norm(report.solutions[i].g - report.solutions[j].g);
      report.max_pairwise_distance = std::max(report.max_pairwise_distance, d);
    }
  }
  return report;
}

std::vector<ComplexField> random_guesses(const GridPtr& grid, std::size_t count, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<ComplexField> out;
  for (std::size_t k = 0; k < count; ++k) {
    ComplexField f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = scale * cplx(normal(rng), normal(rng));
    f.apply_dirichlet();
    out.push_back(std::move(f));
  }
  return out;
}

double parity_defect(const ComplexField& g, Parity parity) {
  const auto& grid = g.grid();
  if (grid.kind() != GridKind::interval) {
    throw LabError(ErrorKind::invalid_domain, "parity checks need an interval grid");
  }
  const double sign = parity == Parity::even ? -1.0 : 1.0;
  const std::size_t n = g.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += grid.weight(i) * std::norm(g[i] + sign * g[n - 1 - i]);
  return std::sqrt(sum);
}

double symmetry_check(const ProfileProblem& problem, Parity parity) {
  const ProfileSolution sol = solve_profile(problem, ComplexField(problem.grid_ptr()));
  require_converged(sol);
  return parity_defect(sol.g, parity);
}

double h1_norm(const ComplexField& g) {
  const ComplexField dg = gradient(g);
  const double l2 = l2_norm(g);
  const double d2 = l2_norm(dg);
  return std::sqrt(l2 * l2 + d2 * d2);
}

std::string history_to_json(const ProfileSolution& sol) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& rec : sol.history) {
    arr.push_back({{"iteration", rec.iteration}, {"residual", rec.residual}, {"theta", rec.theta}, {"reg_eps", rec.reg_eps}});
  }
  return arr.dump(1);
}

}  // namespace nlslab
