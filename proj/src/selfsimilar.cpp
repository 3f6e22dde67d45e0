#include "nlslab/selfsimilar.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "nlslab/error.hpp"
#include "nlslab/profile_solver.hpp"

namespace nlslab {

namespace {

ComplexField apply_phase(const ComplexField& f, double coeff) {
  ComplexField out(f.grid_ptr());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = f.grid().abs_coord(i);
    out[i] = f[i] * std::polar(1.0, coeff * r * r);
  }
  return out;
}

void check_time(double t) {
  if (!(t > 0.0)) throw LabError(ErrorKind::nonpositive_time, "time must be positive, got " + std::to_string(t));
}

}  // namespace

ComplexField gauge_forward(const ComplexField& U, double c_gauge) { return apply_phase(U, -0.25 * c_gauge); }

ComplexField gauge_backward(const ComplexField& g, double c_gauge) { return apply_phase(g, 0.25 * c_gauge); }

cplx real_pow(double t, cplx z) { return std::exp(z * std::log(t)); }

cplx evaluate_solution(const SelfSimilarSolution& sol, double t, double x) {
  check_time(t);
  const double st = std::sqrt(t);
  return real_pow(t, 0.5 * sol.params.p()) * interpolate(sol.profile, x / st);
}

cplx evaluate_forcing(const SelfSimilarForcing& frc, double t, double x) {
  check_time(t);
  const double st = std::sqrt(t);
  return real_pow(t, 0.5 * (frc.params.p() - 2.0)) * interpolate(frc.profile, x / st);
}

ComplexField sample_solution(const SelfSimilarSolution& sol, double t, const GridPtr& grid) {
  ComplexField out(grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = evaluate_solution(sol, t, grid->node(i));
  out.apply_dirichlet();
  return out;
}

ComplexField sample_forcing(const SelfSimilarForcing& frc, double t, const GridPtr& grid) {
  ComplexField out(grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = evaluate_forcing(frc, t, grid->node(i));
  return out;
}

double scaling_invariance_check(const SelfSimilarSolution& sol, double lambda, double t, double x) {
  if (!(lambda > 0.0)) throw LabError(ErrorKind::domain_error, "lambda must be positive");
  const cplx scaled = real_pow(lambda, -sol.params.p()) * evaluate_solution(sol, lambda * lambda * t, lambda * x);
  return std::abs(scaled - evaluate_solution(sol, t, x));
}

double norm_scaling(const ComplexField& U, const ModelParams& params, double q, double t) {
  check_time(t);
  const double base = 1.0 / (1.0 - params.m());
  const double exponent = std::isinf(q) ? base : base + params.dim() / (2.0 * q);
  return std::pow(t, exponent) * lq_norm(U, q);
}

double profile_equation_residual(const ComplexField& U, const ComplexField& F, const ModelParams& params) {
  const auto& grid = U.grid();
  const cplx i(0.0, 1.0);
  const ComplexField lap = neg_laplacian(U);
  const ComplexField dU = gradient(U);
  double sum = 0.0;
  for (std::size_t k = 0; k < U.size(); ++k) {
    if (grid.is_boundary(k)) continue;
    const double x = grid.node(k);  // radial: x·∇U = r ∂_r U
    const cplx r = lap[k] + params.a() * sublinear_term(U[k], params.m(), 0.0) - 0.5 * i * params.p() * U[k] +
                   0.5 * i * x * dU[k] + F[k];
    sum += grid.weight(k) * std::norm(r);
  }
  return std::sqrt(sum);
}

void write_spacetime_csv(std::ostream& os, const SelfSimilarSolution& sol, std::span<const double> times,
                         const GridPtr& grid) {
  os << "t,x,re,im,abs\n" << std::setprecision(17);
  for (double t : times) {
    for (std::size_t i = 0; i < grid->size(); ++i) {
      const cplx u = evaluate_solution(sol, t, grid->node(i));
      os << t << ',' << grid->node(i) << ',' << u.real() << ',' << u.imag() << ',' << std::abs(u) << '\n';
    }
  }
}

}  // namespace nlslab
