#pragma once

#include <iosfwd>
#include <span>

#include "nlslab/grid.hpp"
#include "nlslab/model.hpp"

namespace nlslab {

/// g(x) = U(x) exp(-i c_gauge |x|^2 / 4). The canonical gauge is c_gauge = 1/2.
ComplexField gauge_forward(const ComplexField& U, double c_gauge = 0.5);
/// U(x) = g(x) exp(+i c_gauge |x|^2 / 4).
ComplexField gauge_backward(const ComplexField& g, double c_gauge = 0.5);

/// t^z for real t > 0 via the principal logarithm.
cplx real_pow(double t, cplx z);

/// u(t, x) = t^{p/2} U(x / sqrt t), U extended by zero outside its grid.
struct SelfSimilarSolution {
  ComplexField profile;
  ModelParams params;
};

/// f(t, x) = t^{(p-2)/2} F(x / sqrt t).
struct SelfSimilarForcing {
  ComplexField profile;
  ModelParams params;
};

/// Throws LabError(nonpositive_time) for t <= 0.
cplx evaluate_solution(const SelfSimilarSolution& sol, double t, double x);
cplx evaluate_forcing(const SelfSimilarForcing& frc, double t, double x);

/// Samples u(t, .) / f(t, .) on an arbitrary grid.
ComplexField sample_solution(const SelfSimilarSolution& sol, double t, const GridPtr& grid);
ComplexField sample_forcing(const SelfSimilarForcing& frc, double t, const GridPtr& grid);

/// |λ^{-p} u(λ² t, λ x) - u(t, x)|.
double scaling_invariance_check(const SelfSimilarSolution& sol, double lambda, double t, double x);

/// t^{1/(1-m) + N/(2q)} ‖U‖_{L^q}; q = infinity gives exponent 1/(1-m).
double norm_scaling(const ComplexField& U, const ModelParams& params, double q, double t);

/// Discrete defect of the profile equation
///   -ΔU + a|U|^{m-1}U - (i p/2) U + (i/2) x·∇U + F
/// at interior nodes (centered differences for the transport term), as a
/// discrete L2 norm.
double profile_equation_residual(const ComplexField& U, const ComplexField& F, const ModelParams& params);

/// CSV rows "t,x,re,im,abs" of u(t, x) on the given grid for each time.
void write_spacetime_csv(std::ostream& os, const SelfSimilarSolution& sol, std::span<const double> times,
                         const GridPtr& grid);

}  // namespace nlslab
