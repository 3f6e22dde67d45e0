#pragma once

#include <complex>

namespace nlslab {

using cplx = std::complex<double>;

/// Unvalidated user input. Re(p) is not an input: it is fixed by m.
struct RawParams {
  double m = 0.5;
  cplx a{1.0, 0.0};
  double p_imag = 0.0;
  int dim = 1;
  double radius = 1.0;
};

/// Validated model parameters of the forced sublinear Schrödinger equation
///   i u_t + Δu = a |u|^{m-1} u + f,   0 < m < 1,
/// together with the complex self-similarity exponent p, Re(p) = 2/(1-m).
/// Instances only come out of validate_params and are immutable.
class ModelParams {
 public:
  double m() const { return m_; }
  cplx a() const { return a_; }
  cplx p() const { return p_; }
  int dim() const { return dim_; }
  double radius() const { return radius_; }

 private:
  friend ModelParams validate_params(const RawParams& raw);
  ModelParams() = default;

  double m_ = 0.5;
  cplx a_{1.0, 0.0};
  cplx p_{4.0, 0.0};
  int dim_ = 1;
  double radius_ = 1.0;
};

/// Throws LabError(invalid_exponent | inadmissible_coefficient | invalid_domain).
ModelParams validate_params(const RawParams& raw);

/// True when Im(a) <= 0 and (Re(a) > 0 or Im(a) < 0).
bool coefficient_admissible(cplx a);

/// Coefficients of the gauge-transformed stationary equation
///   -Δg + a|g|^{m-1}g + b g + c|x|^2 g = G.
/// The canonical gauge has b = -i(N+2p)/4, c = -1/16 and phase exp(-i|x|^2/8),
/// i.e. gauge = 1/2 in exp(-i gauge |x|^2 / 4). Fields may be overridden for
/// the general (b, c) analysis; c is complex with Im(c) <= 0 allowed.
struct DerivedCoefficients {
  cplx b;
  cplx c;
  double gauge = 0.5;
};

DerivedCoefficients derive_coefficients(const ModelParams& params);

/// Closed form -(N(1-m)+4)/(4(1-m)) of Im(b) for the canonical gauge.
double canonical_imag_b(const ModelParams& params);

/// Exponents of the localization estimates. The τ-dependent maps are
/// functions on the half-open range ((m+1)/2, 1].
class ExponentSet {
 public:
  ExponentSet(double m, int dim);

  double m() const { return m_; }
  int dim() const { return dim_; }
  double k() const { return k_; }
  double nu() const { return nu_; }
  /// Growth exponent of the forcing-decay criterion, (2(1+m)+N(1-m))/(1-m).
  double p_growth() const { return p_growth_; }

  double tau_min() const { return 0.5 * (m_ + 1.0); }

  // Throw LabError(domain_error) outside ((m+1)/2, 1].
  double gamma(double tau) const;
  double mu(double tau) const;
  double eta(double tau) const;

 private:
  void check_tau(double tau) const;

  double m_;
  int dim_;
  double k_;
  double nu_;
  double p_growth_;
};

ExponentSet exponent_set(const ModelParams& params);

/// Largest R0 with R0^2 <= 4 Im(p) + 2 sqrt(4 Im(p)^2 + 2); below it the
/// compactly supported profile is unique (Re(a) > 0, Im(a) = 0).
double uniqueness_radius(double p_imag);
double uniqueness_radius(const ModelParams& params);

}  // namespace nlslab
