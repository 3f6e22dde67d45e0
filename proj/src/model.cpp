#include "nlslab/model.hpp"

#include <cmath>
#include <sstream>

#include "nlslab/error.hpp"

namespace nlslab {

bool coefficient_admissible(cplx a) {
  if (a.imag() > 0.0) return false;
  if (a.real() <= 0.0 && !(a.imag() < 0.0)) return false;
  return true;
}

ModelParams validate_params(const RawParams& raw) {
  if (!(raw.m > 0.0 && raw.m < 1.0)) {
    std::ostringstream os;
    os << "m must lie in (0,1), got " << raw.m;
    throw LabError(ErrorKind::invalid_exponent, os.str());
  }
  if (!std::isfinite(raw.a.real()) || !std::isfinite(raw.a.imag()) ||
      !coefficient_admissible(raw.a)) {
    std::ostringstream os;
    os << "a = " << raw.a << " violates Im(a) <= 0 (with Im(a) < 0 when Re(a) <= 0)";
    throw LabError(ErrorKind::inadmissible_coefficient, os.str());
  }
  if (raw.dim < 1) throw LabError(ErrorKind::invalid_domain, "dimension must be >= 1");
  if (!(raw.radius > 0.0) || !std::isfinite(raw.radius)) {
    throw LabError(ErrorKind::invalid_domain, "radius must be positive");
  }
  if (!std::isfinite(raw.p_imag)) {
    throw LabError(ErrorKind::invalid_exponent, "Im(p) must be finite");
  }
  ModelParams out;
  out.m_ = raw.m;
  out.a_ = raw.a;
  out.p_ = cplx(2.0 / (1.0 - raw.m), raw.p_imag);
  out.dim_ = raw.dim;
  out.radius_ = raw.radius;
  return out;
}

DerivedCoefficients derive_coefficients(const ModelParams& params) {
  const cplx i(0.0, 1.0);
  DerivedCoefficients out;
  out.b = -i * (static_cast<double>(params.dim()) + 2.0 * params.p()) / 4.0;
  out.c = cplx(-1.0 / 16.0, 0.0);
  out.gauge = 0.5;
  return out;
}

double canonical_imag_b(const ModelParams& params) {
  const double m = params.m();
  const double n = params.dim();
  return -(n * (1.0 - m) + 4.0) / (4.0 * (1.0 - m));
}

ExponentSet::ExponentSet(double m, int dim) : m_(m), dim_(dim) {
  if (!(m > 0.0 && m < 1.0)) throw LabError(ErrorKind::invalid_exponent, "m outside (0,1)");
  if (dim < 1) throw LabError(ErrorKind::invalid_domain, "dimension must be >= 1");
  k_ = 2.0 * (1.0 + m) + dim * (1.0 - m);
  nu_ = k_ / (m + 1.0);
  p_growth_ = k_ / (1.0 - m);
}

void ExponentSet::check_tau(double tau) const {
  if (!(tau > tau_min() && tau <= 1.0)) {
    std::ostringstream os;
    os << "tau = " << tau << " outside ((m+1)/2, 1] = (" << tau_min() << ", 1]";
    throw LabError(ErrorKind::domain_error, os.str());
  }
}

double ExponentSet::gamma(double tau) const {
  check_tau(tau);
  return (2.0 * tau - (1.0 + m_)) / k_;
}

double ExponentSet::mu(double tau) const {
  check_tau(tau);
  return 2.0 * (1.0 - tau) / k_;
}

double ExponentSet::eta(double tau) const {
  return (1.0 - m_) / (1.0 + m_) - gamma(tau);
}

ExponentSet exponent_set(const ModelParams& params) {
  return ExponentSet(params.m(), params.dim());
}

double uniqueness_radius(double p_imag) {
  const double root = 2.0 * std::sqrt(4.0 * p_imag * p_imag + 2.0);
  // Rationalized branch avoids cancellation for large negative Im(p).
  const double sq = p_imag >= 0.0 ? 4.0 * p_imag + root : 8.0 / (root - 4.0 * p_imag);
  return std::sqrt(sq);
}

double uniqueness_radius(const ModelParams& params) { return uniqueness_radius(params.p().imag()); }

}  // namespace nlslab
