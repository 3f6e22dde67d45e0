#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlslab/grid.hpp"
#include "nlslab/model.hpp"

namespace nlslab {

/// Cumulative ball functionals of a solution g with data G on B(x0, ρ_j).
struct EnergyProfile {
  double x0 = 0.0;
  double spacing = 0.0;  // grid spacing of the source fields
  std::vector<double> radii;
  std::vector<double> energy;  // ‖∇g‖²
  std::vector<double> bmass;   // ‖g‖^{m+1}_{m+1}
  std::vector<double> l2mass;  // ‖g‖²
  std::vector<double> wmass;   // ‖|x| g‖²
  std::vector<double> flux;    // |∫_S g conj(∂_r g)|
  std::vector<double> jterm;   // ∫ |G g|
  std::vector<double> gball;   // ‖G‖²

  std::size_t size() const { return radii.size(); }
};

/// Radii are equispaced on [0, ρ_end] with ρ_end the largest distance from
/// x0 to the domain boundary. Throws LabError(center_unsupported) for
/// off-center radial requests.
EnergyProfile energy_profile(const ComplexField& g, const ComplexField& G, double m, double x0, std::size_t n_radii);
/// Same functionals on caller-chosen radii.
EnergyProfile energy_profile_at(const ComplexField& g, const ComplexField& G, double m, double x0,
                                std::span<const double> radii);

struct LemmaConstants {
  double A;
  double A1;
  double A2;
  double L;
  double M;
};

/// Constants of the local energy inequality
///   E + L‖g‖^{m+1}_{m+1} + L‖g‖² <= M (I + J).
/// Throws LabError(inadmissible_coefficient).
LemmaConstants lemma_constants(cplx a, cplx b, cplx c, double R);

struct InequalityCheck {
  std::vector<double> margin;  // M (I + J) - [E + L b + L l2]
  double tol_disc = 0.0;       // 10 h² · (dominant scale)
  double min_margin = 0.0;
  bool holds = true;
};

InequalityCheck check_energy_inequality(const EnergyProfile& profile, double L, double M);

struct IdentityResidual {
  double rho;
  double real_defect;  // absolute
  double imag_defect;
  double scale;        // sum of |terms| of both identities
  double real_relative() const { return scale > 0.0 ? real_defect / scale : real_defect; }
  double imag_relative() const { return scale > 0.0 ? imag_defect / scale : imag_defect; }
};

/// Real and imaginary ball identities obtained by pairing the stationary
/// equation with conj(g) over B(x0, ρ):
///   ‖∇g‖² + Re(a) b + Re(b) l2 + Re(c) w = Re ∫_S conj(g) ∂_n g + Re ∫ G conj(g)
///   Im(a) b + Im(b) l2 + Im(c) w         = Im ∫_S conj(g) ∂_n g + Im ∫ G conj(g)
std::vector<IdentityResidual> check_identities(const ComplexField& g, const ComplexField& G, cplx a, cplx b, cplx c,
                                               double m, std::span<const double> rho_list, double x0 = 0.0);

struct RhoMaxResult {
  double rho_max;
  double tau_star;
  double bracket;  // the quantity whose positive part is taken
};

/// ρ_max^ν = (ρ0^ν − C M² max{1, L^-2} max{ρ0^{ν-1}, 1} min_τ Φ(τ))_+ with
/// Φ(τ) = E^γ(τ) max{b^μ(τ), b^η(τ)} / (2τ − (1+m)), minimized on a 512-point
/// τ-grid of ((m+1)/2, 1] that includes τ = 1. If b = 0 (or E = 0) the
/// minimum is 0. Throws LabError(domain_error) for ρ0 <= 0.
RhoMaxResult rho_max(double energy0, double bmass0, double rho0, double L, double M, double c_cal,
                     const ExponentSet& exps);
RhoMaxResult rho_max(const EnergyProfile& profile, double rho0, double L, double M, double c_cal,
                     const ExponentSet& exps);

struct ForcingDecayMargin {
  double margin;               // min over sampled ρ in (ρ0, ρ1) of ε⋆ (ρ-ρ0)^p − ‖G‖²_{B(x0,ρ)}
  bool vanishes_inside = true; // ‖G‖²_{B(x0,ρ0)} == 0
};

/// Throws LabError(domain_error) unless 0 < ρ0 < ρ1 and ε⋆ > 0.
ForcingDecayMargin thm_g_margin(const EnergyProfile& profile, double rho0, double rho1, double eps_star,
                                const ExponentSet& exps);

/// Largest |x − x0| (interval) or r (radial) with |f| > threshold_rel·max|f|.
double support_radius(const ComplexField& field, double threshold_rel = 1e-6, double x0 = 0.0);

struct ContainmentResult {
  bool contained = true;
  double worst_excess = 0.0;  // max over supp U of dist(x, supp F) − ε (<= 0 when contained)
};

/// Checks numerical supp U ⊆ K(ε) = {x : dist(x, supp F) <= ε}.
ContainmentResult k_eps_containment(const ComplexField& U, const ComplexField& F, double eps,
                                    double threshold_rel = 1e-6);

struct LocalizationReport {
  LemmaConstants constants{};
  double rho0 = 0.0;
  double rho_max = 0.0;
  double tau_star = 1.0;
  double support_radius = 0.0;
  bool k_eps_contained = true;
  double k_eps_worst_excess = 0.0;
  std::vector<IdentityResidual> identity_residuals;
  double thm_g_margin = 0.0;
  bool thm_g_vanishes_inside = true;
  double inequality_min_margin = 0.0;
  double inequality_tol = 0.0;
  bool inequality_holds = true;
};

nlohmann::json to_json(const EnergyProfile& profile);
nlohmann::json to_json(const LocalizationReport& report);
/// Columns: rho,E,bmass,l2mass,wmass,I,Jterm,Gball.
void write_profile_csv(const std::string& path, const EnergyProfile& profile);

}  // namespace nlslab
