#include "nlslab/localization.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "nlslab/error.hpp"

namespace nlslab {

namespace {

double end_radius(const Grid& grid, double x0) {
  return grid.kind() == GridKind::interval ? grid.radius() + std::abs(x0) : grid.radius();
}

// Ball quadrature of per-node real values.
double ball_sum(const std::vector<double>& w, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * v[i];
  return s;
}

}  // namespace

EnergyProfile energy_profile_at(const ComplexField& g, const ComplexField& G, double m, double x0,
                                std::span<const double> radii) {
  const auto& grid = g.grid();
  if (grid.kind() == GridKind::radial && x0 != 0.0) {
    throw LabError(ErrorKind::center_unsupported, "radial grids only support x0 = 0");
  }
  const std::size_t n = grid.size();
  const ComplexField dg = gradient(g);
  std::vector<double> e(n), bm(n), l2(n), wm(n), jt(n), gb(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = grid.abs_coord(i);
    e[i] = std::norm(dg[i]);
    bm[i] = std::pow(std::abs(g[i]), m + 1.0);
    l2[i] = std::norm(g[i]);
    wm[i] = r * r * l2[i];
    jt[i] = std::abs(G[i] * g[i]);
    gb[i] = std::norm(G[i]);
  }

  EnergyProfile p;
  p.x0 = x0;
  p.spacing = grid.spacing();
  for (double rho : radii) {
    const auto w = ball_weights(grid, rho, x0);
    p.radii.push_back(rho);
    p.energy.push_back(ball_sum(w, e));
    p.bmass.push_back(ball_sum(w, bm));
    p.l2mass.push_back(ball_sum(w, l2));
    p.wmass.push_back(ball_sum(w, wm));
    p.flux.push_back(std::abs(shell_flux_extended(g, rho, x0)));
    p.jterm.push_back(ball_sum(w, jt));
    p.gball.push_back(ball_sum(w, gb));
  }
  return p;
}

EnergyProfile energy_profile(const ComplexField& g, const ComplexField& G, double m, double x0, std::size_t n_radii) {
  const double end = end_radius(g.grid(), x0);
  std::vector<double> radii(std::max<std::size_t>(n_radii, 2));
  for (std::size_t j = 0; j < radii.size(); ++j) {
    radii[j] = end * static_cast<double>(j) / static_cast<double>(radii.size() - 1);
  }
  return energy_profile_at(g, G, m, x0, radii);
}

LemmaConstants lemma_constants(cplx a, cplx b, cplx c, double R) {
  if (!(b.imag() < 0.0)) throw LabError(ErrorKind::inadmissible_coefficient, "Im(b) must be negative");
  if (c.imag() > 0.0) throw LabError(ErrorKind::inadmissible_coefficient, "Im(c) must be non-positive");
  if (!coefficient_admissible(a)) {
    throw LabError(ErrorKind::inadmissible_coefficient, "a violates Im(a) <= 0 (Im(a) < 0 when Re(a) <= 0)");
  }
  const double abs_im_b = std::abs(b.imag());
  double A = std::max(2.0, (1.0 + std::abs(b.real()) + R * R * std::abs(c.real())) / abs_im_b);
  if (a.real() <= 0.0) A = std::max(A, (1.0 + std::abs(a.real())) / std::abs(a.imag()));

  LemmaConstants k{};
  k.A = A;
  k.A1 = a.real() > 0.0 ? a.real() : A * std::abs(a.imag()) - std::abs(a.real());
  k.A2 = A * abs_im_b - std::abs(b.real());
  k.L = std::min(k.A1, 1.0);
  k.M = 2.0 * A;
  return k;
}

InequalityCheck check_energy_inequality(const EnergyProfile& profile, double L, double M) {
  InequalityCheck out;
  double scale = 0.0;
  for (std::size_t j = 0; j < profile.size(); ++j) {
    const double lhs = profile.energy[j] + L * profile.bmass[j] + L * profile.l2mass[j];
    const double rhs = M * (profile.flux[j] + profile.jterm[j]);
    out.margin.push_back(rhs - lhs);
    scale = std::max({scale, lhs, rhs});
  }
  out.tol_disc = 10.0 * profile.spacing * profile.spacing * scale;
  out.min_margin = out.margin.empty() ? 0.0 : *std::min_element(out.margin.begin(), out.margin.end());
  out.holds = out.min_margin >= -out.tol_disc;
  return out;
}

std::vector<IdentityResidual> check_identities(const ComplexField& g, const ComplexField& G, cplx a, cplx b, cplx c,
                                               double m, std::span<const double> rho_list, double x0) {
  const auto& grid = g.grid();
  const EnergyProfile p = energy_profile_at(g, G, m, x0, rho_list);
  std::vector<IdentityResidual> out;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double rho = rho_list[j];
    const auto w = ball_weights(grid, rho, x0);
    cplx gg{};
    for (std::size_t i = 0; i < w.size(); ++i) gg += w[i] * G[i] * std::conj(g[i]);
    // conj(g) ∂_n g integrated over the sphere.
    const cplx flux = std::conj(shell_flux_extended(g, rho, x0));

    const double re_lhs = p.energy[j] + a.real() * p.bmass[j] + b.real() * p.l2mass[j] + c.real() * p.wmass[j];
    const double im_lhs = a.imag() * p.bmass[j] + b.imag() * p.l2mass[j] + c.imag() * p.wmass[j];
    IdentityResidual r{};
    r.rho = rho;
    r.real_defect = std::abs(re_lhs - flux.real() - gg.real());
    r.imag_defect = std::abs(im_lhs - flux.imag() - gg.imag());
    r.scale = p.energy[j] + std::abs(a) * p.bmass[j] + std::abs(b) * p.l2mass[j] + std::abs(c) * p.wmass[j] +
              std::abs(flux) + std::abs(gg);
    out.push_back(r);
  }
  return out;
}

RhoMaxResult rho_max(double energy0, double bmass0, double rho0, double L, double M, double c_cal,
                     const ExponentSet& exps) {
  if (!(rho0 > 0.0)) throw LabError(ErrorKind::domain_error, "rho0 must be positive");
  const double nu = exps.nu();
  const double m = exps.m();
  const double rho0_nu = std::pow(rho0, nu);

  constexpr int n_tau = 512;
  const double lo = exps.tau_min();
  const double step = (1.0 - lo) / n_tau;
  double best = std::numeric_limits<double>::infinity();
  double tau_star = 1.0;
  if (energy0 <= 0.0 || bmass0 <= 0.0) {
    best = 0.0;
  } else {
    // τ_k = lo + k·step, k = 1..n_tau; the open end τ = (m+1)/2 is skipped.
    for (int k = n_tau; k >= 1; --k) {
      const double tau = k == n_tau ? 1.0 : lo + k * step;
      const double bmax = std::max(std::pow(bmass0, exps.mu(tau)), std::pow(bmass0, exps.eta(tau)));
      const double phi = std::pow(energy0, exps.gamma(tau)) * bmax / (2.0 * tau - (1.0 + m));
      if (phi < best) {
        best = phi;
        tau_star = tau;
      }
    }
  }
  const double prefactor = c_cal * M * M * std::max(1.0, 1.0 / (L * L)) * std::max(std::pow(rho0, nu - 1.0), 1.0);
  RhoMaxResult out{};
  out.bracket = rho0_nu - prefactor * best;
  out.rho_max = out.bracket > 0.0 ? std::pow(out.bracket, 1.0 / nu) : 0.0;
  if (best == 0.0) out.rho_max = rho0;
  out.tau_star = tau_star;
  return out;
}

RhoMaxResult rho_max(const EnergyProfile& profile, double rho0, double L, double M, double c_cal,
                     const ExponentSet& exps) {
  if (!(rho0 > 0.0)) throw LabError(ErrorKind::domain_error, "rho0 must be positive");
  // Functionals at ρ0 from the profile (linear interpolation between radii).
  auto at = [&](const std::vector<double>& v) {
    const auto& r = profile.radii;
    if (rho0 <= r.front()) return v.front();
    if (rho0 >= r.back()) return v.back();
    const auto it = std::upper_bound(r.begin(), r.end(), rho0);
    const std::size_t j = static_cast<std::size_t>(it - r.begin());
    const double t = (rho0 - r[j - 1]) / (r[j] - r[j - 1]);
    return (1.0 - t) * v[j - 1] + t * v[j];
  };
  return rho_max(at(profile.energy), at(profile.bmass), rho0, L, M, c_cal, exps);
}

ForcingDecayMargin thm_g_margin(const EnergyProfile& profile, double rho0, double rho1, double eps_star,
                                const ExponentSet& exps) {
  if (!(rho0 > 0.0 && rho0 < rho1)) throw LabError(ErrorKind::domain_error, "need 0 < rho0 < rho1");
  if (!(eps_star > 0.0)) throw LabError(ErrorKind::domain_error, "eps_star must be positive");
  const double p = exps.p_growth();
  ForcingDecayMargin out{};
  out.margin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < profile.size(); ++j) {
    const double rho = profile.radii[j];
    if (rho <= rho0) {
      if (profile.gball[j] > 0.0) out.vanishes_inside = false;
      continue;
    }
    if (rho >= rho1) continue;
    out.margin = std::min(out.margin, eps_star * std::pow(rho - rho0, p) - profile.gball[j]);
  }
  if (!std::isfinite(out.margin)) out.margin = 0.0;
  return out;
}

double support_radius(const ComplexField& field, double threshold_rel, double x0) {
  const double peak = field.max_abs();
  if (peak == 0.0) return 0.0;
  const auto& grid = field.grid();
  double out = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (std::abs(field[i]) > threshold_rel * peak) {
      const double d = grid.kind() == GridKind::interval ? std::abs(grid.node(i) - x0) : grid.node(i);
      out = std::max(out, d);
    }
  }
  return out;
}

ContainmentResult k_eps_containment(const ComplexField& U, const ComplexField& F, double eps, double threshold_rel) {
  ContainmentResult out;
  const double u_peak = U.max_abs();
  if (u_peak == 0.0) return out;
  const auto& grid = U.grid();
  const double f_peak = F.max_abs();
  std::vector<double> supp_f;
  for (std::size_t i = 0; i < F.size(); ++i) {
    if (f_peak > 0.0 && std::abs(F[i]) > threshold_rel * f_peak) supp_f.push_back(grid.node(i));
  }
  out.worst_excess = -eps;
  for (std::size_t i = 0; i < U.size(); ++i) {
    if (std::abs(U[i]) <= threshold_rel * u_peak) continue;
    double dist = std::numeric_limits<double>::infinity();
    if (grid.kind() == GridKind::interval) {
      // supp_f is sorted; nearest neighbour by binary search.
      const double x = grid.node(i);
      auto it = std::lower_bound(supp_f.begin(), supp_f.end(), x);
      if (it != supp_f.end()) dist = std::min(dist, *it - x);
      if (it != supp_f.begin()) dist = std::min(dist, x - *(it - 1));
    } else if (!supp_f.empty()) {
      // Radial supports are balls: dilation adds ε to the outer radius.
      dist = std::max(0.0, grid.node(i) - supp_f.back());
    }
    out.worst_excess = std::max(out.worst_excess, dist - eps);
  }
  out.contained = out.worst_excess <= 1e-12;
  return out;
}

nlohmann::json to_json(const EnergyProfile& p) {
  return {{"x0", p.x0},       {"rho", p.radii},   {"E", p.energy},         {"bmass", p.bmass},
          {"l2mass", p.l2mass}, {"wmass", p.wmass}, {"I", p.flux},           {"Jterm", p.jterm},
          {"Gball", p.gball}};
}

nlohmann::json to_json(const LocalizationReport& r) {
  nlohmann::json ids = nlohmann::json::array();
  for (const auto& id : r.identity_residuals) {
    ids.push_back({{"rho", id.rho},
                   {"real_defect", id.real_defect},
                   {"imag_defect", id.imag_defect},
                   {"real_relative", id.real_relative()},
                   {"imag_relative", id.imag_relative()}});
  }
  return {{"A", r.constants.A},
          {"A1", r.constants.A1},
          {"A2", r.constants.A2},
          {"L", r.constants.L},
          {"M", r.constants.M},
          {"rho0", r.rho0},
          {"rho_max", r.rho_max},
          {"tau_star", r.tau_star},
          {"support_radius", r.support_radius},
          {"K_eps_contained", r.k_eps_contained},
          {"K_eps_worst_excess", r.k_eps_worst_excess},
          {"identity_residuals", ids},
          {"thmG_margin", r.thm_g_margin},
          {"thmG_vanishes_inside", r.thm_g_vanishes_inside},
          {"inequality_min_margin", r.inequality_min_margin},
          {"inequality_tol", r.inequality_tol},
          {"inequality_holds", r.inequality_holds}};
}

void write_profile_csv(const std::string& path, const EnergyProfile& p) {
  std::ofstream os(path);
  if (!os) throw LabError(ErrorKind::missing_artifacts, "cannot write " + path);
  os << "rho,E,bmass,l2mass,wmass,I,Jterm,Gball\n" << std::setprecision(17);
  for (std::size_t j = 0; j < p.size(); ++j) {
    os << p.radii[j] << ',' << p.energy[j] << ',' << p.bmass[j] << ',' << p.l2mass[j] << ',' << p.wmass[j] << ','
       << p.flux[j] << ',' << p.jterm[j] << ',' << p.gball[j] << '\n';
  }
}

}  // namespace nlslab
