#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nlslab/error.hpp"
#include "nlslab/localization.hpp"
#include "nlslab/profile_solver.hpp"
#include "nlslab/selfsimilar.hpp"

using namespace nlslab;

namespace {

double beta(double x, double y) { return std::tgamma(x) * std::tgamma(y) / std::tgamma(x + y); }

ComplexField cubic_bump(const GridPtr& g) {
  ComplexField f(g);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double s = std::max(0.0, 1.0 - std::pow(g->abs_coord(i), 2));
    f[i] = s * s * s;
  }
  return f;
}

ComplexField bump_forcing(const GridPtr& g, double amp, double r = 0.5) {
  ComplexField G(g);
  for (std::size_t i = 0; i < G.size(); ++i) {
    const double x = g->abs_coord(i);
    const double c = std::max(0.0, 1.0 - x * x / (r * r));
    G[i] = -amp * std::exp(-x * x / 0.08) * c * c * std::polar(1.0, -x * x / 8.0);
  }
  return G;
}

ModelParams params(double R, cplx a = 1.0) { return validate_params(RawParams{0.5, a, 0.0, 1, R}); }

}  // namespace

TEST(LemmaConstants, WorkedExample) {
  const LemmaConstants k = lemma_constants(1.0, cplx(0.0, -2.25), -1.0 / 16.0, 2.0);
  EXPECT_DOUBLE_EQ(k.A, 2.0);
  EXPECT_DOUBLE_EQ(k.A1, 1.0);
  EXPECT_DOUBLE_EQ(k.A2, 4.5);
  EXPECT_DOUBLE_EQ(k.L, 1.0);
  EXPECT_DOUBLE_EQ(k.M, 4.0);
}

TEST(LemmaConstants, DissipativeCoefficient) {
  const LemmaConstants k = lemma_constants(cplx(-1.0, -0.5), cplx(0.0, -2.25), -1.0 / 16.0, 2.0);
  EXPECT_DOUBLE_EQ(k.A, 4.0);
  EXPECT_DOUBLE_EQ(k.A1, 1.0);
  EXPECT_DOUBLE_EQ(k.A2, 9.0);
  EXPECT_DOUBLE_EQ(k.L, 1.0);
  EXPECT_DOUBLE_EQ(k.M, 8.0);
  // Large domains: the |c| R² term dominates.
  const LemmaConstants big = lemma_constants(1.0, cplx(0.5, -2.25), -1.0 / 16.0, 8.0);
  EXPECT_DOUBLE_EQ(big.A, (1.0 + 0.5 + 4.0) / 2.25);
  EXPECT_DOUBLE_EQ(big.A2, big.A * 2.25 - 0.5);
}

TEST(LemmaConstants, SmallA1LimitsL) {
  const LemmaConstants k = lemma_constants(0.25, cplx(0.0, -2.25), -1.0 / 16.0, 2.0);
  EXPECT_DOUBLE_EQ(k.L, 0.25);
}

TEST(LemmaConstants, Inadmissible) {
  const auto kind = [](cplx a, cplx b, cplx c) {
    try {
      lemma_constants(a, b, c, 2.0);
    } catch (const LabError& e) {
      return e.kind();
    }
    return ErrorKind::domain_error;
  };
  EXPECT_EQ(kind(1.0, cplx(1.0, 0.0), -0.0625), ErrorKind::inadmissible_coefficient);
  EXPECT_EQ(kind(1.0, cplx(0.0, -1.0), cplx(0.0, 0.1)), ErrorKind::inadmissible_coefficient);
  EXPECT_EQ(kind(cplx(-1.0, 0.0), cplx(0.0, -1.0), -0.0625), ErrorKind::inadmissible_coefficient);
  EXPECT_EQ(kind(cplx(1.0, 0.5), cplx(0.0, -1.0), -0.0625), ErrorKind::inadmissible_coefficient);
}

TEST(EnergyProfile, BetaFunctionOracles) {
  const auto g = Grid::build(GridKind::interval, 1, 3.0, 6001);
  const ComplexField f = cubic_bump(g);
  const std::vector<double> radii{2.0};
  const EnergyProfile p = energy_profile_at(f, ComplexField(g), 0.5, 0.0, radii);
  EXPECT_NEAR(p.energy[0], 27648.0 / 10395.0, 1e-3);
  EXPECT_NEAR(p.energy[0], 36.0 * beta(1.5, 5.0), 1e-3);
  EXPECT_NEAR(p.bmass[0], beta(0.5, 5.5), 1e-6);
  EXPECT_NEAR(p.l2mass[0], beta(0.5, 7.0), 1e-6);
  EXPECT_NEAR(p.wmass[0], beta(1.5, 7.0), 1e-6);
  EXPECT_NEAR(p.flux[0], 0.0, 1e-12);
  EXPECT_EQ(p.jterm[0], 0.0);
  EXPECT_EQ(p.gball[0], 0.0);
}

TEST(EnergyProfile, MonotoneInRadius) {
  const auto g = Grid::build(GridKind::interval, 1, 3.0, 1201);
  const ComplexField f = cubic_bump(g);
  const EnergyProfile p = energy_profile(f, bump_forcing(g, 1.0), 0.5, 0.4, 65);
  ASSERT_EQ(p.size(), 65u);
  EXPECT_EQ(p.radii.front(), 0.0);
  EXPECT_NEAR(p.radii.back(), 3.4, 1e-12);
  for (std::size_t j = 1; j < p.size(); ++j) {
    EXPECT_GE(p.energy[j], p.energy[j - 1] - 1e-14);
    EXPECT_GE(p.bmass[j], p.bmass[j - 1] - 1e-14);
    EXPECT_GE(p.l2mass[j], p.l2mass[j - 1] - 1e-14);
    EXPECT_GE(p.wmass[j], p.wmass[j - 1] - 1e-14);
    EXPECT_GE(p.jterm[j], p.jterm[j - 1] - 1e-14);
    EXPECT_GE(p.gball[j], p.gball[j - 1] - 1e-14);
  }
}

TEST(EnergyProfile, RadialOffCenterRejected) {
  const auto g = Grid::build(GridKind::radial, 3, 2.0, 200);
  try {
    energy_profile(ComplexField(g), ComplexField(g), 0.5, 0.5, 8);
    FAIL();
  } catch (const LabError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::center_unsupported);
  }
}

TEST(Identities, ManufacturedSmoothSolution) {
  // g = (1 - x²)₊³ with G from the discrete operator: both identities hold to O(h²).
  std::vector<double> worst;
  for (std::size_t n : {1000u, 2000u, 4000u}) {
    const auto g = Grid::build(GridKind::interval, 1, 2.0, n);
    const ModelParams p = params(2.0);
    const DerivedCoefficients k = derive_coefficients(p);
    const ComplexField gs = cubic_bump(g);
    const ComplexField G = apply_equation(make_problem(p, ComplexField(g)), gs);
    const std::vector<double> rho{0.5, 1.0, 2.0};
    double w = 0.0;
    for (const auto& r : check_identities(gs, G, p.a(), k.b, k.c, 0.5, rho)) {
      w = std::max({w, r.real_relative(), r.imag_relative()});
    }
    worst.push_back(w);
  }
  EXPECT_LE(worst.back(), 1e-5);
  EXPECT_GE(std::log2(worst[0] / worst[2]) / 2.0, 1.5);
}

TEST(Identities, ConvergedBumpSolution) {
  const auto g = Grid::build(GridKind::interval, 1, 4.0, 2000);
  const ModelParams p = params(4.0);
  const DerivedCoefficients k = derive_coefficients(p);
  const ComplexField G = bump_forcing(g, 1e-3);
  SolverOptions o;
  o.tol = 1e-13;
  const ProfileSolution sol = solve_profile(make_problem(p, G, o));
  ASSERT_TRUE(sol.converged);
  const std::vector<double> rho{1.0, 2.0, 4.0};
  for (const auto& r : check_identities(sol.g, G, p.a(), k.b, k.c, 0.5, rho)) {
    EXPECT_LE(r.real_relative(), 1e-4) << r.rho;
    EXPECT_LE(r.imag_relative(), 1e-4) << r.rho;
  }
}

TEST(Inequality, HoldsForConvergedSolution) {
  const auto g = Grid::build(GridKind::interval, 1, 4.0, 2000);
  const ModelParams p = params(4.0);
  const DerivedCoefficients k = derive_coefficients(p);
  const ComplexField G = bump_forcing(g, 1e-3);
  SolverOptions o;
  o.tol = 1e-13;
  const ProfileSolution sol = solve_profile(make_problem(p, G, o));
  ASSERT_TRUE(sol.converged);
  const LemmaConstants lc = lemma_constants(p.a(), k.b, k.c, 4.0);
  const InequalityCheck chk = check_energy_inequality(energy_profile(sol.g, G, 0.5, 0.0, 65), lc.L, lc.M);
  EXPECT_TRUE(chk.holds) << chk.min_margin;
  // A constant far below the admissible one breaks it.
  const InequalityCheck bad = check_energy_inequality(energy_profile(sol.g, G, 0.5, 0.0, 65), lc.L, 1e-3);
  EXPECT_FALSE(bad.holds);
}

TEST(RhoMax, ZeroDataKeepsRho0) {
  const ExponentSet e(0.5, 1);
  const RhoMaxResult r = rho_max(0.0, 0.0, 0.25, 1.0, 4.0, 1.0, e);
  EXPECT_DOUBLE_EQ(r.rho_max, 0.25);
  EXPECT_THROW(rho_max(0.0, 0.0, 0.0, 1.0, 4.0, 1.0, e), LabError);
}

TEST(RhoMax, ClosedFormAtFixedTau) {
  // With E = b the τ-minimization is explicit enough to bound from both sides.
  const ExponentSet e(0.5, 1);
  const double rho0 = 0.5, L = 1.0, M = 4.0, E = 1e-6, b = 1e-6;
  const RhoMaxResult r = rho_max(E, b, rho0, L, M, 1.0, e);
  const double nu = e.nu();
  const auto phi = [&](double tau) {
    return std::pow(E, e.gamma(tau)) * std::max(std::pow(b, e.mu(tau)), std::pow(b, e.eta(tau))) /
           (2.0 * tau - 1.5);
  };
  const double pref = M * M * std::max(1.0, 1.0 / (L * L)) * std::max(std::pow(rho0, nu - 1.0), 1.0);
  // τ = 1 is on the grid, so the minimum is no larger than Φ(1).
  const double upper_bracket = std::pow(rho0, nu) - pref * phi(1.0);
  EXPECT_GE(r.bracket, upper_bracket - 1e-15);
  EXPECT_LE(r.tau_star, 1.0);
  EXPECT_GT(r.tau_star, e.tau_min());
  EXPECT_NEAR(r.bracket, std::pow(rho0, nu) - pref * phi(r.tau_star), 1e-14);
  EXPECT_NEAR(r.rho_max, std::pow(std::max(r.bracket, 0.0), 1.0 / nu), 1e-14);
}

TEST(RhoMax, MonotoneInData) {
  const ExponentSet e(0.5, 1);
  double prev_e = 1.0;
  for (double E : {1e-10, 1e-8, 1e-6, 1e-4, 1e-2}) {
    const double r = rho_max(E, 1e-6, 0.5, 1.0, 4.0, 1.0, e).rho_max;
    EXPECT_LE(r, prev_e + 1e-15);
    prev_e = r;
  }
  double prev_b = 1.0;
  for (double b : {1e-10, 1e-8, 1e-6, 1e-4, 1e-2}) {
    const double r = rho_max(1e-6, b, 0.5, 1.0, 4.0, 1.0, e).rho_max;
    EXPECT_LE(r, prev_b + 1e-15);
    prev_b = r;
  }
  // Large data empties the ball.
  EXPECT_EQ(rho_max(10.0, 10.0, 0.5, 1.0, 4.0, 1.0, e).rho_max, 0.0);
}

TEST(ThmG, ForcingDecayMargin) {
  const auto g = Grid::build(GridKind::interval, 1, 3.0, 1201);
  const ExponentSet e(0.5, 1);
  // Forcing supported in |x| <= 0.5 seen from x0 = 2: zero on B(2, 0.25), enters at ρ = 1.5.
  const EnergyProfile prof = energy_profile(cubic_bump(g), bump_forcing(g, 1e-3), 0.5, 2.0, 65);
  const ForcingDecayMargin m = thm_g_margin(prof, 0.25, 1.0, 1.0, e);
  EXPECT_TRUE(m.vanishes_inside);
  EXPECT_GT(m.margin, 0.0);
  // Centered at the forcing it does not vanish inside.
  const EnergyProfile centered = energy_profile(cubic_bump(g), bump_forcing(g, 1e-3), 0.5, 0.0, 65);
  EXPECT_FALSE(thm_g_margin(centered, 0.25, 1.0, 1.0, e).vanishes_inside);
  EXPECT_THROW(thm_g_margin(prof, 0.5, 0.25, 1.0, e), LabError);
  EXPECT_THROW(thm_g_margin(prof, 0.25, 1.0, 0.0, e), LabError);
}

TEST(Support, TentFunctionRadius) {
  for (std::size_t n : {401u, 1000u}) {
    const auto g = Grid::build(GridKind::interval, 1, 2.0, n);
    ComplexField f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::max(0.0, 1.0 - std::pow(g->node(i), 2));
    EXPECT_NEAR(support_radius(f), 1.0, g->spacing() * (1.0 + 1e-9));
  }
  const auto g = Grid::build(GridKind::interval, 1, 2.0, 401);
  EXPECT_EQ(support_radius(ComplexField(g)), 0.0);
  // Off-center: the tent seen from x0 = 0.5 reaches 1.5.
  ComplexField f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::max(0.0, 1.0 - std::pow(g->node(i), 2));
  EXPECT_NEAR(support_radius(f, 1e-6, 0.5), 1.5, g->spacing() * (1.0 + 1e-9));
}

TEST(Support, KEpsContainment) {
  const auto g = Grid::build(GridKind::interval, 1, 2.0, 801);
  ComplexField U(g), F(g);
  for (std::size_t i = 0; i < U.size(); ++i) {
    const double x = g->node(i);
    U[i] = std::max(0.0, 1.0 - x * x);
    F[i] = std::max(0.0, 1.0 - 4.0 * x * x);
  }
  const ContainmentResult ok = k_eps_containment(U, F, 0.5 + g->spacing());
  EXPECT_TRUE(ok.contained);
  EXPECT_LE(ok.worst_excess, 0.0);
  const ContainmentResult bad = k_eps_containment(U, F, 0.3);
  EXPECT_FALSE(bad.contained);
  EXPECT_NEAR(bad.worst_excess, 0.2, 2.0 * g->spacing());
}

TEST(Report, JsonFields) {
  LocalizationReport rep;
  rep.rho0 = 0.25;
  rep.identity_residuals.push_back({1.0, 1e-12, 2e-12, 1.0});
  const auto j = to_json(rep);
  for (const char* key : {"rho0", "rho_max", "support_radius", "identity_residuals", "thmG_margin",
                          "inequality_holds"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}
