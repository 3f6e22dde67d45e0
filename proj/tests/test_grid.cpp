#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "nlslab/error.hpp"
#include "nlslab/grid.hpp"

using namespace nlslab;
using std::numbers::pi;

namespace {

template <class Fn>
ComplexField sample(const GridPtr& g, Fn fn) {
  ComplexField f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = fn(g->node(i));
  return f;
}

ComplexField random_dirichlet(const GridPtr& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  ComplexField f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = cplx(d(rng), d(rng));
  f.apply_dirichlet();
  return f;
}

double order(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

}  // namespace

TEST(Grid, IntervalNodesAndSpacing) {
  const auto g = Grid::build(GridKind::interval, 1, 1.0, 17);
  EXPECT_DOUBLE_EQ(g->spacing(), 0.125);
  EXPECT_DOUBLE_EQ(g->node(0), -1.0);
  EXPECT_DOUBLE_EQ(g->node(8), 0.0);
  EXPECT_DOUBLE_EQ(g->node(16), 1.0);
  EXPECT_TRUE(g->is_boundary(0));
  EXPECT_TRUE(g->is_boundary(16));
  EXPECT_FALSE(g->is_boundary(8));
  double total = 0.0;
  for (double w : g->weights()) total += w;
  EXPECT_NEAR(total, 2.0, 1e-14);
  EXPECT_DOUBLE_EQ(g->weight(0), 0.0625);
  EXPECT_DOUBLE_EQ(g->weight(5), 0.125);
}

TEST(Grid, RadialWeightsProportionalToSphereArea) {
  const auto g = Grid::build(GridKind::radial, 3, 1.0, 33);
  const double h = g->spacing();
  for (std::size_t i = 1; i + 1 < g->size(); ++i) {
    const double r = g->node(i);
    EXPECT_NEAR(g->weight(i), 4.0 * pi * r * r * h, 1e-14);
  }
  EXPECT_NEAR(g->sphere_measure(), 4.0 * pi, 1e-14);
  EXPECT_TRUE(g->is_boundary(32));
  EXPECT_FALSE(g->is_boundary(0));
}

TEST(Grid, RejectsBadDomains) {
  auto kind = [](auto fn) {
    try {
      fn();
    } catch (const LabError& e) {
      return e.kind();
    }
    return ErrorKind::config_error;
  };
  EXPECT_EQ(kind([] { Grid::build(GridKind::interval, 1, 1.0, 4); }), ErrorKind::invalid_domain);
  EXPECT_EQ(kind([] { Grid::build(GridKind::interval, 2, 1.0, 64); }), ErrorKind::invalid_domain);
  EXPECT_EQ(kind([] { Grid::build(GridKind::radial, 2, -1.0, 64); }), ErrorKind::invalid_domain);
}

TEST(Quadrature, ConstantOnIntervalAndDisc) {
  const auto g = Grid::build(GridKind::interval, 1, 1.0, 101);
  const ComplexField one = sample(g, [](double) { return 1.0; });
  EXPECT_NEAR(integrate_ball(one, 1.0).real(), 2.0, 1e-14);
  EXPECT_EQ(integrate_ball(one, 0.0).real(), 0.0);

  // Disc area: the error must fall like h².
  double errs[3];
  int k = 0;
  for (std::size_t n : {51, 101, 201}) {
    const auto d = Grid::build(GridKind::radial, 2, 1.0, n);
    const ComplexField c = sample(d, [](double) { return 1.0; });
    errs[k++] = std::abs(integrate_ball(c, 1.0).real() - pi);
  }
  EXPECT_LT(errs[2], 1e-3);
  EXPECT_GT(order(errs[0], errs[1]), 1.9);
  EXPECT_GT(order(errs[1], errs[2]), 1.9);
}

TEST(Quadrature, LinearIntegrandsExactOffCenter) {
  const auto g = Grid::build(GridKind::interval, 1, 2.0, 97);
  const ComplexField f = sample(g, [](double x) { return cplx(1.0 + 2.0 * x, -0.5 * x); });
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-1.5, 1.5), ur(0.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    const double x0 = ux(rng), rho = ur(rng);
    const double lo = std::max(-2.0, x0 - rho), hi = std::min(2.0, x0 + rho);
    const cplx exact = lo < hi ? cplx((hi - lo) + (hi * hi - lo * lo), -0.25 * (hi * hi - lo * lo)) : cplx(0.0);
    const cplx got = integrate_ball(f, rho, x0);
    EXPECT_NEAR(got.real(), exact.real(), 1e-12);
    EXPECT_NEAR(got.imag(), exact.imag(), 1e-12);
  }
}

TEST(Quadrature, MonotoneInRadius) {
  for (auto kind : {GridKind::interval, GridKind::radial}) {
    const auto g = Grid::build(kind, kind == GridKind::interval ? 1 : 3, 1.0, 80);
    std::vector<double> v(g->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 + std::sin(7.0 * g->node(i)) * std::sin(7.0 * g->node(i));
    double prev = 0.0;
    for (int j = 0; j <= 300; ++j) {
      const double rho = 1.2 * j / 300.0;
      const double x0 = kind == GridKind::interval ? 0.3 : 0.0;
      const double val = integrate_ball(*g, v, rho, x0);
      EXPECT_GE(val, prev - 1e-15);
      prev = val;
    }
  }
}

TEST(Quadrature, RadialOffCenterRejected) {
  const auto g = Grid::build(GridKind::radial, 2, 1.0, 32);
  try {
    ball_weights(*g, 0.5, 0.1);
    FAIL();
  } catch (const LabError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::center_unsupported);
  }
}

TEST(Norms, KnownValues) {
  const auto g = Grid::build(GridKind::interval, 1, 1.0, 2001);
  const ComplexField f = sample(g, [](double x) { return cplx(0.0, 1.0 - x * x); });
  // ∫(1-x²)² = 16/15 on [-1,1].
  EXPECT_NEAR(l2_norm(f), std::sqrt(16.0 / 15.0), 1e-6);
  EXPECT_NEAR(lq_norm(f, std::numeric_limits<double>::infinity()), 1.0, 1e-15);
  EXPECT_NEAR(lq_norm(f, 1.0), 4.0 / 3.0, 1e-6);
  EXPECT_NEAR(inner(f, f).real(), 16.0 / 15.0, 1e-6);
  EXPECT_NEAR(inner(f, f).imag(), 0.0, 1e-15);
}

TEST(Gradient, PolynomialOracles) {
  const auto g = Grid::build(GridKind::interval, 1, 1.0, 101);
  const ComplexField lin = sample(g, [](double x) { return x; });
  const ComplexField dl = gradient(lin);
  for (std::size_t i = 0; i < dl.size(); ++i) EXPECT_NEAR(dl[i].real(), 1.0, 1e-12);
  const ComplexField cst = sample(g, [](double) { return cplx(3.0, -1.0); });
  EXPECT_LT(gradient(cst).max_abs(), 1e-12);

  double errs[3];
  int k = 0;
  for (std::size_t n : {101, 201, 401}) {
    const auto gg = Grid::build(GridKind::interval, 1, 1.0, n);
    const ComplexField sq = sample(gg, [](double x) { return std::sin(2.0 * x); });
    const ComplexField d = gradient(sq);
    double e = 0.0;
    for (std::size_t i = 1; i + 1 < d.size(); ++i) e = std::max(e, std::abs(d[i] - 2.0 * std::cos(2.0 * gg->node(i))));
    errs[k++] = e;
  }
  EXPECT_GT(order(errs[0], errs[1]), 1.9);
  EXPECT_GT(order(errs[1], errs[2]), 1.9);
  const ComplexField xx = sample(g, [](double x) { return x * x; });
  const ComplexField dxx = gradient(xx);
  for (std::size_t i = 1; i + 1 < dxx.size(); ++i) EXPECT_NEAR(dxx[i].real(), 2.0 * g->node(i), 1e-12);
}

TEST(Interpolate, LinearExactAndZeroOutside) {
  const auto g = Grid::build(GridKind::interval, 1, 2.0, 41);
  const ComplexField f = sample(g, [](double x) { return cplx(2.0 * x - 1.0, x); });
  for (double x : {-1.93, -0.5, 0.0, 0.777, 1.999}) {
    EXPECT_NEAR(std::abs(interpolate(f, x) - cplx(2.0 * x - 1.0, x)), 0.0, 1e-13);
  }
  EXPECT_EQ(interpolate(f, 2.5), cplx(0.0));
  EXPECT_EQ(interpolate(f, -2.01), cplx(0.0));
  const auto r = Grid::build(GridKind::radial, 2, 1.0, 21);
  const ComplexField fr = sample(r, [](double x) { return 1.0 + x; });
  EXPECT_NEAR(interpolate(fr, 0.33).real(), 1.33, 1e-13);
}

TEST(ShellFlux, HandEvaluations) {
  const auto g = Grid::build(GridKind::interval, 1, 1.0, 101);
  // g = x: flux(0.5) = g(0.5)·1 − g(−0.5)·1 = 1.
  const ComplexField lin = sample(g, [](double x) { return x; });
  EXPECT_NEAR(shell_flux(lin, 0.5).real(), 1.0, 1e-12);
  // Even g with zero derivative at ±ρ.
  const ComplexField c = sample(g, [](double x) { return std::cos(2.0 * pi * x); });
  EXPECT_NEAR(std::abs(shell_flux(c, 0.5)), 0.0, 1e-12);
  try {
    shell_flux(lin, 1.0);
    FAIL();
  } catch (const LabError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::out_of_range);
  }
  EXPECT_NO_THROW(shell_flux_extended(lin, 1.5));
  EXPECT_EQ(shell_flux_extended(lin, 5.0), cplx(0.0));

  // Radial N=3, g = r²: 4πρ²·ρ²·2ρ = 8πρ⁵.
  const auto r = Grid::build(GridKind::radial, 3, 1.0, 401);
  const ComplexField q = sample(r, [](double x) { return x * x; });
  EXPECT_NEAR(shell_flux(q, 0.5).real(), 8.0 * pi * std::pow(0.5, 5), 1e-4);
}

TEST(Operator, DirichletEigenfunctionOnInterval) {
  double errs[3];
  int k = 0;
  const double R = 2.0;
  const double lam = std::pow(pi / (2.0 * R), 2);
  for (std::size_t n : {101, 201, 401}) {
    const auto g = Grid::build(GridKind::interval, 1, R, n);
    const ComplexField f = sample(g, [&](double x) { return std::sin(pi * (x + R) / (2.0 * R)); });
    const ComplexField lf = assemble_operator(g, 0.0, 0.0).apply(f);
    double e = 0.0;
    for (std::size_t i = 1; i + 1 < f.size(); ++i) e = std::max(e, std::abs(lf[i] - lam * f[i]));
    errs[k++] = e;
  }
  EXPECT_LT(errs[2], 1e-5);
  EXPECT_GT(order(errs[0], errs[1]), 1.9);
  EXPECT_GT(order(errs[1], errs[2]), 1.9);
}

TEST(Operator, PotentialAndShiftTermsArePointwise) {
  const auto g = Grid::build(GridKind::interval, 1, 1.0, 64);
  const ComplexField one = sample(g, [](double) { return 1.0; });
  const cplx b(1.0, -0.5);
  const cplx c(-1.0 / 16.0, 0.0);
  const ComplexField a0 = assemble_operator(g, 0.0, 0.0).apply(one);
  const ComplexField ab = assemble_operator(g, b, c).apply(one);
  for (std::size_t i = 2; i + 2 < g->size(); ++i) {
    const double x = g->node(i);
    EXPECT_NEAR(std::abs(ab[i] - a0[i] - (b + c * x * x)), 0.0, 1e-14 / (g->spacing() * g->spacing()));
  }
  EXPECT_EQ(ab[0], cplx(0.0));
  const ComplexField zero(g);
  EXPECT_EQ(assemble_operator(g, b, c).apply(zero).max_abs(), 0.0);
}

TEST(Operator, RadialLaplacianConvergesOnSmoothField) {
  // u = cos(πr/2) on the unit ball in R³, -Δu = (π/2)² u + (π/r) sin(πr/2).
  // The truncation error is O(h²) away from the origin; the solution error is
  // O(h²) in the weighted norm.
  double trunc[3], sol[3];
  int k = 0;
  for (std::size_t n : {101, 201, 401}) {
    const auto g = Grid::build(GridKind::radial, 3, 1.0, n);
    const ComplexField u = sample(g, [](double r) { return std::cos(0.5 * pi * r); });
    ComplexField f(g);
    for (std::size_t i = 1; i + 1 < f.size(); ++i) {
      const double r = g->node(i);
      f[i] = 0.25 * pi * pi * std::cos(0.5 * pi * r) + pi / r * std::sin(0.5 * pi * r);
    }
    f[0] = 0.75 * pi * pi;  // limit r -> 0
    const ComplexField lu = neg_laplacian(u);
    double e = 0.0;
    for (std::size_t i = 1; i + 1 < f.size(); ++i) {
      if (g->node(i) >= 0.25) e = std::max(e, std::abs(lu[i] - f[i]));
    }
    trunc[k] = e;
    sol[k] = l2_norm(assemble_operator(g, 0.0, 0.0).solve(f) - u);
    ++k;
  }
  EXPECT_GT(order(trunc[0], trunc[1]), 1.9);
  EXPECT_GT(order(trunc[1], trunc[2]), 1.9);
  EXPECT_GT(order(sol[0], sol[1]), 1.9);
  EXPECT_GT(order(sol[1], sol[2]), 1.9);
}

TEST(Operator, SelfAdjointInWeightedInnerProduct) {
  for (int dim : {1, 2, 3}) {
    const auto g = Grid::build(GridKind::radial, dim, 1.5, 120);
    const LinearOperator A = assemble_operator(g, 0.0, 0.0);
    const ComplexField f = random_dirichlet(g, 11 + dim), h = random_dirichlet(g, 29 + dim);
    const cplx lhs = inner(A.apply(f), h), rhs = inner(f, A.apply(h));
    EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-12 * std::abs(lhs));
    EXPECT_GT(inner(A.apply(f), f).real(), 0.0);
    EXPECT_NEAR(inner(A.apply(f), f).imag(), 0.0, 1e-12 * std::abs(inner(A.apply(f), f)));
  }
  const auto g = Grid::build(GridKind::interval, 1, 1.0, 90);
  const LinearOperator A = assemble_operator(g, 0.0, 0.0);
  const ComplexField f = random_dirichlet(g, 3), h = random_dirichlet(g, 4);
  EXPECT_NEAR(std::abs(inner(A.apply(f), h) - inner(f, A.apply(h))), 0.0, 1e-9);
}

TEST(Operator, DiscreteIntegrationByParts) {
  double errs[3];
  int k = 0;
  for (std::size_t n : {100, 200, 400}) {
    const auto g = Grid::build(GridKind::interval, 1, 1.0, n);
    const ComplexField f = sample(g, [](double x) { return cplx(1.0 - x * x, std::sin(pi * x)); });
    const double lhs = inner(neg_laplacian(f), f).real();
    const double grad = std::pow(l2_norm(gradient(f)), 2);
    errs[k++] = std::abs(lhs - grad);
  }
  EXPECT_GT(order(errs[0], errs[1]), 1.0);
  EXPECT_GT(order(errs[1], errs[2]), 1.0);
}

TEST(Operator, SolveInvertsApply) {
  for (auto kind : {GridKind::interval, GridKind::radial}) {
    const auto g = Grid::build(kind, kind == GridKind::interval ? 1 : 2, 3.0, 300);
    const LinearOperator A = assemble_operator(g, cplx(0.3, -2.25), -1.0 / 16.0);
    const ComplexField f = random_dirichlet(g, 5);
    const ComplexField back = A.solve(A.apply(f));
    EXPECT_LT((back - f).max_abs(), 1e-10);
    // affine and shifted agree with the direct construction
    std::vector<cplx> shift(g->size(), cplx(0.5, 0.1));
    const ComplexField lhs = A.affine(2.0, cplx(0.0, 1.0)).shifted(shift).apply(f);
    const ComplexField ref = 2.0 * A.apply(f) + cplx(0.5, 1.1) * f;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (!g->is_boundary(i)) EXPECT_NEAR(std::abs(lhs[i] - ref[i]), 0.0, 1e-10);
    }
  }
}

TEST(Operator, SingularSystemReported) {
  const auto g = Grid::build(GridKind::interval, 1, 1.0, 33);
  const LinearOperator A = assemble_operator(g, 0.0, 0.0).affine(0.0, 0.0);
  const ComplexField f = random_dirichlet(g, 1);
  try {
    A.solve(f);
    FAIL();
  } catch (const LabError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::singular_operator);
  }
}

TEST(Eigenvalue, IntervalAndBall) {
  const auto g = Grid::build(GridKind::interval, 1, 1.0, 401);
  EXPECT_NEAR(smallest_eigenvalue(*g), pi * pi / 4.0, 1e-3);
  // First Dirichlet eigenvalue of the unit ball in R³ is π².
  const auto b = Grid::build(GridKind::radial, 3, 1.0, 801);
  EXPECT_NEAR(smallest_eigenvalue(*b), pi * pi, 1e-3 * pi * pi);
  // Radial N=1 grid is the half interval with even reflection.
  const auto h = Grid::build(GridKind::radial, 1, 1.0, 401);
  EXPECT_NEAR(smallest_eigenvalue(*h), pi * pi / 4.0, 1e-3);
}

TEST(Csv, RoundTripIsBitExact) {
  const auto g = Grid::build(GridKind::interval, 1, 1.0, 50);
  const ComplexField f = random_dirichlet(g, 42);
  std::stringstream ss;
  write_field_csv(ss, f);
  EXPECT_EQ(ss.str().substr(0, 8), "x,re,im\n");
  const auto samples = read_field_csv(ss);
  ASSERT_EQ(samples.size(), f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    EXPECT_EQ(samples[i].x, g->node(i));
    EXPECT_EQ(samples[i].value, f[i]);
  }
  const ComplexField back = field_from_samples(g, samples);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(back[i], f[i]);
}

TEST(Field, ArithmeticAndDirichlet) {
  const auto g = Grid::build(GridKind::interval, 1, 1.0, 16);
  ComplexField a = sample(g, [](double x) { return cplx(x, 1.0); });
  const ComplexField b = sample(g, [](double x) { return cplx(1.0, x); });
  const ComplexField s = a + b, d = a - b, p = cplx(0.0, 2.0) * a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(s[i], a[i] + b[i]);
    EXPECT_EQ(d[i], a[i] - b[i]);
    EXPECT_EQ(p[i], cplx(0.0, 2.0) * a[i]);
  }
  a.apply_dirichlet();
  EXPECT_EQ(a[0], cplx(0.0));
  EXPECT_EQ(a[15], cplx(0.0));
  EXPECT_NE(a[7], cplx(0.0));
}
