#include "nlslab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "nlslab/error.hpp"

#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace nlslab {

std::string to_string(GridKind kind) { return kind == GridKind::interval ? "interval" : "radial"; }

GridKind grid_kind_from_string(const std::string& name) {
  if (name == "interval") return GridKind::interval;
  if (name == "radial") return GridKind::radial;
  throw LabError(ErrorKind::invalid_domain, "unknown grid kind '" + name + "'");
}

double unit_sphere_measure(int dim) {
  const double half = 0.5 * dim;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

std::shared_ptr<const Grid> Grid::build(GridKind kind, int dim, double radius, std::size_t n) {
  if (n < min_nodes) {
    throw LabError(ErrorKind::invalid_domain, "grid needs at least 16 nodes, got " + std::to_string(n));
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) throw LabError(ErrorKind::invalid_domain, "radius must be positive");
  if (dim < 1) throw LabError(ErrorKind::invalid_domain, "dimension must be >= 1");
  if (kind == GridKind::interval && dim != 1) {
    throw LabError(ErrorKind::invalid_domain, "interval grids require N = 1");
  }

  std::shared_ptr<Grid> g(new Grid());
  g->kind_ = kind;
  g->dim_ = dim;
  g->radius_ = radius;
  g->sphere_measure_ = unit_sphere_measure(dim);
  g->nodes_.resize(n);
  g->weights_.resize(n);

  if (kind == GridKind::interval) {
    g->h_ = 2.0 * radius / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g->nodes_[i] = -radius + g->h_ * static_cast<double>(i);
    g->nodes_.back() = radius;
    std::fill(g->weights_.begin(), g->weights_.end(), g->h_);
    g->weights_.front() = g->weights_.back() = 0.5 * g->h_;
  } else {
    const double h = radius / static_cast<double>(n - 1);
    const double s = g->sphere_measure_;
    g->h_ = h;
    for (std::size_t i = 0; i < n; ++i) g->nodes_[i] = h * static_cast<double>(i);
    g->nodes_.back() = radius;
    for (std::size_t i = 1; i + 1 < n; ++i) g->weights_[i] = s * std::pow(g->nodes_[i], dim - 1) * h;
    g->weights_.front() = s * std::pow(0.5 * h, dim) / dim;
    g->weights_.back() = s * std::pow(radius, dim - 1) * 0.5 * h;
  }
  return g;
}

bool Grid::is_boundary(std::size_t i) const {
  if (kind_ == GridKind::interval) return i == 0 || i + 1 == nodes_.size();
  return i + 1 == nodes_.size();
}

// ---------------------------------------------------------------------------

ComplexField::ComplexField(GridPtr grid) : grid_(std::move(grid)), values_(grid_->size(), cplx{}) {}

ComplexField::ComplexField(GridPtr grid, std::vector<cplx> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size()) {
    throw LabError(ErrorKind::invalid_domain, "field length does not match grid");
  }
}

double ComplexField::max_abs() const {
  double out = 0.0;
  for (const auto& v : values_) out = std::max(out, std::abs(v));
  return out;
}

void ComplexField::apply_dirichlet() {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (grid_->is_boundary(i)) values_[i] = 0.0;
  }
}

ComplexField& ComplexField::operator+=(const ComplexField& other) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ComplexField& ComplexField::operator-=(const ComplexField& other) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ComplexField& ComplexField::operator*=(cplx s) {
  for (auto& v : values_) v *= s;
  return *this;
}

ComplexField operator+(ComplexField lhs, const ComplexField& rhs) { return lhs += rhs; }
ComplexField operator-(ComplexField lhs, const ComplexField& rhs) { return lhs -= rhs; }
ComplexField operator*(cplx s, ComplexField f) { return f *= s; }

cplx inner(const ComplexField& f, const ComplexField& g) {
  const auto& grid = f.grid();
  cplx sum{};
  for (std::size_t i = 0; i < f.size(); ++i) sum += grid.weight(i) * f[i] * std::conj(g[i]);
  return sum;
}

double lq_norm(const ComplexField& f, double q) {
  if (std::isinf(q)) return f.max_abs();
  const auto& grid = f.grid();
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += grid.weight(i) * std::pow(std::abs(f[i]), q);
  return std::pow(sum, 1.0 / q);
}

double l2_norm(const ComplexField& f) {
  const auto& grid = f.grid();
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += grid.weight(i) * std::norm(f[i]);
  return std::sqrt(sum);
}

// ---------------------------------------------------------------------------

std::vector<double> ball_weights(const Grid& grid, double rho, double x0) {
  const std::size_t n = grid.size();
  std::vector<double> w(n, 0.0);
  if (rho <= 0.0) return w;
  const double h = grid.spacing();

  if (grid.kind() == GridKind::interval) {
    const double lo = x0 - rho;
    const double hi = x0 + rho;
    // Exact integral of the linear interpolant over [lo, hi] per cell.
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double xa = grid.node(j);
      const double xb = grid.node(j + 1);
      const double l = std::max(xa, lo);
      const double r = std::min(xb, hi);
      if (r <= l) continue;
      w[j] += ((xb - l) * (xb - l) - (xb - r) * (xb - r)) / (2.0 * h);
      w[j + 1] += ((r - xa) * (r - xa) - (l - xa) * (l - xa)) / (2.0 * h);
    }
    return w;
  }

  if (x0 != 0.0) {
    throw LabError(ErrorKind::center_unsupported, "radial grids only support balls centered at the origin");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::max(0.0, grid.node(i) - 0.5 * h);
    const double b = std::min(grid.radius(), grid.node(i) + 0.5 * h);
    double frac;
    if (rho >= b) {
      frac = 1.0;
    } else if (rho <= a) {
      frac = 0.0;
    } else {
      frac = (rho - a) / (b - a);
    }
    w[i] = frac * grid.weight(i);
  }
  return w;
}

double integrate_ball(const Grid& grid, std::span<const double> values, double rho, double x0) {
  const auto w = ball_weights(grid, rho, x0);
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) sum += w[i] * values[i];
  return sum;
}

cplx integrate_ball(const ComplexField& field, double rho, double x0) {
  const auto w = ball_weights(field.grid(), rho, x0);
  cplx sum{};
  for (std::size_t i = 0; i < w.size(); ++i) sum += w[i] * field[i];
  return sum;
}

ComplexField gradient(const ComplexField& field) {
  const auto& grid = field.grid();
  const std::size_t n = grid.size();
  const double h = grid.spacing();
  ComplexField out(field.grid_ptr());
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (field[i + 1] - field[i - 1]) / (2.0 * h);
  out[n - 1] = (field[n - 1] - field[n - 2]) / h;
  if (grid.kind() == GridKind::interval) {
    out[0] = (field[1] - field[0]) / h;
  } else {
    out[0] = 0.0;
  }
  return out;
}

cplx interpolate(const ComplexField& field, double x) {
  const auto& grid = field.grid();
  const double lo = grid.node(0);
  const double hi = grid.node(grid.size() - 1);
  if (grid.kind() == GridKind::radial) x = std::abs(x);
  if (x < lo || x > hi) return 0.0;
  const double s = (x - lo) / grid.spacing();
  auto j = static_cast<std::size_t>(std::floor(s));
  if (j >= grid.size() - 1) j = grid.size() - 2;
  const double t = s - static_cast<double>(j);
  return (1.0 - t) * field[j] + t * field[j + 1];
}

namespace {

cplx flux_density(const ComplexField& g, const ComplexField& dg, double x) {
  return interpolate(g, x) * std::conj(interpolate(dg, x));
}

}  // namespace

cplx shell_flux_extended(const ComplexField& g, double rho, double x0) {
  const auto& grid = g.grid();
  if (rho <= 0.0) return 0.0;
  const ComplexField dg = gradient(g);
  if (grid.kind() == GridKind::interval) {
    return flux_density(g, dg, x0 + rho) - flux_density(g, dg, x0 - rho);
  }
  if (x0 != 0.0) {
    throw LabError(ErrorKind::center_unsupported, "radial grids only support spheres centered at the origin");
  }
  return flux_density(g, dg, rho) * grid.sphere_measure() * std::pow(rho, grid.dim() - 1);
}

cplx shell_flux(const ComplexField& g, double rho, double x0) {
  const auto& grid = g.grid();
  if (rho < 0.0 || rho >= grid.radius()) {
    std::ostringstream os;
    os << "shell radius " << rho << " outside [0, " << grid.radius() << ")";
    throw LabError(ErrorKind::out_of_range, os.str());
  }
  return shell_flux_extended(g, rho, x0);
}

// ---------------------------------------------------------------------------

LinearOperator assemble_operator(const GridPtr& grid, cplx b, cplx c) {
  const std::size_t n = grid->size();
  const double h = grid->spacing();
  const double ih2 = 1.0 / (h * h);
  LinearOperator op;
  op.grid_ = grid;
  op.lower_.assign(n - 1, cplx{});
  op.diag_.assign(n, cplx{});
  op.upper_.assign(n - 1, cplx{});

  if (grid->kind() == GridKind::interval) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      op.lower_[i - 1] = -ih2;
      op.diag_[i] = 2.0 * ih2;
      op.upper_[i] = -ih2;
    }
  } else {
    const int dim = grid->dim();
    op.diag_[0] = 2.0 * dim * ih2;
    op.upper_[0] = -2.0 * dim * ih2;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double r = grid->node(i);
      const double rm = std::pow((r - 0.5 * h) / r, dim - 1);
      const double rp = std::pow((r + 0.5 * h) / r, dim - 1);
      op.lower_[i - 1] = -rm * ih2;
      op.diag_[i] = (rm + rp) * ih2;
      op.upper_[i] = -rp * ih2;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (grid->is_boundary(i)) {
      op.diag_[i] = 1.0;
      if (i > 0) op.lower_[i - 1] = 0.0;
      if (i + 1 < n) op.upper_[i] = 0.0;
      continue;
    }
    const double r = grid->abs_coord(i);
    op.diag_[i] += b + c * r * r;
  }
  return op;
}

ComplexField LinearOperator::apply(const ComplexField& f) const {
  const std::size_t n = diag_.size();
  ComplexField out(grid_);
  for (std::size_t i = 0; i < n; ++i) {
    if (grid_->is_boundary(i)) continue;
    cplx v = diag_[i] * f[i];
    if (i > 0) v += lower_[i - 1] * f[i - 1];
    if (i + 1 < n) v += upper_[i] * f[i + 1];
    out[i] = v;
  }
  return out;
}

ComplexField LinearOperator::solve(const ComplexField& rhs) const {
  const auto n = static_cast<lapack_int>(diag_.size());
  std::vector<cplx> dl(lower_), d(diag_), du(upper_);
  std::vector<cplx> x(rhs.values().begin(), rhs.values().end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (grid_->is_boundary(i)) x[i] = 0.0;
  }
  const lapack_int info = LAPACKE_zgtsv(LAPACK_COL_MAJOR, n, 1, dl.data(), d.data(), du.data(), x.data(), n);
  if (info != 0) {
    throw LabError(ErrorKind::singular_operator, "tridiagonal factorization failed (info = " + std::to_string(info) + ")");
  }
  for (const auto& v : x) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw LabError(ErrorKind::singular_operator, "non-finite solution of the linear operator");
    }
  }
  return ComplexField(grid_, std::move(x));
}

LinearOperator LinearOperator::shifted(std::span<const cplx> shift) const {
  LinearOperator out(*this);
  for (std::size_t i = 0; i < out.diag_.size(); ++i) {
    if (!grid_->is_boundary(i)) out.diag_[i] += shift[i];
  }
  return out;
}

LinearOperator LinearOperator::affine(cplx s, cplx s0) const {
  LinearOperator out(*this);
  for (std::size_t i = 0; i < out.diag_.size(); ++i) {
    if (grid_->is_boundary(i)) continue;
    out.diag_[i] = s * out.diag_[i] + s0;
    if (i > 0) out.lower_[i - 1] *= s;
    if (i + 1 < out.diag_.size()) out.upper_[i] *= s;
  }
  return out;
}

ComplexField neg_laplacian(const ComplexField& f) {
  return assemble_operator(f.grid_ptr(), 0.0, 0.0).apply(f);
}

double smallest_eigenvalue(const Grid& grid, double tol, int max_iter) {
  // Work on the interior unknowns with the weighted-symmetric real operator.
  GridPtr shared(std::shared_ptr<const Grid>{}, &grid);
  const LinearOperator op = assemble_operator(shared, 0.0, 0.0);
  const std::size_t n = grid.size();

  std::vector<double> dl(n - 1), d(n), du(n - 1);
  for (std::size_t i = 0; i < n; ++i) d[i] = op.diag()[i].real();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    dl[i] = op.lower()[i].real();
    du[i] = op.upper()[i].real();
  }

  auto weighted_dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!grid.is_boundary(i)) s += grid.weight(i) * a[i] * b[i];
    }
    return s;
  };
  auto apply = [&](const std::vector<double>& v) {
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (grid.is_boundary(i)) continue;
      double s = d[i] * v[i];
      if (i > 0) s += dl[i - 1] * v[i - 1];
      if (i + 1 < n) s += du[i] * v[i + 1];
      out[i] = s;
    }
    return out;
  };

  std::vector<double> v(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!grid.is_boundary(i)) v[i] = 1.0;
  }
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    std::vector<double> dl_(dl), d_(d), du_(du), x(v);
    const lapack_int info =
        LAPACKE_dgtsv(LAPACK_COL_MAJOR, static_cast<lapack_int>(n), 1, dl_.data(), d_.data(), du_.data(), x.data(),
                      static_cast<lapack_int>(n));
    if (info != 0) throw LabError(ErrorKind::convergence_failure, "singular Laplacian in inverse iteration");
    const double norm = std::sqrt(weighted_dot(x, x));
    for (auto& e : x) e /= norm;
    const double next = weighted_dot(apply(x), x);
    v = std::move(x);
    if (it > 0 && std::abs(next - lambda) <= tol * std::abs(next)) return next;
    lambda = next;
  }
  throw LabError(ErrorKind::convergence_failure, "inverse power iteration did not converge");
}

// ---------------------------------------------------------------------------

void write_field_csv(std::ostream& os, const ComplexField& f) {
  os << "x,re,im\n" << std::setprecision(17);
  for (std::size_t i = 0; i < f.size(); ++i) {
    os << f.grid().node(i) << ',' << f[i].real() << ',' << f[i].imag() << '\n';
  }
}

void write_field_csv(const std::string& path, const ComplexField& f) {
  std::ofstream os(path);
  if (!os) throw LabError(ErrorKind::missing_artifacts, "cannot write " + path);
  write_field_csv(os, f);
}

std::vector<FieldSample> read_field_csv(std::istream& is) {
  std::vector<FieldSample> out;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.find_first_not_of("0123456789+-.eE, \t") != std::string::npos) continue;  // header
    }
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c)) {
      throw LabError(ErrorKind::config_error, "malformed field CSV line: " + line);
    }
    out.push_back({std::stod(a), cplx(std::stod(b), std::stod(c))});
  }
  return out;
}

std::vector<FieldSample> read_field_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw LabError(ErrorKind::missing_artifacts, "cannot read " + path);
  return read_field_csv(is);
}

ComplexField field_from_samples(const GridPtr& grid, std::span<const FieldSample> samples) {
  ComplexField out(grid);
  if (samples.size() < 2) return out;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double x = grid->node(i);
    if (x < samples.front().x || x > samples.back().x) continue;
    auto it = std::lower_bound(samples.begin(), samples.end(), x,
                               [](const FieldSample& s, double v) { return s.x < v; });
    if (it == samples.begin()) {
      out[i] = it->value;
      continue;
    }
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double t = (x - lo.x) / (hi.x - lo.x);
    out[i] = (1.0 - t) * lo.value + t * hi.value;
  }
  out.apply_dirichlet();
  return out;
}

}  // namespace nlslab
