#include "geomcmp/models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "geomcmp/bounds.hpp"
#include "geomcmp/detail/rng.hpp"
#include "geomcmp/modelfn.hpp"

namespace geomcmp::models {

namespace {

double log_deriv_at_boundary(const WarpProfile& p) {
  // Boundary principal curvature with respect to the inner normal. The
  // collar boundary sits at t = 0 with the inner normal pointing up the
  // coordinate, which flips the sign relative to the disk case.
  if (p.kind == ProfileKind::kDisk) {
    return p.dphi(p.R) / p.phi(p.R);
  }
  return -p.dphi(0.0) / p.phi(0.0);
}

constexpr int kSampleGrid = 512;

// ---------------------------------------------------------------------------
// Dense Hermite table: value/derivative samples on a uniform grid, evaluated
// by cubic Hermite interpolation. Backs ODE-generated profiles.

struct HermiteTable {
  double r0 = 0.0, h = 1.0;
  std::vector<double> y, dy;

  [[nodiscard]] double value(double r) const { return eval(r).first; }
  [[nodiscard]] double deriv(double r) const { return eval(r).second; }

  [[nodiscard]] std::pair<double, double> eval(double r) const {
    const auto n = y.size();
    auto i = static_cast<std::ptrdiff_t>(std::floor((r - r0) / h));
    i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 2);
    const double u = (r - (r0 + i * h)) / h;
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
    const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    const double val =
        h00 * y[i] + h10 * h * dy[i] + h01 * y[i + 1] + h11 * h * dy[i + 1];
    const double g00 = (6 * u2 - 6 * u) / h, g10 = 3 * u2 - 4 * u + 1;
    const double g01 = (-6 * u2 + 6 * u) / h, g11 = 3 * u2 - 2 * u;
    const double der =
        g00 * y[i] + g10 * dy[i] + g01 * y[i + 1] + g11 * dy[i + 1];
    return {val, der};
  }
};

// ---------------------------------------------------------------------------
// Not-a-knot cubic spline (second-derivative form). The end conditions make
// the third derivative continuous across the first and last interior knots,
// so a single cubic is reproduced exactly.

class CubicSpline {
 public:
  CubicSpline(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)), m_(x_.size(), 0.0) {
    const std::size_t n = x_.size();
    if (n < 4) throw ConfigError("spline needs at least 4 samples");
    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];

    // Tridiagonal system for m_1 .. m_{n-2}; m_0 and m_{n-1} follow from
    // the not-a-knot relations
    //   h1 m0 - (h0 + h1) m1 + h0 m2 = 0,
    //   h_{n-2} m_{n-3} - (h_{n-3} + h_{n-2}) m_{n-2} + h_{n-3} m_{n-1} = 0.
    const std::size_t nu = n - 2;  // unknowns m_1 .. m_{n-2}
    std::vector<double> a(nu, 0.0), d(nu, 0.0), c(nu, 0.0), rhs(nu, 0.0);
    auto slope = [&](std::size_t i) { return (y_[i + 1] - y_[i]) / h[i]; };
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const std::size_t j = i - 1;
      a[j] = h[i - 1] / 6.0;
      d[j] = (h[i - 1] + h[i]) / 3.0;
      c[j] = h[i] / 6.0;
      rhs[j] = slope(i) - slope(i - 1);
    }
    // Fold the end relations into the first and last equations.
    // m0 = ((h0 + h1) m1 - h0 m2) / h1
    d[0] += a[0] * (h[0] + h[1]) / h[1];
    c[0] += a[0] * (-h[0] / h[1]);
    a[0] = 0.0;
    // m_{n-1} = ((h_{n-3} + h_{n-2}) m_{n-2} - h_{n-2} m_{n-3}) / h_{n-3}
    const std::size_t L = nu - 1;
    const double hm = h[n - 2], hp = h[n - 3];
    d[L] += c[L] * (hp + hm) / hp;
    a[L] += c[L] * (-hm / hp);
    c[L] = 0.0;

    // Thomas elimination.
    for (std::size_t j = 1; j < nu; ++j) {
      const double w = a[j] / d[j - 1];
      d[j] -= w * c[j - 1];
      rhs[j] -= w * rhs[j - 1];
    }
    m_[nu] = rhs[nu - 1] / d[nu - 1];
    for (std::size_t j = nu - 1; j >= 1; --j) {
      m_[j] = (rhs[j - 1] - c[j - 1] * m_[j + 1]) / d[j - 1];
    }
    m_[0] = ((h[0] + h[1]) * m_[1] - h[0] * m_[2]) / h[1];
    m_[n - 1] = ((hp + hm) * m_[n - 2] - hm * m_[n - 3]) / hp;
  }

  [[nodiscard]] double value(double r) const {
    const std::size_t i = interval(r);
    const double h = x_[i + 1] - x_[i];
    const double A = x_[i + 1] - r, B = r - x_[i];
    return m_[i] * A * A * A / (6 * h) + m_[i + 1] * B * B * B / (6 * h) +
           (y_[i] / h - m_[i] * h / 6) * A + (y_[i + 1] / h - m_[i + 1] * h / 6) * B;
  }

  [[nodiscard]] double deriv(double r) const {
    const std::size_t i = interval(r);
    const double h = x_[i + 1] - x_[i];
    const double A = x_[i + 1] - r, B = r - x_[i];
    return -m_[i] * A * A / (2 * h) + m_[i + 1] * B * B / (2 * h) +
           (y_[i + 1] - y_[i]) / h - (m_[i + 1] - m_[i]) * h / 6;
  }

  [[nodiscard]] double deriv2(double r) const {
    const std::size_t i = interval(r);
    const double h = x_[i + 1] - x_[i];
    return (m_[i] * (x_[i + 1] - r) + m_[i + 1] * (r - x_[i])) / h;
  }

 private:
  [[nodiscard]] std::size_t interval(double r) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), r);
    if (it == x_.begin()) return 0;
    std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
  }

  std::vector<double> x_, y_, m_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Profile constructors.

WarpProfile model_disk(int n, double k, double R) {
  if (n < 2) throw DomainError("model_disk requires dimension n >= 2");
  if (!(R > 0.0) || R >= modelfn::sn_first_zero(k)) {
    throw DomainError("model_disk radius must lie inside the model domain");
  }
  WarpProfile p;
  p.kind = ProfileKind::kDisk;
  p.n = n;
  p.R = R;
  p.phi = [k](double r) { return modelfn::sn(k, r); };
  p.dphi = [k](double r) { return modelfn::cs(k, r); };
  p.ddphi = [k](double r) { return -k * modelfn::sn(k, r); };
  return p;
}

WarpProfile cusp_collar(int n, double length) {
  if (n < 2) throw DomainError("cusp_collar requires dimension n >= 2");
  if (!(length > 0.0)) throw DomainError("cusp_collar requires length > 0");
  WarpProfile p;
  p.kind = ProfileKind::kCollar;
  p.n = n;
  p.R = length;
  p.phi = [](double t) { return std::exp(-t); };
  p.dphi = [](double t) { return -std::exp(-t); };
  p.ddphi = [](double t) { return std::exp(-t); };
  return p;
}

WarpProfile analytic_profile(ProfileKind kind, int n, double R,
                             std::function<double(double)> phi,
                             std::function<double(double)> dphi,
                             std::function<double(double)> ddphi) {
  if (n < 2) throw DomainError("profile requires dimension n >= 2");
  if (!(R > 0.0)) throw DomainError("profile requires R > 0");
  WarpProfile p;
  p.kind = kind;
  p.n = n;
  p.R = R;
  p.phi = std::move(phi);
  p.dphi = std::move(dphi);
  p.ddphi = std::move(ddphi);
  validate_profile(p);
  return p;
}

namespace {

struct BumpParams {
  double amp = 0.0;
  double offset = 0.0;
  std::array<double, 3> c{}, w{}, ph{};

  [[nodiscard]] double q(double r) const {
    double v = offset;
    for (int j = 0; j < 3; ++j) v += c[j] * std::cos(w[j] * r + ph[j]);
    return amp * v;  // >= 0: offset majorizes the oscillation
  }
};

HermiteTable integrate_warp(double k, const BumpParams& bump, double R,
                            std::size_t steps) {
  HermiteTable t;
  t.r0 = 0.0;
  t.h = R / static_cast<double>(steps);
  t.y.reserve(steps + 1);
  t.dy.reserve(steps + 1);
  double phi = 0.0, psi = 1.0;
  t.y.push_back(phi);
  t.dy.push_back(psi);
  auto f = [&](double r, double y, double dy, double& ky, double& kdy) {
    ky = dy;
    kdy = -(k + bump.q(r)) * y;
  };
  for (std::size_t i = 0; i < steps; ++i) {
    const double r = static_cast<double>(i) * t.h;
    double k1y, k1d, k2y, k2d, k3y, k3d, k4y, k4d;
    f(r, phi, psi, k1y, k1d);
    f(r + 0.5 * t.h, phi + 0.5 * t.h * k1y, psi + 0.5 * t.h * k1d, k2y, k2d);
    f(r + 0.5 * t.h, phi + 0.5 * t.h * k2y, psi + 0.5 * t.h * k2d, k3y, k3d);
    f(r + t.h, phi + t.h * k3y, psi + t.h * k3d, k4y, k4d);
    phi += t.h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
    psi += t.h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
    t.y.push_back(phi);
    t.dy.push_back(psi);
  }
  return t;
}

}  // namespace

WarpProfile random_admissible_disk(int n, double k, double R,
                                   std::uint64_t seed, double amp) {
  if (n < 2) throw DomainError("profile requires dimension n >= 2");
  if (!(R > 0.0)) throw DomainError("profile requires R > 0");
  detail::Rng rng(seed);
  auto bump = std::make_shared<BumpParams>();
  bump->amp = amp;
  double off = 0.0;
  for (int j = 0; j < 3; ++j) {
    bump->c[j] = rng.uniform(-0.5, 0.5);
    bump->w[j] = rng.uniform(0.5, 3.0) * M_PI / R;
    bump->ph[j] = rng.uniform(0.0, 2.0 * M_PI);
    off += std::fabs(bump->c[j]);
  }
  bump->offset = off;

  constexpr std::size_t kSteps = 4096;
  auto fine =
      std::make_shared<HermiteTable>(integrate_warp(k, *bump, R, kSteps));
  const HermiteTable coarse = integrate_warp(k, *bump, R, kSteps / 2);
  double err = 0.0;
  for (std::size_t i = 0; i < coarse.y.size(); ++i) {
    err = std::max(err, std::fabs(coarse.y[i] - fine->y[2 * i]));
    err = std::max(err, std::fabs(coarse.dy[i] - fine->dy[2 * i]));
  }

  WarpProfile p;
  p.kind = ProfileKind::kDisk;
  p.n = n;
  p.R = R;
  p.deriv_error = 16.0 * err;  // coarse-vs-fine gap, inflated to be safe
  p.phi = [fine](double r) { return fine->value(r); };
  p.dphi = [fine](double r) { return fine->deriv(r); };
  p.ddphi = [fine, bump, k](double r) {
    return -(k + bump->q(r)) * fine->value(r);
  };
  validate_profile(p);
  return p;
}

WarpProfile profile_from_csv(int n, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open profile file: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError("profile file is empty: " + path);
  }
  auto strip = [](std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(),
                           [](unsigned char c) { return std::isspace(c); }),
            s.end());
    return s;
  };
  if (strip(line) != "r,phi") {
    throw ConfigError("profile file must start with header 'r,phi': " + path);
  }
  std::vector<double> r, phi;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (strip(line).empty()) continue;
    std::istringstream row(line);
    std::string a, b;
    if (!std::getline(row, a, ',') || !std::getline(row, b)) {
      throw ConfigError("malformed profile row at line " +
                        std::to_string(lineno) + " of " + path);
    }
    try {
      r.push_back(std::stod(a));
      phi.push_back(std::stod(b));
    } catch (const std::exception&) {
      throw ConfigError("non-numeric profile row at line " +
                        std::to_string(lineno) + " of " + path);
    }
    if (r.size() >= 2 && r[r.size() - 2] >= r.back()) {
      throw ConfigError("profile radii must be strictly increasing: " + path);
    }
  }
  if (r.size() < 100) {
    throw ConfigError("profile needs at least 100 rows: " + path);
  }
  if (std::fabs(r.front()) > 1e-12) {
    throw ConfigError("profile must start at r = 0: " + path);
  }

  auto spline = std::make_shared<CubicSpline>(r, phi);
  // Error estimate: refit on every other sample and compare the second
  // derivative at the skipped knots.
  std::vector<double> r2, p2;
  for (std::size_t i = 0; i < r.size(); i += 2) {
    r2.push_back(r[i]);
    p2.push_back(phi[i]);
  }
  const CubicSpline half(r2, p2);
  double err = 0.0;
  for (std::size_t i = 1; i < r.size(); i += 2) {
    err = std::max(err, std::fabs(spline->deriv2(r[i]) - half.deriv2(r[i])));
  }

  WarpProfile p;
  p.kind = ProfileKind::kDisk;
  p.n = n;
  p.R = r.back();
  p.deriv_error = err;
  p.phi = [spline](double x) { return spline->value(x); };
  p.dphi = [spline](double x) { return spline->deriv(x); };
  p.ddphi = [spline](double x) { return spline->deriv2(x); };
  validate_profile(p);
  return p;
}

void validate_profile(const WarpProfile& p) {
  if (!p.phi || !p.dphi || !p.ddphi) {
    throw DomainError("profile is missing derivative closures");
  }
  if (p.kind == ProfileKind::kDisk) {
    if (std::fabs(p.phi(0.0)) > 1e-12) {
      throw DomainError("disk profile must vanish at r = 0");
    }
    if (std::fabs(p.dphi(0.0) - 1.0) > 1e-10 + p.deriv_error) {
      throw DomainError("disk profile must have unit slope at r = 0");
    }
  } else if (!(p.phi(0.0) > 0.0)) {
    throw DomainError("collar profile must be positive at t = 0");
  }
  for (int j = 1; j <= kSampleGrid; ++j) {
    const double r = p.R * j / kSampleGrid;
    if (!(p.phi(r) > 0.0)) {
      throw DomainError("warp profile must stay positive up to the boundary");
    }
  }
}

// ---------------------------------------------------------------------------
// Geometry of a profile.

double ricci_radial(const WarpProfile& p, double r) {
  if (!(r > 0.0) && p.kind == ProfileKind::kDisk) {
    throw DomainError("radial Ricci curvature of a disk is singular at r = 0");
  }
  if (r < 0.0 || r > p.R) throw DomainError("radius outside the profile");
  return -(p.n - 1) * p.ddphi(r) / p.phi(r);
}

double boundary_mean_curvature(const WarpProfile& p) {
  return (p.n - 1) * log_deriv_at_boundary(p);
}

double laplacian_rho_profile(const WarpProfile& p, double r) {
  if (!(r > 0.0) || r > p.R) {
    throw DomainError("laplacian_rho_profile requires r in (0, R]");
  }
  const double mu = p.dphi(r) / p.phi(r);
  return (p.kind == ProfileKind::kDisk) ? -(p.n - 1) * mu : (p.n - 1) * mu;
}

double bochner_residual(const WarpProfile& p, double r) {
  if (!(r > 0.0) || !(r < p.R)) {
    throw DomainError("bochner_residual requires r in (0, R)");
  }
  double step = std::max(1e-5 * p.R, 1e-7);
  step = std::min({step, 0.5 * r, p.R - r});
  auto lap = [&](double x) { return (p.n - 1) * p.dphi(x) / p.phi(x); };
  const double dlap = (lap(r + step) - lap(r - step)) / (2.0 * step);
  const double mu = p.dphi(r) / p.phi(r);
  const double hess2 = (p.n - 1) * mu * mu;
  return dlap + hess2 + ricci_radial(p, r);
}

double kahler_model_laplacian(const ComplexModelDisk& d, double r) {
  if (d.n < 1) throw DomainError("complex dimension must be >= 1");
  if (!(r > 0.0) || r > d.R) {
    throw DomainError("kahler_model_laplacian requires r in (0, R]");
  }
  return bounds::model_KH(d.n, d.k, r);
}

// ---------------------------------------------------------------------------
// Distance bound and rigidity.

double rho_max_for_profile(const WarpProfile& p, double k) {
  const double ii = log_deriv_at_boundary(p);
  if (k < 0.0 && ii <= std::sqrt(-k)) {
    throw InfimumNotAttained(
        "boundary curvature does not exceed sqrt(-k); the distance to the "
        "boundary is unbounded in this family");
  }
  if (k == 0.0 && ii <= 0.0) {
    throw InfimumNotAttained(
        "boundary curvature is not positive; the distance to the boundary "
        "is unbounded for k = 0");
  }
  return modelfn::arccot(k, ii);
}

const char* to_string(RigidityVerdict v) {
  switch (v) {
    case RigidityVerdict::kRigid:
      return "rigid";
    case RigidityVerdict::kNonRigid:
      return "non-rigid";
    default:
      return "inconsistent";
  }
}

RigidityReport rigidity_diagnostic(const WarpProfile& p, double k,
                                   double tol) {
  if (p.kind != ProfileKind::kDisk) {
    throw DomainError("the rigidity diagnostic applies to disk profiles");
  }
  validate_profile(p);

  // phi' > 0 keeps radial segments minimizing, which the identification
  // rho = R - r relies on.
  for (int j = 1; j <= kSampleGrid; ++j) {
    const double r = p.R * j / kSampleGrid;
    if (!(p.dphi(r) > 0.0)) {
      throw DomainError(
          "profile slope is not positive on (0, R]; rho = R - r fails");
    }
  }
  const double floor = (p.n - 1) * k;
  for (int j = 1; j <= kSampleGrid; ++j) {
    const double r = p.R * j / kSampleGrid;
    const double slack =
        1e-9 + 2.0 * (p.n - 1) * p.deriv_error / std::max(p.phi(r), 1e-12);
    if (ricci_radial(p, r) < floor - slack) {
      throw HypothesisViolated(
          "sampled radial Ricci curvature drops below (n-1)k");
    }
  }

  RigidityReport rep;
  rep.k = k;
  const double ii = log_deriv_at_boundary(p);
  // Mean-curvature route: the radius whose model sphere has the boundary's
  // mean curvature. Per-direction route: the inradius bound fed by the
  // principal curvature. They coincide for rotationally symmetric disks and
  // are computed through separate entry points as a cross-check.
  rep.h = bounds::to_model_radius({p.n, k, ii,
                                   bounds::Normalization::kPerDirection})
              .value;
  rep.h_per_direction = bounds::rho_max_real(p.n, k, ii);
  rep.deficit = rep.h - p.R;

  double gap = 0.0;
  for (int j = 0; j <= kSampleGrid; ++j) {
    const double r = p.R * j / kSampleGrid;
    gap = std::max(gap, std::fabs(p.phi(r) - modelfn::sn(k, r)));
  }
  rep.metric_gap = gap;

  const double tol_eff = tol + 10.0 * p.deriv_error;
  if (rep.deficit > tol_eff) {
    rep.verdict = RigidityVerdict::kNonRigid;
  } else if (rep.metric_gap <= tol_eff) {
    rep.verdict = RigidityVerdict::kRigid;
  } else {
    rep.verdict = RigidityVerdict::kInconsistent;
  }
  return rep;
}

}  // namespace geomcmp::models
