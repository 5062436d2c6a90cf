#pragma once

// Plasma confinement configuration: the minus region (plasma) solves the
// eigen-constrained problem -Lap(u) = beta u with unit L2 normalization and
// u <= 0, the plus region (vacuum) is harmonic with u = gamma on the outer
// wall, and the closed free boundary carries the jump condition
// (d_eta u+)^2 - (d_eta u-)^2 = lambda. Also provides an independent radial
// oracle for beta on the unit disk, built on a 1D finite-volume eigensolve
// (no shared code with the 2D FEM path).

#include "fbfem/driver.hpp"
#include "fbfem/meshgen.hpp"

namespace fbfem {

struct PlasmaSpec {
  enum class Domain { Disk, CutDisk } domain = Domain::Disk;
  double gamma = 1.0;
  double lambda = 3.0;
  // initial interface: ellipse (center, semi axes); a circle when ax == ay
  Vec2 init_center{0.2, 0.2};
  double init_ax = 1.0 / 3.0;
  double init_ay = 0.5;

  static PlasmaSpec disk_example() { return {}; }

  static PlasmaSpec cut_example() {
    PlasmaSpec s;
    s.domain = Domain::CutDisk;
    s.lambda = 4.0;  // the source text states 5^2 - 1^2 = 4; kept as written
    s.init_center = {0.0, 0.0};
    s.init_ax = s.init_ay = 1.0 / 3.0;
    return s;
  }
};

struct PlasmaProblem {
  FreeBoundaryProblem problem;
  Mesh mesh;
  InterfaceCurve interface;
};

inline PlasmaProblem plasma_problem(const PlasmaSpec& spec, double h) {
  if (!(spec.gamma > 0.0 && spec.lambda > 0.0))
    throw std::runtime_error("plasma_problem: gamma and lambda must be positive");
  std::vector<Vec2> curve;
  double per = M_PI * (3.0 * (spec.init_ax + spec.init_ay) -
                       std::sqrt((3 * spec.init_ax + spec.init_ay) *
                                 (spec.init_ax + 3 * spec.init_ay)));
  int n = std::max(16, (int)std::ceil(per / (0.8 * h)));
  for (int i = 0; i < n; ++i) {
    double t = 2 * M_PI * i / n;
    curve.push_back({spec.init_center.x + spec.init_ax * std::cos(t),
                     spec.init_center.y + spec.init_ay * std::sin(t)});
  }
  DiskCutouts cuts;
  if (spec.domain == PlasmaSpec::Domain::CutDisk) {
    cuts.keep_above_y = -2.0 / 3.0;
    cuts.remove_disks = {{{5.0 / 3.0, 0.0}, 1.0}};
  }
  auto mi = build_disk_mesh({0, 0}, 1.0, h, curve, true, cuts);

  PlasmaProblem pp;
  pp.mesh = std::move(mi.mesh);
  pp.interface = std::move(mi.interface);
  pp.problem.a_plus = constant_coefficient(1.0);
  pp.problem.a_minus = constant_coefficient(1.0);
  double g = spec.gamma;
  pp.problem.boundary_g = [g](Vec2) { return g; };
  pp.problem.jump = JumpCondition::squared(constant_coefficient(1.0),
                                           constant_coefficient(1.0), spec.lambda);
  pp.problem.minus_eigen = true;
  return pp;
}

struct PlasmaRunResult {
  double beta = 0.0;
  RunResult run;
};

inline PlasmaRunResult plasma_run(const PlasmaSpec& spec, double h,
                                  const SolverConfig& config,
                                  const StepCallback& callback = {}) {
  PlasmaProblem pp = plasma_problem(spec, h);
  double mesh_area = 0.0;
  for (int t = 0; t < pp.mesh.num_triangles(); ++t)
    mesh_area += triangle_area(pp.mesh, t);
  double mean_tri = mesh_area / pp.mesh.num_triangles();

  auto guard = [&](const IterationRecord& rec, const Mesh& m,
                   const InterfaceCurve& ic, const ScalarField& u) {
    std::vector<Vec2> poly;
    for (int v : ic.vertex_ids) poly.push_back(m.vertices[v]);
    if (std::abs(polygon_area(poly)) < 10.0 * mean_tri)
      throw std::runtime_error("plasma_run: interface collapsed");
    if (callback) callback(rec, m, ic, u);
  };
  PlasmaRunResult out;
  out.run = run(pp.problem, pp.mesh, pp.interface, config, guard);
  if (!out.run.beta.has_value())
    throw std::runtime_error("plasma_run: no eigenvalue recorded");
  out.beta = *out.run.beta;
  return out;
}

struct RadialOracleResult {
  double R_star = 0.0;
  double beta_star = 0.0;
};

namespace detail {

// Smallest eigenpair of the radial Dirichlet problem on a disk of radius R:
// finite volumes on N cells, inverse iteration with a Thomas solve. Returns
// {beta, |u'(R)|} with u normalized to unit L2 mass over the 2D disk.
inline std::pair<double, double> radial_disk_eig(double R, int N) {
  double dr = R / N;
  // unknowns u_0..u_{N-1} (u_N = 0); K tridiagonal, M diagonal
  std::vector<double> kd(N), kl(N, 0.0), md(N);
  for (int i = 0; i < N; ++i) {
    double rm = (i - 0.5) * dr, rp = (i + 0.5) * dr;
    if (i == 0) {
      kd[i] = rp / dr;
      md[i] = dr * dr / 8.0;
    } else {
      kd[i] = (rm + rp) / dr;
      kl[i] = -rm / dr;  // coupling to i-1
      md[i] = ((double)i * dr) * dr;
    }
  }
  std::vector<double> u(N, 1.0), rhs(N), c(N), d(N);
  double beta = 0.0;
  for (int it = 0; it < 200; ++it) {
    for (int i = 0; i < N; ++i) rhs[i] = md[i] * u[i];
    // Thomas solve K x = rhs (K symmetric: upper diag at row i is kl[i+1])
    double denom = kd[0];
    c[0] = (N > 1 ? kl[1] / denom : 0.0);
    d[0] = rhs[0] / denom;
    for (int i = 1; i < N; ++i) {
      denom = kd[i] - kl[i] * c[i - 1];
      c[i] = (i + 1 < N ? kl[i + 1] / denom : 0.0);
      d[i] = (rhs[i] - kl[i] * d[i - 1]) / denom;
    }
    std::vector<double> x(N);
    x[N - 1] = d[N - 1];
    for (int i = N - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
    // normalize in the M norm and take the Rayleigh quotient
    double xmx = 0.0;
    for (int i = 0; i < N; ++i) xmx += x[i] * md[i] * x[i];
    double s = 1.0 / std::sqrt(xmx);
    for (int i = 0; i < N; ++i) x[i] *= s;
    double xkx = 0.0;
    for (int i = 0; i < N; ++i) {
      xkx += kd[i] * x[i] * x[i];
      if (i > 0) xkx += 2.0 * kl[i] * x[i] * x[i - 1];
    }
    double beta_new = xkx;  // x' M x = 1
    bool done = it > 0 && std::abs(beta_new - beta) <= 1e-14 * beta_new;
    beta = beta_new;
    u = std::move(x);
    if (done) break;
  }
  // unit 2D mass: 2 pi u' M u = 1
  double scale = 1.0 / std::sqrt(2.0 * M_PI);
  double slope = std::abs((u[N - 2] - 4.0 * u[N - 1]) / (2.0 * dr)) * scale;
  return {beta, slope};
}

}  // namespace detail

// Reduced radial model on the unit disk: plasma occupies a concentric disk of
// radius R with the smallest radial Dirichlet eigenpair, the vacuum annulus
// is u = gamma ln(r/R)/ln(1/R), and R solves the jump equation
// (gamma/(R ln(1/R)))^2 - u'(R)^2 = lambda.
inline RadialOracleResult radial_plasma_oracle(double gamma, double lambda,
                                               int resolution = 2000) {
  if (!(gamma > 0.0 && lambda > 0.0))
    throw std::runtime_error("radial_plasma_oracle: gamma, lambda must be positive");
  auto F = [&](double R) {
    auto [beta, slope] = detail::radial_disk_eig(R, resolution);
    double vac = gamma / (R * std::log(1.0 / R));
    return vac * vac - slope * slope - lambda;
  };
  double lo = 0.0, hi = 0.0, flo = 0.0;
  bool bracketed = false;
  double prev_r = 0.05, prev_f = F(prev_r);
  for (int k = 1; k <= 90 && !bracketed; ++k) {
    double r = 0.05 + 0.9 * k / 90.0;
    double f = F(r);
    if ((f < 0) != (prev_f < 0)) {
      lo = prev_r;
      hi = r;
      flo = prev_f;
      bracketed = true;
    }
    prev_r = r;
    prev_f = f;
  }
  if (!bracketed)
    throw std::runtime_error("radial_plasma_oracle: no root of the jump equation in (0,1)");
  for (int k = 0; k < 60; ++k) {
    double mid = 0.5 * (lo + hi);
    double fm = F(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  RadialOracleResult res;
  res.R_star = 0.5 * (lo + hi);
  res.beta_star = detail::radial_disk_eig(res.R_star, resolution).first;
  return res;
}

}  // namespace fbfem
