#pragma once

// Truncated-pipe jet flow configuration and the outer bisection on the
// asymptote parameter b.
//
// Geometry: rectangle (-1,1) x (R-, R+). A fixed nozzle curve x = N(y),
// y in [R-, 0], carries the zero level of the stream function; the free
// interface continues from the junction (N(0), 0) up to the top edge, which
// is a homogeneous Neumann boundary (the interface endpoint slides along it).
// Wall data: u = -Q at x = -1, u = +1 at x = +1, so the positive phase fills
// the right channel; the bottom edge carries the piecewise linear profile
// joining those values with its zero at the nozzle foot N(R-). For each b the
// jump level is lambda(b) = (1/(1+b))^2 - (Q/(2-b))^2 and the bisection seeks
// the fixed point b* = f_Gamma(R+), the abscissa where the converged
// interface meets the top edge.

#include "fbfem/driver.hpp"
#include "fbfem/meshgen.hpp"

namespace fbfem {

inline double jet_lambda(double b, double inflow) {
  if (!(b > -1.0 && b < 1.0))
    throw std::runtime_error("jet_lambda: b must lie in (-1, 1)");
  double l = 1.0 / (1.0 + b);
  double r = inflow / (2.0 - b);
  return l * l - r * r;
}

struct JetSpec {
  std::function<double(double)> nozzle;  // N(y), y in [r_minus, 0]
  double inflow_value = 5.0;             // Q, magnitude of the negative wall
  double r_minus = -1.0;
  double r_plus = 2.0;
  std::function<double(Vec2)> bottom_g;       // optional custom bottom data
  std::function<double(double)> lambda_of_b;  // defaults to jet_lambda(b, Q)

  double nozzle_foot() const { return nozzle(r_minus); }

  // first example: straight nozzle N(y) = 0.5 |y| / R-
  static JetSpec example1(double q = 5.0) {
    JetSpec s;
    s.inflow_value = q;
    double rm = s.r_minus;
    s.nozzle = [rm](double y) { return 0.5 * std::abs(y) / rm; };
    return s;
  }

  // second example: blunt nozzle N(y) = 0.5 (|y| / |R-|)^(1/4)
  static JetSpec example2(double q = 1.0) {
    JetSpec s;
    s.inflow_value = q;
    double rm = s.r_minus;
    s.nozzle = [rm](double y) {
      return -0.5 * std::pow(std::abs(y / rm), 0.25);
    };
    return s;
  }

  // mirror-symmetric configuration: straight vertical nozzle, odd wall data
  // and an odd jump rule, whose bisection fixed point is exactly b = 0
  static JetSpec symmetric() {
    JetSpec s;
    s.inflow_value = 1.0;
    s.nozzle = [](double) { return 0.0; };
    s.bottom_g = [](Vec2 p) { return p.x; };
    s.lambda_of_b = [](double b) {
      double l = 1.0 / (1.0 - b);
      double r = 1.0 / (1.0 + b);
      return l * l - r * r;
    };
    return s;
  }
};

struct JetProblem {
  FreeBoundaryProblem problem;
  Mesh mesh;
  InterfaceCurve interface;  // moving part only (y >= 0)
};

namespace detail {

// Arc-length-uniform sampling of x = N(y) from y0 up to 0.
inline std::vector<Vec2> sample_nozzle(const std::function<double(double)>& N,
                                       double y0, double spacing) {
  int fine = 20000;
  std::vector<Vec2> f(fine + 1);
  std::vector<double> cum(fine + 1, 0.0);
  for (int i = 0; i <= fine; ++i) {
    double y = y0 + (0.0 - y0) * (double)i / fine;
    f[i] = {N(y), y};
    if (i) cum[i] = cum[i - 1] + norm(f[i] - f[i - 1]);
  }
  double len = cum[fine];
  int n = std::max(1, (int)std::ceil(len / spacing));
  std::vector<Vec2> out{f[0]};
  int j = 0;
  for (int k = 1; k < n; ++k) {
    double target = len * k / n;
    while (cum[j] < target) ++j;
    double t = (target - cum[j - 1]) / (cum[j] - cum[j - 1]);
    out.push_back(f[j - 1] + t * (f[j] - f[j - 1]));
  }
  out.push_back(f[fine]);
  return out;
}

}  // namespace detail

inline JetProblem jet_problem(const JetSpec& spec, double b, double h) {
  if (!(b > -1.0 && b < 1.0)) throw std::runtime_error("jet_problem: b out of range");
  double q = spec.inflow_value;
  double rm = spec.r_minus, rp = spec.r_plus;
  double foot = spec.nozzle_foot();
  double junction_x = spec.nozzle(0.0);

  // combined separating chain: nozzle from the bottom, then the straight
  // initial interface from the junction to the top edge
  std::vector<Vec2> chain = detail::sample_nozzle(spec.nozzle, rm, 0.95 * h);
  chain.front() = {foot, rm};
  chain.back() = {junction_x, 0.0};
  int m = std::max(2, (int)std::ceil(rp / (0.95 * h)));
  for (int i = 1; i <= m; ++i) chain.push_back({junction_x, rp * (double)i / m});

  auto pred = [rm, rp, foot](Vec2 p) {
    if (std::abs(p.y - rp) < 1e-12 && std::abs(p.x) < 1.0 - 1e-12)
      return Marker::Interior;  // Neumann top edge
    if (p.y < rm + 1e-12)
      return p.x > foot ? Marker::SigmaPlus : Marker::SigmaMinus;
    return p.x > 0.0 ? Marker::SigmaPlus : Marker::SigmaMinus;
  };
  auto mi = build_strip_mesh(-1.0, 1.0, rm, rp, h, chain, pred);

  JetProblem jp;
  jp.mesh = std::move(mi.mesh);

  // the moving interface is the chain suffix with y >= 0
  InterfaceCurve moving;
  for (int i = 0; i < mi.interface.size(); ++i) {
    int v = mi.interface.vertex_ids[i];
    if (jp.mesh.vertices[v].y >= -1e-12) moving.vertex_ids.push_back(v);
  }
  moving.closed = false;
  moving.normals = interface_vertex_normals(jp.mesh, moving);
  jp.interface = std::move(moving);

  std::function<double(Vec2)> bottom =
      spec.bottom_g ? spec.bottom_g : [q, foot](Vec2 p) {
        if (p.x < foot) return q * (p.x - foot) / (foot + 1.0);
        return (p.x - foot) / (1.0 - foot);
      };
  jp.problem.a_plus = constant_coefficient(1.0);
  jp.problem.a_minus = constant_coefficient(1.0);
  jp.problem.boundary_g = [q, rm, bottom](Vec2 p) {
    if (std::abs(p.x + 1.0) < 1e-12) return -q;
    if (std::abs(p.x - 1.0) < 1e-12) return 1.0;
    if (std::abs(p.y - rm) < 1e-12) return bottom(p);
    return 0.0;
  };
  double lam = spec.lambda_of_b ? spec.lambda_of_b(b) : jet_lambda(b, q);
  jp.problem.jump = JumpCondition::squared(constant_coefficient(1.0),
                                           constant_coefficient(1.0), lam);
  jp.problem.front = EndpointRule::pinned();          // junction (N(0), 0)
  jp.problem.back = EndpointRule::slide({1.0, 0.0});  // free endpoint on top
  auto onb = boundary_vertex_flags(jp.mesh);
  for (int v = 0; v < jp.mesh.num_vertices(); ++v)
    if (onb[v] && jp.mesh.boundary_markers[v] == Marker::Interior &&
        std::abs(jp.mesh.vertices[v].y - rp) < 1e-12)
      jp.problem.slides.push_back({v, {1.0, 0.0}});
  return jp;
}

struct JetSolveResult {
  double f_top = 0.0;  // abscissa of the interface on the top edge
  RunResult run;
};

inline JetSolveResult jet_solve_for_b(const JetSpec& spec, double b, double h,
                                      const SolverConfig& config) {
  JetProblem jp = jet_problem(spec, b, h);
  JetSolveResult out;
  out.run = run(jp.problem, jp.mesh, jp.interface, config);
  if (out.run.status == RunStatus::Diverged ||
      out.run.status == RunStatus::MaxIterations)
    throw std::runtime_error(std::string("jet_solve_for_b: inner run ") +
                             to_string(out.run.status));
  int top = out.run.interface.vertex_ids.back();
  out.f_top = out.run.mesh.vertices[top].x;
  return out;
}

struct BisectionResult {
  double b_star = 0.0;
  double f_top = 0.0;       // f_Gamma(R+) at b_star
  double residual = 0.0;    // |f_top - b_star|
  int evaluations = 0;
};

// Bisection for the fixed point of an arbitrary scalar map b -> f(b); the
// root of f(b) - b must change sign over [lo, hi].
inline BisectionResult bisect_fixed_point(const std::function<double(double)>& f,
                                          double lo, double hi, double b_tol,
                                          int max_iter = 60) {
  BisectionResult res;
  double flo = f(lo) - lo, fhi = f(hi) - hi;
  res.evaluations = 2;
  if (flo == 0.0) { res.b_star = lo; res.f_top = lo; return res; }
  if (fhi == 0.0) { res.b_star = hi; res.f_top = hi; return res; }
  if ((flo < 0) == (fhi < 0))
    throw std::runtime_error("bisection: no sign change of f(b) - b on the interval");
  double mid = 0.5 * (lo + hi), fmid = 0.0;
  for (int k = 0; k < max_iter && (hi - lo) > b_tol; ++k) {
    mid = 0.5 * (lo + hi);
    double fm = f(mid);
    res.evaluations += 1;
    fmid = fm - mid;
    if (fmid == 0.0) break;
    if ((fmid < 0) == (flo < 0)) { lo = mid; flo = fmid; }
    else hi = mid;
  }
  res.b_star = mid;
  res.f_top = fmid + mid;
  res.residual = std::abs(fmid);
  return res;
}

inline BisectionResult jet_bisection(const JetSpec& spec, double b_lo, double b_hi,
                                     double b_tol, double h,
                                     const SolverConfig& config) {
  auto f = [&](double b) { return jet_solve_for_b(spec, b, h, config).f_top; };
  return bisect_fixed_point(f, b_lo, b_hi, b_tol);
}

}  // namespace fbfem
