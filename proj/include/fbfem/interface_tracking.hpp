#pragma once

// Jump residual on the interface and the damped normal-direction interface
// displacement. sigma_i = a1(x_i) (alpha_i^+)^2 - a2(x_i) (alpha_i^-)^2 -
// lambda(x_i); positive sigma moves a vertex along the interface normal
// (outward from the plus region), which enlarges the plus subdomain and
// lowers its flux. tau scales the step, either fixed or capped so the largest
// displacement stays a fraction of the shortest interface edge.

#include <functional>

#include "fbfem/flux_recovery.hpp"

namespace fbfem {

struct JumpCondition {
  CoefficientFn a_plus;
  CoefficientFn a_minus;
  std::function<double(Vec2)> lambda;
  bool lambda_squared = false;  // experimental variant using lambda^2
  // optional generalized form phi(alpha+) - psi(alpha-) = lambda(x)
  std::function<double(double)> phi;
  std::function<double(double)> psi;

  static JumpCondition squared(CoefficientFn a1, CoefficientFn a2, double lam) {
    JumpCondition jc;
    jc.a_plus = std::move(a1);
    jc.a_minus = std::move(a2);
    jc.lambda = [lam](Vec2) { return lam; };
    return jc;
  }

  static JumpCondition generalized(std::function<double(double)> phi_fn,
                                   std::function<double(double)> psi_fn,
                                   std::function<double(Vec2)> lam) {
    JumpCondition jc;
    jc.a_plus = constant_coefficient(1.0);
    jc.a_minus = constant_coefficient(1.0);
    jc.lambda = std::move(lam);
    jc.phi = std::move(phi_fn);
    jc.psi = std::move(psi_fn);
    jc.validate_monotone();
    return jc;
  }

  bool is_generalized() const { return (bool)phi; }

  // phi and psi must be increasing; checked by sampling.
  void validate_monotone() const {
    if (!phi) return;
    for (const auto& f : {phi, psi}) {
      double prev = f(-10.0);
      for (int k = 1; k <= 40; ++k) {
        double x = -10.0 + 0.5 * k;
        double v = f(x);
        if (v < prev - 1e-12)
          throw std::runtime_error("JumpCondition: phi/psi not monotone increasing");
        prev = v;
      }
    }
  }
};

struct SigmaTrace {
  std::vector<double> values;
  double inf_norm = 0.0;

  static SigmaTrace from_values(std::vector<double> v) {
    SigmaTrace s;
    s.values = std::move(v);
    for (double x : s.values) s.inf_norm = std::max(s.inf_norm, std::abs(x));
    return s;
  }
};

inline SigmaTrace compute_sigma(const InterfaceTrace& alpha_plus,
                                const InterfaceTrace& alpha_minus,
                                const JumpCondition& jump,
                                const std::vector<Vec2>& points) {
  if (alpha_plus.size() != alpha_minus.size() || alpha_plus.size() != points.size())
    throw std::runtime_error("compute_sigma: trace length mismatch");
  std::vector<double> sig(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    double lam = jump.lambda(points[i]);
    if (jump.lambda_squared) lam = lam * lam;
    if (jump.is_generalized())
      sig[i] = jump.phi(alpha_plus[i]) - jump.psi(alpha_minus[i]) - lam;
    else
      sig[i] = jump.a_plus(points[i]) * alpha_plus[i] * alpha_plus[i] -
               jump.a_minus(points[i]) * alpha_minus[i] * alpha_minus[i] - lam;
  }
  return SigmaTrace::from_values(std::move(sig));
}

struct TauPolicy {
  enum class Kind { Fixed, Capped } kind = Kind::Capped;
  double tau = 1e-4;           // fixed value
  double cap_fraction = 0.2;   // capped: max displacement per step
  double tau_max = 0.01;       // capped: user ceiling

  static TauPolicy fixed(double t) { return {Kind::Fixed, t, 0.2, t}; }
  static TauPolicy capped(double cap = 0.2, double tmax = 0.01) {
    return {Kind::Capped, 1e-4, cap, tmax};
  }
};

// Per-endpoint constraint for open interfaces: a pinned endpoint never moves
// (boundary junction); a sliding endpoint keeps only the displacement
// component along `dir` (free boundary ending on a Neumann edge).
struct EndpointRule {
  enum class Kind { Pinned, Slide } kind = Kind::Pinned;
  Vec2 dir{1.0, 0.0};

  static EndpointRule pinned() { return {Kind::Pinned, {0, 0}}; }
  static EndpointRule slide(Vec2 d) { return {Kind::Slide, normalized(d)}; }
};

inline double min_interface_edge(const Mesh& m, const InterfaceCurve& ic) {
  double mn = std::numeric_limits<double>::max();
  for (int e = 0; e < ic.num_edges(); ++e) {
    auto [a, b] = ic.edge(e);
    mn = std::min(mn, norm(m.vertices[b] - m.vertices[a]));
  }
  return mn;
}

// Movable sup norm: sigma at pinned endpoints does not drive displacement, so
// it does not throttle the step size. `flux_scale`, when positive, is
// max_i (a1|alpha_i^+| + a2|alpha_i^-|) and bounds the sensitivity of sigma
// to a sawtooth interface perturbation of wavenumber pi/min_edge; the step
// then also respects the linearized stability ceiling
// tau < theta * min_edge / (pi * flux_scale).
inline double select_tau(const SigmaTrace& sigma, const Mesh& m,
                         const InterfaceCurve& ic, const TauPolicy& policy,
                         const EndpointRule& front = EndpointRule::pinned(),
                         const EndpointRule& back = EndpointRule::pinned(),
                         double flux_scale = 0.0) {
  if (policy.kind == TauPolicy::Kind::Fixed) return policy.tau;
  double smax = 0.0;
  for (size_t i = 0; i < sigma.values.size(); ++i) {
    bool pinned_end =
        !ic.closed &&
        ((i == 0 && front.kind == EndpointRule::Kind::Pinned) ||
         (i + 1 == sigma.values.size() && back.kind == EndpointRule::Kind::Pinned));
    if (!pinned_end) smax = std::max(smax, std::abs(sigma.values[i]));
  }
  double edge = min_interface_edge(m, ic);
  double tau = policy.tau_max;
  if (flux_scale > 0.0) tau = std::min(tau, 0.5 * edge / (M_PI * flux_scale));
  if (smax == 0.0) return tau;
  return std::min(tau, policy.cap_fraction * edge / smax);
}

// displacement_i = tau sigma_i eta_i, with endpoint rules applied for open
// curves. Throws if a displacement would exceed a hard safety fraction of the
// shortest interface edge (select_tau misuse).
inline std::vector<Vec2> advance_interface(const Mesh& m, const InterfaceCurve& ic,
                                           const SigmaTrace& sigma, double tau,
                                           const EndpointRule& front = EndpointRule::pinned(),
                                           const EndpointRule& back = EndpointRule::pinned()) {
  if ((int)sigma.values.size() != ic.size())
    throw std::runtime_error("advance_interface: sigma/interface length mismatch");
  if ((int)ic.normals.size() != ic.size())
    throw std::runtime_error("advance_interface: interface normals missing");
  std::vector<Vec2> disp(ic.size());
  for (int i = 0; i < ic.size(); ++i) disp[i] = tau * sigma.values[i] * ic.normals[i];
  if (!ic.closed) {
    auto apply_rule = [](Vec2 d, const EndpointRule& r) {
      if (r.kind == EndpointRule::Kind::Pinned) return Vec2{0.0, 0.0};
      return dot(d, r.dir) * r.dir;
    };
    disp.front() = apply_rule(disp.front(), front);
    disp.back() = apply_rule(disp.back(), back);
  }
  double cap = 0.45 * min_interface_edge(m, ic);
  for (const Vec2& d : disp)
    if (norm(d) > cap)
      throw std::runtime_error(
          "advance_interface: displacement exceeds the safety cap; tau too large");
  return disp;
}

}  // namespace fbfem
