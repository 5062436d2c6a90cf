#pragma once

// Outer free-boundary iteration: solve both subdomain problems, recover the
// one-sided interface fluxes, evaluate the jump residual sigma, test
// convergence, displace interface and mesh harmonically, repeat. The minus
// subdomain solve is either a Dirichlet solve or, for the plasma problem, the
// smallest eigenpair with unit L2 normalization; beta is then recorded per
// iteration. Runs are bit-deterministic for fixed inputs.

#include "fbfem/mesh_motion.hpp"

namespace fbfem {

enum class SigmaForm { Lambda, LambdaSquared };

struct SolverConfig {
  double epsilon_tol = 1e-6;
  TauPolicy tau_policy = TauPolicy::capped();
  int max_iterations = 10000;
  double flux_epsilon = 0.0;     // interface recovery regularization
  SigmaForm sigma_form = SigmaForm::Lambda;
  int retry_limit = 10;          // tau halvings after a rejected motion
  double min_angle_floor_deg = 5.0;
  double divergence_factor = 10.0;  // abort when sigma exceeds best by this
  int stagnation_window = 50;
  double stagnation_rel = 1e-12;
  double linear_tol = 1e-10;
};

struct IterationRecord {
  int iter = 0;
  double sigma_inf = 0.0;
  double tau_used = 0.0;             // 0 when no movement was performed
  double min_angle_deg = 0.0;        // of the mesh after the step
  std::optional<double> beta;        // plasma only
  std::optional<double> eig_norm;    // u' M u of the eigenfield (plasma)
  std::vector<Vec2> interface_positions;  // state sigma was evaluated on
};

struct FreeBoundaryProblem {
  CoefficientFn a_plus;
  CoefficientFn a_minus;
  std::function<double(Vec2)> boundary_g;  // Dirichlet data on Sigma+-
  JumpCondition jump;
  bool minus_eigen = false;  // plasma: eigen-constrained minus solve
  EndpointRule front = EndpointRule::pinned();
  EndpointRule back = EndpointRule::pinned();
  std::vector<SlideConstraint> slides;  // Neumann outer vertices
};

enum class RunStatus { Converged, Stagnated, MaxIterations, Diverged };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "converged";
    case RunStatus::Stagnated: return "stagnated";
    case RunStatus::MaxIterations: return "max_iterations";
    case RunStatus::Diverged: return "diverged";
  }
  return "?";
}

struct StepResult {
  Mesh mesh;
  InterfaceCurve interface;
  ScalarField u;          // merged two-sided solution on the pre-move mesh
  std::optional<double> beta;
  SigmaTrace sigma;
  double sigma_movable = 0.0;  // sup norm excluding pinned endpoints
  IterationRecord record;
  bool converged = false;  // sigma below tolerance; no movement performed
};

namespace detail {

// Best-effort quality improvement with fixed connectivity: incremental
// relaxation, global harmonic repositioning, and equal-arc-length interface
// redistribution followed by repositioning. The best non-inverted candidate
// wins; the input is returned when nothing helps.
inline Mesh improve_mesh(const Mesh& m, const InterfaceCurve& ic,
                         bool allow_redistribute) {
  Mesh best = m;
  double qbest = mesh_quality(m).min_angle_deg;
  auto consider = [&](Mesh cand) {
    MeshQuality q = mesh_quality(cand);
    if (!q.inverted && q.min_angle_deg > qbest) {
      qbest = q.min_angle_deg;
      best = std::move(cand);
    }
  };
  consider(relax_interior(m, 2));
  try {
    consider(harmonic_reposition(m));
    if (allow_redistribute) {
      Mesh shifted = shift_interface(m, ic, redistribute_interface(m, ic));
      consider(relax_interior(shifted, 1));
      consider(std::move(shifted));
    }
  } catch (const std::exception&) {
    // solver hiccups on a degenerate candidate: keep what we have
  }
  return best;
}

inline std::vector<std::optional<double>> dirichlet_data(
    const Mesh& m, const std::function<double(Vec2)>& g) {
  std::vector<std::optional<double>> d(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) {
    switch (m.boundary_markers[v]) {
      case Marker::Gamma: d[v] = 0.0; break;
      case Marker::SigmaPlus:
      case Marker::SigmaMinus: d[v] = g(m.vertices[v]); break;
      case Marker::Interior: break;
    }
  }
  return d;
}

}  // namespace detail

// One outer iteration. `warm_eig` carries the previous eigenfield (global
// indexing) between plasma iterations.
inline StepResult step(const FreeBoundaryProblem& problem, const Mesh& mesh_in,
                       const InterfaceCurve& interface, const SolverConfig& config,
                       int iter_index = 1, ScalarField* warm_eig = nullptr) {
  StepResult out;
  // Large accumulated interface travel squeezes interior vertices against the
  // front; relax them (interface and boundary stay bitwise fixed) before the
  // quality floor is reached.
  Mesh mesh = mesh_in;
  InterfaceCurve cur = interface;
  if (mesh_quality(mesh).min_angle_deg < 3.0 * config.min_angle_floor_deg) {
    mesh = detail::improve_mesh(mesh, cur, true);
    cur.normals = interface_vertex_normals(mesh, cur);
  }
  auto dirichlet = detail::dirichlet_data(mesh, problem.boundary_g);

  // subdomain solves
  SparseOperator A_plus = assemble_stiffness(mesh, Region::Plus, problem.a_plus);
  ScalarField u_plus = solve_dirichlet(mesh, Region::Plus, A_plus, dirichlet,
                                       config.linear_tol);

  SparseOperator A_minus = assemble_stiffness(mesh, Region::Minus, problem.a_minus);
  ScalarField u_minus(mesh.num_vertices(), 0.0);
  InterfaceTrace mu_minus;
  std::optional<double> eig_norm;
  if (problem.minus_eigen) {
    std::vector<int> free_ids;
    for (int v : region_vertices(mesh, Region::Minus))
      if (mesh.boundary_markers[v] == Marker::Interior) free_ids.push_back(v);
    if (free_ids.empty())
      throw std::runtime_error("step: plasma region has no interior vertex");
    SparseOperator M_minus = assemble_mass(mesh, Region::Minus);
    SparseOperator K = A_minus.submatrix(free_ids);
    SparseOperator M = M_minus.submatrix(free_ids);
    EigOptions opt;
    std::vector<double> warm;
    if (warm_eig != nullptr && !warm_eig->empty()) {
      warm.resize(free_ids.size());
      for (size_t k = 0; k < free_ids.size(); ++k) warm[k] = (*warm_eig)[free_ids[k]];
      opt.warm_start = &warm;
    }
    EigResult eig = smallest_generalized_eig(K, M, opt);
    for (size_t k = 0; k < free_ids.size(); ++k) u_minus[free_ids[k]] = eig.vec[k];
    out.beta = eig.beta;
    // eigen flux: the weak identity carries the volume term beta M u
    std::vector<double> au = A_minus.matvec(u_minus);
    std::vector<double> mu = M_minus.matvec(u_minus);
    mu_minus.resize(cur.size());
    for (int i = 0; i < cur.size(); ++i) {
      int v = cur.vertex_ids[i];
      mu_minus[i] = au[v] - eig.beta * mu[v];
    }
    double nrm = 0.0;
    for (int v = 0; v < mesh.num_vertices(); ++v) nrm += u_minus[v] * mu[v];
    eig_norm = nrm;
    if (warm_eig != nullptr) *warm_eig = u_minus;
  } else {
    u_minus = solve_dirichlet(mesh, Region::Minus, A_minus, dirichlet,
                              config.linear_tol);
    mu_minus = interface_residual(A_minus, u_minus, cur);
  }

  // one-sided fluxes: alpha+ of u^+ = u, alpha- of the negative part u^- = -u
  SparseOperator Q_plus =
      assemble_interface_mass(mesh, cur, problem.a_plus, Region::Plus);
  SparseOperator Q_minus =
      assemble_interface_mass(mesh, cur, problem.a_minus, Region::Minus);
  SparseOperator D;
  const SparseOperator* Dp = nullptr;
  if (config.flux_epsilon != 0.0) {
    D = assemble_interface_diffusion(mesh, cur);
    Dp = &D;
  }
  InterfaceTrace mu_plus = interface_residual(A_plus, u_plus, cur);
  InterfaceTrace alpha_plus = recover_flux(Q_plus, mu_plus, config.flux_epsilon, Dp);
  InterfaceTrace alpha_minus = recover_flux(Q_minus, mu_minus, config.flux_epsilon, Dp);
  for (double& a : alpha_minus) a = -a;

  std::vector<Vec2> points(cur.size());
  for (int i = 0; i < cur.size(); ++i)
    points[i] = mesh.vertices[cur.vertex_ids[i]];

  JumpCondition jump = problem.jump;
  jump.lambda_squared = config.sigma_form == SigmaForm::LambdaSquared;
  out.sigma = compute_sigma(alpha_plus, alpha_minus, jump, points);
  for (size_t i = 0; i < out.sigma.values.size(); ++i) {
    bool pinned_end =
        !cur.closed &&
        ((i == 0 && problem.front.kind == EndpointRule::Kind::Pinned) ||
         (i + 1 == out.sigma.values.size() &&
          problem.back.kind == EndpointRule::Kind::Pinned));
    if (!pinned_end)
      out.sigma_movable = std::max(out.sigma_movable, std::abs(out.sigma.values[i]));
  }

  out.u = u_plus;
  for (int v = 0; v < mesh.num_vertices(); ++v) out.u[v] += u_minus[v];

  out.record.iter = iter_index;
  out.record.sigma_inf = out.sigma.inf_norm;
  out.record.beta = out.beta;
  out.record.eig_norm = eig_norm;
  out.record.interface_positions = points;

  if (out.sigma.inf_norm < config.epsilon_tol) {
    out.converged = true;
    out.mesh = mesh;
    out.interface = cur;
    out.record.tau_used = 0.0;
    out.record.min_angle_deg = mesh_quality(mesh).min_angle_deg;
    return out;
  }

  // interface + mesh motion with tau-halving retries on bad elements; if
  // halving alone cannot satisfy the quality floor, relax the interior once
  // (the interface Dirichlet data stays valid) and try again
  double flux_scale = 0.0;
  for (int i = 0; i < cur.size(); ++i)
    flux_scale = std::max(flux_scale,
                          jump.a_plus(points[i]) * std::abs(alpha_plus[i]) +
                              jump.a_minus(points[i]) * std::abs(alpha_minus[i]));
  double tau0 = select_tau(out.sigma, mesh, cur, config.tau_policy,
                           problem.front, problem.back, flux_scale);
  double tau = tau0;
  bool accepted = false;
  for (int repair = 0; repair < 2 && !accepted; ++repair) {
    std::vector<Vec2> disp = advance_interface(mesh, cur, out.sigma, tau,
                                               problem.front, problem.back);
    std::vector<Vec2> omega = harmonic_displacement(
        mesh, problem.a_plus, problem.a_minus, cur, disp, problem.slides,
        config.linear_tol);
    int retries = 0;
    while (true) {
      Mesh moved = apply_displacement(mesh, omega);
      MotionCheck check = validate_motion(mesh, moved, config.min_angle_floor_deg);
      if (check.ok) {
        out.mesh = std::move(moved);
        accepted = true;
        break;
      }
      if (++retries > config.retry_limit) {
        if (repair == 1)
          throw std::runtime_error(
              "step: motion rejected after retries (worst triangle " +
              std::to_string(check.worst_triangle) + ")");
        // Gamma positions must stay put here: sigma and the displacement data
        // were computed on them.
        mesh = detail::improve_mesh(mesh, cur, false);
        tau = tau0;
        break;
      }
      tau *= 0.5;  // the harmonic extension is linear in tau
      for (Vec2& d : disp) d = 0.5 * d;
      for (Vec2& w : omega) w = 0.5 * w;
    }
  }
  out.interface = cur;
  out.interface.normals = interface_vertex_normals(out.mesh, out.interface);
  out.record.tau_used = tau;
  out.record.min_angle_deg = mesh_quality(out.mesh).min_angle_deg;
  return out;
}

struct RunResult {
  RunStatus status = RunStatus::MaxIterations;
  Mesh mesh;
  InterfaceCurve interface;
  ScalarField u;
  std::optional<double> beta;
  SigmaTrace sigma;
  std::vector<IterationRecord> history;
  int moves = 0;  // movement steps actually performed
};

using StepCallback = std::function<void(const IterationRecord&, const Mesh&,
                                        const InterfaceCurve&, const ScalarField&)>;

inline RunResult run(const FreeBoundaryProblem& problem, Mesh mesh,
                     InterfaceCurve interface, const SolverConfig& config,
                     const StepCallback& callback = {}) {
  RunResult res;
  ScalarField warm_eig;
  double best = std::numeric_limits<double>::max();
  double best_movable = std::numeric_limits<double>::max();
  int best_iter = 0;
  int divergence_strikes = 0;
  for (int n = 1; n <= config.max_iterations; ++n) {
    StepResult s = step(problem, mesh, interface, config, n,
                        problem.minus_eigen ? &warm_eig : nullptr);
    res.history.push_back(s.record);
    res.u = s.u;
    res.beta = s.beta;
    res.sigma = s.sigma;
    if (callback) callback(s.record, s.mesh, s.interface, s.u);
    mesh = std::move(s.mesh);
    interface = std::move(s.interface);
    if (s.converged) {
      res.status = RunStatus::Converged;
      break;
    }
    res.moves += 1;

    if (s.record.sigma_inf < best * (1.0 - config.stagnation_rel)) {
      best = s.record.sigma_inf;
      best_iter = n;
    } else if (n - best_iter >= config.stagnation_window) {
      res.status = RunStatus::Stagnated;
      break;
    }
    // Divergence is judged on the movable part of the trace: sigma at pinned
    // boundary junctions carries transient recovery pollution that does not
    // drive the interface. A single spike (mesh repair events perturb the
    // recovery) is tolerated; three consecutive violations abort.
    if (s.sigma_movable < best_movable) {
      best_movable = s.sigma_movable;
      divergence_strikes = 0;
    } else if (n > 1 && s.sigma_movable > config.divergence_factor * best_movable) {
      if (++divergence_strikes >= 3) {
        res.status = RunStatus::Diverged;
        break;
      }
    } else {
      divergence_strikes = 0;
    }
  }
  res.mesh = std::move(mesh);
  res.interface = std::move(interface);
  return res;
}

}  // namespace fbfem
