#include "nfp/driver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nfp {

std::optional<int> OptimizationTrace::first_iteration_below(
    double g_tol) const {
  for (const auto& rec : history)
    if (rec.iter > 0 && rec.grayness <= g_tol) return rec.iter;
  return std::nullopt;
}

namespace {

ObjectiveResult objective_and_sens(const FemSolver& solver,
                                   const SystemState& state,
                                   const DensityField& rho,
                                   const ObjectiveSpec& spec) {
  return spec.kind == ObjectiveKind::Stiff
             ? stiff_objective_and_sens(solver, state, rho, spec)
             : cm_objective_and_sens(solver, state, rho, spec);
}

// Objective-change window stop: max |f0_k - f0_{k-1}| over the last 10
// accepted iterations below tol.
bool window_converged(const std::vector<IterationRecord>& history,
                      double tol) {
  constexpr int kWindow = 10;
  if (static_cast<int>(history.size()) < kWindow + 1) return false;
  double max_delta = 0.0;
  for (std::size_t k = history.size() - kWindow; k < history.size(); ++k)
    max_delta = std::max(max_delta,
                         std::abs(history[k].f0 - history[k - 1].f0));
  return max_delta < tol;
}

struct Evaluation {
  DensityField rho;
  double f0 = 0.0;
  double g1 = 0.0;
  double gray = 0.0;
  std::vector<double> df0_dvar;
  std::vector<double> dg1_dvar;
};

}  // namespace

OptimizationTrace run(const ProblemSpec& problem) {
  const GridMesh& mesh = problem.mesh;
  const NeighborhoodTable nbr = build_neighborhoods(mesh, problem.neighborhood);
  const FemSolver solver(mesh, problem.material, problem.loads);
  const ShapingFunction shaping(problem.shaping, problem.power_n);
  const double vf = problem.objective.volume_fraction;
  const OptimizerSettings& opt = problem.optimizer;

  const bool projection = problem.method == DensityMethod::Projection;

  // Uniform initial design with the volume constraint active.
  DesignField design = DesignField::uniform(shaping, nbr, 0.0);
  ProjectionField proj;
  std::vector<double> vars, lower, upper;
  if (projection) {
    proj.beta_h = problem.projection.beta_h_init;
    const double mu0 =
        std::clamp(-std::log(1.0 - vf) / proj.beta_h, 0.0, 1.0);
    proj.mu.assign(mesh.num_elems, mu0);
    vars = proj.mu;
    lower.assign(mesh.num_elems, 0.0);
    upper.assign(mesh.num_elems, 1.0);
  } else {
    const double beta0 = shaping.beta_for_density(vf);
    design.beta.assign(mesh.num_elems, beta0);
    vars = design.beta;
    lower = design.lower;
    upper = design.upper;
  }

  auto evaluate = [&](const std::vector<double>& x, bool gradients) {
    Evaluation ev;
    if (projection) {
      proj.mu = x;
      ev.rho = projection_density(proj, nbr);
    } else {
      design.beta = x;
      ev.rho = evaluate_density(design, nbr);
    }
    const SystemState state = solver.solve(ev.rho);
    const ObjectiveResult obj =
        objective_and_sens(solver, state, ev.rho, problem.objective);
    const ObjectiveResult vol =
        volume_constraint_and_sens(ev.rho, mesh, problem.objective);
    ev.f0 = obj.value;
    ev.g1 = vol.value;
    ev.gray = grayness(ev.rho);
    if (gradients) {
      if (projection) {
        ev.df0_dvar = projection_backpropagate(obj.d_drho, ev.rho, proj, nbr);
        ev.dg1_dvar = projection_backpropagate(vol.d_drho, ev.rho, proj, nbr);
      } else {
        ev.df0_dvar = backpropagate(obj.d_drho, ev.rho, design, nbr);
        ev.dg1_dvar = backpropagate(vol.d_drho, ev.rho, design, nbr);
      }
    }
    return ev;
  };

  OptimizationTrace trace;
  MmaSolver mma(mesh.num_elems, opt.mma);

  Evaluation ev = evaluate(vars, true);
  trace.initial_f0 = ev.f0;
  trace.history.push_back({0, ev.f0, ev.g1, ev.gray});
  trace.snapshots.emplace_back(0, ev.rho);

  int iter = 0;
  trace.stop_reason = "max_iter";
  for (iter = 1; iter <= opt.max_iter; ++iter) {
    if (projection) {
      // Sharpness continuation: double on schedule up to beta_h_max.
      if (problem.projection.double_every > 0 && iter > 1 &&
          (iter - 1) % problem.projection.double_every == 0)
        proj.beta_h =
            std::min(proj.beta_h * 2.0, problem.projection.beta_h_max);
    }
    const std::vector<double> candidate =
        mma.step(vars, ev.f0, ev.df0_dvar, ev.g1, ev.dg1_dvar, lower, upper);
    vars = apply_step_damping(vars, candidate, opt.step_damping, lower, upper);

    ev = evaluate(vars, iter < opt.max_iter);
    trace.history.push_back({iter, ev.f0, ev.g1, ev.gray});
    if (opt.snapshot_every > 0 && iter % opt.snapshot_every == 0)
      trace.snapshots.emplace_back(iter, ev.rho);

    if (opt.g_tol && ev.gray <= *opt.g_tol) {
      trace.stop_reason = "g_tol";
      break;
    }
    if (opt.tol_fun && window_converged(trace.history, *opt.tol_fun)) {
      trace.stop_reason = "tol_fun";
      break;
    }
  }
  trace.iterations = std::min(iter, opt.max_iter);
  trace.final_density = ev.rho;
  trace.final_variables = vars;
  trace.final_f0 = ev.f0;
  if (trace.snapshots.back().first != trace.iterations)
    trace.snapshots.emplace_back(trace.iterations, ev.rho);
  return trace;
}

}  // namespace nfp
