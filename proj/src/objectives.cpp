#include "nfp/objectives.hpp"

#include <stdexcept>

namespace nfp {

ObjectiveResult stiff_objective_and_sens(const FemSolver& solver,
                                         const SystemState& state,
                                         const std::vector<double>& rho,
                                         const ObjectiveSpec& spec) {
  if (spec.kind != ObjectiveKind::Stiff)
    throw std::invalid_argument("stiff objective called with wrong kind");
  if (state.u.size() == 0)
    throw std::invalid_argument("stiff objective requires a solved state");

  std::vector<double> uku, ukv;
  solver.element_strain_energy_terms(state, uku, ukv);
  const MaterialModel& mat = solver.material();

  ObjectiveResult res;
  res.value = spec.scale * 0.5 * state.compliance;
  res.d_drho.resize(rho.size());
  for (std::size_t e = 0; e < rho.size(); ++e)
    res.d_drho[e] =
        -spec.scale * 0.5 * simp_scale_derivative(rho[e], mat) * uku[e];
  return res;
}

ObjectiveResult cm_objective_and_sens(const FemSolver& solver,
                                      const SystemState& state,
                                      const std::vector<double>& rho,
                                      const ObjectiveSpec& spec) {
  if (spec.kind != ObjectiveKind::Compliant)
    throw std::invalid_argument("cm objective called with wrong kind");
  if (state.u.size() == 0 || state.v.size() == 0)
    throw std::invalid_argument("cm objective requires u and v solved");

  const double se2 = state.compliance;  // u^T K u (springs included)
  const double mse = state.mutual;      // v^T K u
  if (se2 <= 0.0)
    throw std::runtime_error("degenerate state: u^T K u <= 0");

  std::vector<double> uku, ukv;
  solver.element_strain_energy_terms(state, uku, ukv);
  const MaterialModel& mat = solver.material();

  ObjectiveResult res;
  res.value = -spec.scale * mse / se2;
  res.d_drho.resize(rho.size());
  for (std::size_t e = 0; e < rho.size(); ++e) {
    const double dk = simp_scale_derivative(rho[e], mat);
    res.d_drho[e] = spec.scale * (mse / (se2 * se2) * (-dk * uku[e]) +
                                  (1.0 / se2) * (dk * ukv[e]));
  }
  return res;
}

ObjectiveResult volume_constraint_and_sens(const std::vector<double>& rho,
                                           const GridMesh& mesh,
                                           const ObjectiveSpec& spec) {
  if (spec.volume_fraction <= 0.0 || spec.volume_fraction >= 1.0)
    throw std::invalid_argument("volume fraction must lie in (0, 1)");
  double total = 0.0;
  for (double v : mesh.elem_measure) total += v;
  const double v_star = spec.volume_fraction * total;

  ObjectiveResult res;
  res.d_drho.resize(rho.size());
  double used = 0.0;
  for (std::size_t e = 0; e < rho.size(); ++e) {
    used += rho[e] * mesh.elem_measure[e];
    res.d_drho[e] = mesh.elem_measure[e] / v_star;
  }
  res.value = used / v_star - 1.0;
  return res;
}

}  // namespace nfp
