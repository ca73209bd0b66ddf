#pragma once

#include <vector>

#include "nfp/fem.hpp"
#include "nfp/mesh.hpp"

namespace nfp {

enum class ObjectiveKind { Stiff, Compliant };

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::Stiff;
  double scale = 1e3;          // mu_s or mu_cm
  double volume_fraction = 0.35;
};

struct ObjectiveResult {
  double value = 0.0;
  std::vector<double> d_drho;  // one entry per element
};

// f0 = mu_s * 1/2 u^T K u; self-adjoint closed-form sensitivities.
ObjectiveResult stiff_objective_and_sens(const FemSolver& solver,
                                         const SystemState& state,
                                         const std::vector<double>& rho,
                                         const ObjectiveSpec& spec);

// f0 = -mu_cm (v^T K u)/(u^T K u) for compliant mechanisms; both adjoint
// variables reduce to closed form in u and v.
ObjectiveResult cm_objective_and_sens(const FemSolver& solver,
                                      const SystemState& state,
                                      const std::vector<double>& rho,
                                      const ObjectiveSpec& spec);

// g1 = sum rho_i V_i / V* - 1 with V* = vf * sum V_i.
ObjectiveResult volume_constraint_and_sens(const std::vector<double>& rho,
                                           const GridMesh& mesh,
                                           const ObjectiveSpec& spec);

}  // namespace nfp
