#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <vector>

#include "nfp/mesh.hpp"

namespace nfp {

struct MaterialModel {
  double youngs = 2e4;
  double poisson = 0.3;
  double simp_eta = 3.0;   // SIMP penalty
  double rho_min = 1e-4;   // stiffness floor against singular K
};

struct PointLoad {
  int dof;
  double value;
};

struct Spring {
  int dof;
  double stiffness;
};

struct LoadCase {
  std::vector<int> fixed_dofs;
  std::vector<PointLoad> loads;
  std::vector<Spring> springs;
  std::vector<PointLoad> dummy_loads;  // compliant-mechanism output

  bool has_dummy() const { return !dummy_loads.empty(); }
};

// SIMP stiffness scale rho^eta (1 - rho_min) + rho_min.
double simp_scale(double rho, const MaterialModel& material);
double simp_scale_derivative(double rho, const MaterialModel& material);

// Solid-element stiffness: 8x8 bilinear quad (plane stress, unit thickness)
// or 24x24 trilinear hex, by full Gauss quadrature.
Eigen::MatrixXd element_stiffness(int dim, double youngs, double poisson,
                                  double hx, double hy, double hz = 1.0);

// Assembled, constrained and factorized system with its solutions.
struct SystemState {
  Eigen::VectorXd u;          // full-length, zeros at fixed DOFs
  Eigen::VectorXd v;          // dummy-load solution (empty when unused)
  double compliance = 0.0;    // u^T K u = u^T F
  double mutual = 0.0;        // v^T K u = u^T F_d (0 when no dummy load)
  double residual_u = 0.0;    // relative residuals of the constrained solves
  double residual_v = 0.0;
};

// Reusable solver: the sparsity pattern and symbolic factorization are set up
// once, then refactorized per density field.
class FemSolver {
 public:
  FemSolver(const GridMesh& mesh, MaterialModel material, LoadCase loads);
  ~FemSolver();
  FemSolver(FemSolver&&) noexcept;

  SystemState solve(const std::vector<double>& rho) const;

  // Per-element quadratic forms u_e^T K0 u_e (and u_e^T K0 v_e when a dummy
  // load is present; zeros otherwise).
  void element_strain_energy_terms(const SystemState& state,
                                   std::vector<double>& u_k0_u,
                                   std::vector<double>& u_k0_v) const;

  const Eigen::MatrixXd& k0() const;
  const MaterialModel& material() const;
  const LoadCase& loads() const;
  const GridMesh& mesh() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot convenience wrapper around FemSolver.
SystemState assemble_and_solve(const GridMesh& mesh,
                               const std::vector<double>& rho,
                               const MaterialModel& material,
                               const LoadCase& loads);

}  // namespace nfp
