#pragma once

#include <span>
#include <utility>
#include <vector>

#include "nfp/mesh.hpp"
#include "nfp/shaping.hpp"

namespace nfp {

// Design variables beta, one per element, with their shaping function and
// per-element bounds.
struct DesignField {
  ShapingFunction shaping;
  std::vector<double> beta;
  std::vector<double> lower;
  std::vector<double> upper;

  static DesignField uniform(const ShapingFunction& shaping,
                             const NeighborhoodTable& nbr, double beta0);
};

using DensityField = std::vector<double>;

// Weighted geometric mean exp(sum m_i ln v_i / sum m_i). Values must be
// strictly positive.
double normalized_field_product(std::span<const double> values,
                                std::span<const double> measures);

// rho_i = 1 - prod_{j in N_i} f(beta_j)^{w_ij}, evaluated in log space.
DensityField evaluate_density(const DesignField& design,
                              const NeighborhoodTable& nbr);

// Sparse row of the density Jacobian: pairs (j, d rho_i / d beta_j) for
// j in N_i. Entries are -(1 - rho_i) w_ij T2(beta_j).
std::vector<std::pair<int, double>> density_gradient_row(
    int i, const DensityField& rho, const DesignField& design,
    const NeighborhoodTable& nbr);

// Chain rule through the density map: (df0/dbeta)_j =
// sum_{i : j in N_i} (df0/drho)_i * d rho_i / d beta_j.
std::vector<double> backpropagate(std::span<const double> df0_drho,
                                  const DensityField& rho,
                                  const DesignField& design,
                                  const NeighborhoodTable& nbr);

// g = sum 4 rho (1 - rho) / n, in [0, 1]; 0 means fully binary.
double grayness(const DensityField& rho);

// Heaviside-projection baseline, constant-weight simplified form.
struct ProjectionField {
  std::vector<double> mu;   // design variables in [0, 1]
  double beta_h = 1.0;      // global sharpness, >= 0
};

DensityField projection_density(const ProjectionField& field,
                                const NeighborhoodTable& nbr);

std::vector<std::pair<int, double>> projection_gradient_row(
    int i, const DensityField& rho, const ProjectionField& field,
    const NeighborhoodTable& nbr);

std::vector<double> projection_backpropagate(std::span<const double> df0_drho,
                                             const DensityField& rho,
                                             const ProjectionField& field,
                                             const NeighborhoodTable& nbr);

}  // namespace nfp
