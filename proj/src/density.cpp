#include "nfp/density.hpp"

#include <cmath>
#include <stdexcept>

#include "nfp/kernels.hpp"

namespace nfp {

DesignField DesignField::uniform(const ShapingFunction& shaping,
                                 const NeighborhoodTable& nbr, double beta0) {
  DesignField d{shaping, {}, {}, {}};
  const int n = nbr.num_elems;
  d.beta.assign(n, beta0);
  d.lower.resize(n);
  d.upper.resize(n);
  for (int i = 0; i < n; ++i) {
    const int dn = static_cast<int>(nbr.row_size(i));
    d.lower[i] = shaping.lower_bound(dn);
    d.upper[i] = shaping.upper_bound(dn);
  }
  return d;
}

double normalized_field_product(std::span<const double> values,
                                std::span<const double> measures) {
  if (values.empty() || values.size() != measures.size())
    throw std::invalid_argument("normalized_field_product: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] <= 0.0)
      throw std::domain_error("normalized_field_product: value <= 0");
    if (measures[i] <= 0.0)
      throw std::invalid_argument("normalized_field_product: measure <= 0");
    num += measures[i] * std::log(values[i]);
    den += measures[i];
  }
  return std::exp(num / den);
}

namespace {

std::vector<double> log_f(const DesignField& design) {
  const auto& shaping = design.shaping;
  std::vector<double> lf(design.beta.size());
  for (std::size_t j = 0; j < design.beta.size(); ++j) {
    if (!shaping.in_domain(design.beta[j]))
      throw std::domain_error("beta outside shaping function domain");
    lf[j] = std::log(shaping.f(design.beta[j]));
  }
  return lf;
}

}  // namespace

DensityField evaluate_density(const DesignField& design,
                              const NeighborhoodTable& nbr) {
  if (static_cast<int>(design.beta.size()) != nbr.num_elems)
    throw std::invalid_argument("evaluate_density: size mismatch");
  const auto& k = kernels::active();
  const std::vector<double> lf = log_f(design);
  std::vector<double> s(nbr.num_elems);
  k.grouped_weighted_sum(nbr.grp_offsets.data(), nbr.grp_indices.data(),
                         nbr.grp_weights.data(), lf.data(), s.data(),
                         nbr.num_elems);
  DensityField rho(nbr.num_elems);
  k.one_minus_exp(s.data(), rho.data(), s.size());
  return rho;
}

std::vector<std::pair<int, double>> density_gradient_row(
    int i, const DensityField& rho, const DesignField& design,
    const NeighborhoodTable& nbr) {
  std::vector<std::pair<int, double>> row;
  row.reserve(nbr.row_size(i));
  const double factor = -(1.0 - rho[i]);
  for (std::int64_t k = nbr.offsets[i]; k < nbr.offsets[i + 1]; ++k) {
    const int j = nbr.indices[k];
    row.emplace_back(j,
                     factor * nbr.weights[k] * design.shaping.t2(design.beta[j]));
  }
  return row;
}

std::vector<double> backpropagate(std::span<const double> df0_drho,
                                  const DensityField& rho,
                                  const DesignField& design,
                                  const NeighborhoodTable& nbr) {
  if (static_cast<int>(df0_drho.size()) != nbr.num_elems ||
      rho.size() != df0_drho.size())
    throw std::invalid_argument("backpropagate: size mismatch");
  // (df0/dbeta)_j = -T2(beta_j) sum_{i : j in N_i} w_ij (df0/drho)_i (1-rho_i)
  std::vector<double> t(nbr.num_elems);
  for (int i = 0; i < nbr.num_elems; ++i) t[i] = df0_drho[i] * (1.0 - rho[i]);
  std::vector<double> g(nbr.num_elems);
  kernels::active().grouped_weighted_sum(
      nbr.rev_grp_offsets.data(), nbr.rev_grp_indices.data(),
      nbr.rev_grp_weights.data(), t.data(), g.data(), nbr.num_elems);
  for (int j = 0; j < nbr.num_elems; ++j)
    g[j] *= -design.shaping.t2(design.beta[j]);
  return g;
}

double grayness(const DensityField& rho) {
  if (rho.empty()) throw std::invalid_argument("grayness: empty field");
  return kernels::active().grayness_sum(rho.data(), rho.size()) /
         static_cast<double>(rho.size());
}

DensityField projection_density(const ProjectionField& field,
                                const NeighborhoodTable& nbr) {
  if (field.beta_h < 0.0)
    throw std::invalid_argument("projection: beta_h must be >= 0");
  if (static_cast<int>(field.mu.size()) != nbr.num_elems)
    throw std::invalid_argument("projection_density: size mismatch");
  const auto& k = kernels::active();
  std::vector<double> s(nbr.num_elems);
  k.grouped_weighted_sum(nbr.grp_offsets.data(), nbr.grp_indices.data(),
                         nbr.grp_weights.data(), field.mu.data(), s.data(),
                         nbr.num_elems);
  for (double& v : s) v *= -field.beta_h;
  DensityField rho(nbr.num_elems);
  k.one_minus_exp(s.data(), rho.data(), s.size());
  return rho;
}

std::vector<std::pair<int, double>> projection_gradient_row(
    int i, const DensityField& rho, const ProjectionField& field,
    const NeighborhoodTable& nbr) {
  if (field.beta_h < 0.0)
    throw std::invalid_argument("projection: beta_h must be >= 0");
  std::vector<std::pair<int, double>> row;
  row.reserve(nbr.row_size(i));
  const double factor = field.beta_h * (1.0 - rho[i]);
  for (std::int64_t k = nbr.offsets[i]; k < nbr.offsets[i + 1]; ++k)
    row.emplace_back(nbr.indices[k], factor * nbr.weights[k]);
  return row;
}

std::vector<double> projection_backpropagate(std::span<const double> df0_drho,
                                             const DensityField& rho,
                                             const ProjectionField& field,
                                             const NeighborhoodTable& nbr) {
  if (static_cast<int>(df0_drho.size()) != nbr.num_elems)
    throw std::invalid_argument("projection_backpropagate: size mismatch");
  std::vector<double> t(nbr.num_elems);
  for (int i = 0; i < nbr.num_elems; ++i) t[i] = df0_drho[i] * (1.0 - rho[i]);
  std::vector<double> g(nbr.num_elems);
  kernels::active().grouped_weighted_sum(
      nbr.rev_grp_offsets.data(), nbr.rev_grp_indices.data(),
      nbr.rev_grp_weights.data(), t.data(), g.data(), nbr.num_elems);
  for (double& v : g) v *= field.beta_h;
  return g;
}

}  // namespace nfp
