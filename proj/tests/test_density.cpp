#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "nfp/density.hpp"
#include "nfp/mesh.hpp"
#include "nfp/shaping.hpp"

using namespace nfp;

namespace {

// betas drawn through the density inverse so every map lands in a
// well-conditioned range (nothing saturated against a bound)
DesignField random_design(const ShapingFunction& sf,
                          const NeighborhoodTable& nbr, unsigned seed) {
  DesignField d = DesignField::uniform(sf, nbr, sf.beta_for_density(0.5));
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> t(0.1, 0.9);
  for (auto& b : d.beta) b = sf.beta_for_density(t(rng));
  return d;
}

// brute-force product form, no logs: rho_i = 1 - prod f(beta_j)^w_ij
std::vector<double> density_oracle(const DesignField& d,
                                   const NeighborhoodTable& nbr) {
  std::vector<double> rho(nbr.num_elems);
  for (int i = 0; i < nbr.num_elems; ++i) {
    double prod = 1.0;
    for (std::int64_t k = nbr.offsets[i]; k < nbr.offsets[i + 1]; ++k)
      prod *= std::pow(d.shaping.f(d.beta[nbr.indices[k]]), nbr.weights[k]);
    rho[i] = 1.0 - prod;
  }
  return rho;
}

const ShapingKind kAllKinds[] = {ShapingKind::Exp, ShapingKind::Tanh,
                                 ShapingKind::Power, ShapingKind::Atan};

}  // namespace

TEST_CASE("weighted geometric mean on hand-checked values") {
  // equal measures: plain geometric mean of {1, 4} = 2
  const double v1[] = {1.0, 4.0};
  const double m1[] = {1.0, 1.0};
  CHECK(normalized_field_product(v1, m1) == doctest::Approx(2.0));

  // weights 3:1 -> 8^(3/4) * 2^(1/4) = 2^(9/4 + 1/4) = 2^2.5
  const double v2[] = {8.0, 2.0};
  const double m2[] = {3.0, 1.0};
  CHECK(normalized_field_product(v2, m2) ==
        doctest::Approx(std::pow(2.0, 2.5)).epsilon(1e-14));

  const double bad[] = {1.0, 0.0};
  CHECK_THROWS_AS(normalized_field_product(bad, m2), std::domain_error);
}

TEST_CASE("shaping functions: values, domain, T2 identity") {
  for (const auto kind : kAllKinds) {
    const ShapingFunction sf(kind);
    // f maps into (0, 1], and T2 == f'/f by central differences. Betas are
    // drawn through the density inverse: in the saturated tail 1 - f loses
    // precision and finite differences turn into noise, which would test
    // floating point rather than the formulas.
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> pick(0.02, 0.98);
    for (int s = 0; s < 200; ++s) {
      const double b = sf.beta_for_density(pick(rng));
      REQUIRE(sf.in_domain(b));
      const double f = sf.f(b);
      CHECK(f > 0.0);
      CHECK(f <= 1.0);
      const double h = 1e-6 * std::max(1.0, std::abs(b));
      const double fd = (sf.f(b + h) - sf.f(b - h)) / (2.0 * h);
      CHECK(sf.t2(b) == doctest::Approx(fd / f).epsilon(1e-6));
    }
  }
}

TEST_CASE("shaping T2 ranges hold over dense samples") {
  // sampled bounds on the log-derivative each map advertises
  const int n_samples = 10000;
  {
    const ShapingFunction sf(ShapingKind::Exp);
    for (int s = 0; s <= n_samples; ++s) {
      const double b = -40.0 * s / n_samples;
      CHECK(sf.t2(b) == 1.0);
    }
  }
  {
    const ShapingFunction sf(ShapingKind::Tanh);
    for (int s = 0; s <= n_samples; ++s) {
      const double b = 10.0 * s / n_samples;
      const double t2 = sf.t2(b);
      CHECK(t2 <= -1.0);
      CHECK(t2 > -2.0 - 1e-12);
    }
  }
  {
    const ShapingFunction sf(ShapingKind::Power, 12.0);
    for (int s = 0; s <= n_samples; ++s) {
      const double b = 1.0 + 100.0 * s / n_samples;
      const double t2 = sf.t2(b);
      CHECK(t2 < 0.0);
      CHECK(t2 >= -12.0);
    }
  }
  {
    const ShapingFunction sf(ShapingKind::Atan);
    for (int s = 0; s <= n_samples; ++s) {
      const double b = 50.0 * s / n_samples;
      const double t2 = sf.t2(b);
      CHECK(t2 <= 0.0);
      CHECK(t2 >= -1.0 - 1e-12);
    }
  }
}

TEST_CASE("beta_for_density inverts 1 - f") {
  for (const auto kind : kAllKinds) {
    const ShapingFunction sf(kind);
    for (const double rho : {0.05, 0.2, 0.35, 0.5, 0.8}) {
      const double b = sf.beta_for_density(rho);
      CHECK(sf.in_domain(b));
      CHECK(1.0 - sf.f(b) == doctest::Approx(rho).epsilon(1e-12));
    }
  }
}

TEST_CASE("density matches the brute-force product oracle") {
  const GridMesh m = build_grid_2d(6, 4);
  const NeighborhoodTable nbr =
      build_neighborhoods(m, NeighborhoodSpec::square(1));
  for (const auto kind : kAllKinds) {
    const ShapingFunction sf(kind);
    const DesignField d = random_design(sf, nbr, 7);
    const DensityField rho = evaluate_density(d, nbr);
    const std::vector<double> want = density_oracle(d, nbr);
    REQUIRE(rho.size() == want.size());
    for (std::size_t i = 0; i < rho.size(); ++i) {
      CHECK(std::abs(rho[i] - want[i]) < 1e-12);
      CHECK(rho[i] >= 0.0);
      CHECK(rho[i] <= 1.0);
    }
  }
}

TEST_CASE("single solid element fills its neighborhood") {
  // driving one beta to the solid end pushes density near 1 across N_i
  const GridMesh m = build_grid_2d(7, 7);
  const NeighborhoodTable nbr =
      build_neighborhoods(m, NeighborhoodSpec::square(1));
  const ShapingFunction sf(ShapingKind::Exp);
  DesignField d = DesignField::uniform(sf, nbr, 0.0);  // all void
  const int c = m.elem_index(3, 3);
  d.beta[c] = d.lower[c];  // lower bound widens with |N_i| for exactly this
  const DensityField rho = evaluate_density(d, nbr);
  for (std::int64_t k = nbr.offsets[c]; k < nbr.offsets[c + 1]; ++k)
    CHECK(rho[nbr.indices[k]] > 0.99);
  // an element two rings away is untouched
  CHECK(rho[m.elem_index(0, 0)] == doctest::Approx(0.0));
}

TEST_CASE("density gradient row matches central differences") {
  const GridMesh m = build_grid_2d(5, 4);
  const NeighborhoodTable nbr =
      build_neighborhoods(m, NeighborhoodSpec::square(1));
  for (const auto kind : kAllKinds) {
    const ShapingFunction sf(kind);
    DesignField d = random_design(sf, nbr, 11);
    const DensityField rho = evaluate_density(d, nbr);
    for (const int i : {0, 7, 12, m.num_elems - 1}) {
      const auto row = density_gradient_row(i, rho, d, nbr);
      CHECK(static_cast<std::int64_t>(row.size()) == nbr.row_size(i));
      for (const auto& [j, g] : row) {
        const double h = 1e-6 * std::max(1.0, std::abs(d.beta[j]));
        const double keep = d.beta[j];
        d.beta[j] = keep + h;
        const double rp = evaluate_density(d, nbr)[i];
        d.beta[j] = keep - h;
        const double rm = evaluate_density(d, nbr)[i];
        d.beta[j] = keep;
        CHECK(g == doctest::Approx((rp - rm) / (2.0 * h)).epsilon(5e-6));
      }
    }
  }
}

TEST_CASE("backpropagate equals the dense Jacobian-transpose product") {
  const GridMesh m = build_grid_2d(6, 3);
  const NeighborhoodTable nbr =
      build_neighborhoods(m, NeighborhoodSpec::square(2));
  const ShapingFunction sf(ShapingKind::Tanh);
  const DesignField d = random_design(sf, nbr, 23);
  const DensityField rho = evaluate_density(d, nbr);

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::vector<double> seed(m.num_elems);
  for (auto& s : seed) s = val(rng);

  // dense oracle: J^T seed assembled row by row
  std::vector<double> want(m.num_elems, 0.0);
  for (int i = 0; i < m.num_elems; ++i)
    for (const auto& [j, g] : density_gradient_row(i, rho, d, nbr))
      want[j] += seed[i] * g;

  const std::vector<double> got = backpropagate(seed, rho, d, nbr);
  REQUIRE(got.size() == want.size());
  for (int j = 0; j < m.num_elems; ++j)
    CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-11));
}

TEST_CASE("grayness") {
  CHECK(grayness({0.0, 1.0, 1.0, 0.0}) == doctest::Approx(0.0));
  CHECK(grayness({0.5, 0.5}) == doctest::Approx(1.0));
  CHECK(grayness({0.25}) == doctest::Approx(4.0 * 0.25 * 0.75));
  const DensityField empty;
  CHECK_THROWS_AS(grayness(empty), std::invalid_argument);
}

TEST_CASE("projection density and gradients") {
  const GridMesh m = build_grid_2d(5, 5);
  const NeighborhoodTable nbr =
      build_neighborhoods(m, NeighborhoodSpec::square(1));
  ProjectionField field;
  field.beta_h = 8.0;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> val(0.05, 0.95);
  field.mu.resize(m.num_elems);
  for (auto& v : field.mu) v = val(rng);

  DensityField rho = projection_density(field, nbr);
  // oracle: 1 - exp(-beta_h * filtered mu)
  for (int i = 0; i < m.num_elems; ++i) {
    double filt = 0.0;
    for (std::int64_t k = nbr.offsets[i]; k < nbr.offsets[i + 1]; ++k)
      filt += nbr.weights[k] * field.mu[nbr.indices[k]];
    CHECK(rho[i] ==
          doctest::Approx(1.0 - std::exp(-field.beta_h * filt)).epsilon(1e-13));
  }

  // gradient rows against central differences on mu
  for (const int i : {0, 12, 24}) {
    const auto row = projection_gradient_row(i, rho, field, nbr);
    for (const auto& [j, g] : row) {
      const double h = 1e-7;
      const double keep = field.mu[j];
      field.mu[j] = keep + h;
      const double rp = projection_density(field, nbr)[i];
      field.mu[j] = keep - h;
      const double rm = projection_density(field, nbr)[i];
      field.mu[j] = keep;
      CHECK(g == doctest::Approx((rp - rm) / (2.0 * h)).epsilon(1e-5));
    }
  }

  // transpose product consistency, same oracle pattern as the nFP one
  std::vector<double> seed(m.num_elems);
  for (auto& s : seed) s = val(rng) - 0.5;
  std::vector<double> want(m.num_elems, 0.0);
  for (int i = 0; i < m.num_elems; ++i)
    for (const auto& [j, g] : projection_gradient_row(i, rho, field, nbr))
      want[j] += seed[i] * g;
  const std::vector<double> got =
      projection_backpropagate(seed, rho, field, nbr);
  for (int j = 0; j < m.num_elems; ++j)
    CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-11));
}

TEST_CASE("projection-to-product gradient ratio is exactly -beta_h") {
  // with matched fields (mu plays beta under the exp map) the two gradient
  // rows differ by the constant factor -beta_h
  const GridMesh m = build_grid_2d(4, 4);
  const NeighborhoodTable nbr =
      build_neighborhoods(m, NeighborhoodSpec::square(1));
  const ShapingFunction sf(ShapingKind::Exp);

  std::mt19937 rng(17);
  std::uniform_real_distribution<double> val(0.1, 2.0);
  for (const double beta_h : {8.0, 64.0}) {
    ProjectionField pf;
    pf.beta_h = beta_h;
    pf.mu.resize(m.num_elems);
    DesignField d = DesignField::uniform(sf, nbr, 0.0);
    for (int j = 0; j < m.num_elems; ++j) {
      pf.mu[j] = val(rng);
      d.beta[j] = -beta_h * pf.mu[j];  // same densities by construction
    }
    const DensityField rho_p = projection_density(pf, nbr);
    const DensityField rho_n = evaluate_density(d, nbr);
    for (int i = 0; i < m.num_elems; ++i)
      CHECK(std::abs(rho_p[i] - rho_n[i]) < 1e-14);

    for (const int i : {0, 5, 15}) {
      const auto rp = projection_gradient_row(i, rho_p, pf, nbr);
      const auto rn = density_gradient_row(i, rho_n, d, nbr);
      REQUIRE(rp.size() == rn.size());
      for (std::size_t k = 0; k < rp.size(); ++k) {
        CHECK(rp[k].first == rn[k].first);
        CHECK(std::abs(rp[k].second - (-beta_h) * rn[k].second) <
              1e-12 * std::abs(rp[k].second) + 1e-300);
      }
    }
  }
}

namespace {

int mirrored_elem(const GridMesh& m, int e, int axis) {
  int ix, iy, iz;
  m.elem_coords(e, ix, iy, iz);
  if (axis == 0) ix = m.nx - 1 - ix;
  if (axis == 1) iy = m.ny - 1 - iy;
  if (axis == 2) iz = m.nz - 1 - iz;
  return m.elem_index(ix, iy, iz);
}

}  // namespace

TEST_CASE("density and backprop are bit-exactly reflection-equivariant") {
  // A design field symmetric across any grid axis must produce a density
  // field and sensitivities symmetric to the last bit -- not merely to
  // roundoff -- or long optimization runs would amplify the seed and break
  // the symmetry of symmetric problems.
  const GridMesh m = build_grid_3d(7, 5, 4);
  for (const auto& spec :
       {NeighborhoodSpec::square(2), NeighborhoodSpec::circle(2.0)}) {
    const NeighborhoodTable nbr = build_neighborhoods(m, spec);
    const ShapingFunction sf(ShapingKind::Exp);
    for (int axis : {0, 1, 2}) {
      DesignField d = random_design(sf, nbr, 90 + axis);
      std::vector<double> load(m.num_elems);
      std::mt19937 rng(17 + axis);
      std::uniform_real_distribution<double> val(-1.0, 1.0);
      for (auto& v : load) v = val(rng);
      // symmetrize both fields by copying from the low-coordinate half
      for (int e = 0; e < m.num_elems; ++e) {
        const int me = mirrored_elem(m, e, axis);
        if (me > e) {
          d.beta[me] = d.beta[e];
          load[me] = load[e];
        }
      }
      const DensityField rho = evaluate_density(d, nbr);
      const std::vector<double> g = backpropagate(load, rho, d, nbr);
      for (int e = 0; e < m.num_elems; ++e) {
        const int me = mirrored_elem(m, e, axis);
        CHECK(rho[e] == rho[me]);
        CHECK(g[e] == g[me]);
      }
    }
  }
}
