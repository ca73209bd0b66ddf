#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "nfp/fem.hpp"
#include "nfp/mesh.hpp"

using namespace nfp;

namespace {

// dense assembly + dense solve, the oracle the sparse path is held against
SystemState dense_solve_oracle(const GridMesh& mesh,
                               const std::vector<double>& rho,
                               const MaterialModel& mat,
                               const LoadCase& loads) {
  const Eigen::MatrixXd k0 = element_stiffness(
      mesh.dim, mat.youngs, mat.poisson, mesh.hx, mesh.hy, mesh.hz);
  const int n = mesh.num_dofs;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  const int npe = mesh.nodes_per_elem();
  for (int e = 0; e < mesh.num_elems; ++e) {
    const double s = simp_scale(rho[e], mat);
    for (int a = 0; a < npe; ++a)
      for (int ca = 0; ca < mesh.dim; ++ca)
        for (int b = 0; b < npe; ++b)
          for (int cb = 0; cb < mesh.dim; ++cb)
            K(mesh.dof(mesh.conn[e][a], ca), mesh.dof(mesh.conn[e][b], cb)) +=
                s * k0(a * mesh.dim + ca, b * mesh.dim + cb);
  }
  for (const auto& sp : loads.springs) K(sp.dof, sp.dof) += sp.stiffness;

  Eigen::VectorXd F = Eigen::VectorXd::Zero(n);
  for (const auto& l : loads.loads) F(l.dof) += l.value;
  Eigen::VectorXd Fd = Eigen::VectorXd::Zero(n);
  for (const auto& l : loads.dummy_loads) Fd(l.dof) += l.value;

  std::set<int> fixed(loads.fixed_dofs.begin(), loads.fixed_dofs.end());
  std::vector<int> keep;
  for (int i = 0; i < n; ++i)
    if (!fixed.count(i)) keep.push_back(i);
  const int m = static_cast<int>(keep.size());
  Eigen::MatrixXd Kr(m, m);
  Eigen::VectorXd Fr(m), Fdr(m);
  for (int i = 0; i < m; ++i) {
    Fr(i) = F(keep[i]);
    Fdr(i) = Fd(keep[i]);
    for (int j = 0; j < m; ++j) Kr(i, j) = K(keep[i], keep[j]);
  }
  const Eigen::VectorXd ur = Kr.ldlt().solve(Fr);
  SystemState st;
  st.u = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) st.u(keep[i]) = ur(i);
  st.compliance = st.u.dot(F);
  if (!loads.dummy_loads.empty()) {
    const Eigen::VectorXd vr = Kr.ldlt().solve(Fdr);
    st.v = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < m; ++i) st.v(keep[i]) = vr(i);
    st.mutual = st.u.dot(Fd);
  }
  return st;
}

}  // namespace

TEST_CASE("simp scale and its derivative") {
  MaterialModel mat;  // eta 3, rho_min 1e-4
  CHECK(simp_scale(0.0, mat) == doctest::Approx(1e-4));
  CHECK(simp_scale(1.0, mat) == doctest::Approx(1.0));
  CHECK(simp_scale(0.5, mat) ==
        doctest::Approx(0.125 * (1.0 - 1e-4) + 1e-4).epsilon(1e-14));
  for (const double r : {0.1, 0.37, 0.5, 0.92}) {
    const double h = 1e-6;
    const double fd = (simp_scale(r + h, mat) - simp_scale(r - h, mat)) / (2 * h);
    CHECK(simp_scale_derivative(r, mat) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("quad stiffness corner entry matches the closed form") {
  // unit square, E=1, nu=0.3, plane stress: K(0,0) = (1/2 - nu/6)/(1 - nu^2)
  const double nu = 0.3;
  const Eigen::MatrixXd k = element_stiffness(2, 1.0, nu, 1.0, 1.0);
  REQUIRE(k.rows() == 8);
  const double want = (0.5 - nu / 6.0) / (1.0 - nu * nu);
  CHECK(k(0, 0) == doctest::Approx(want).epsilon(1e-12));
  CHECK(want == doctest::Approx(0.4945054945).epsilon(1e-9));
  // Young's modulus enters linearly
  const Eigen::MatrixXd k2 = element_stiffness(2, 2e4, nu, 1.0, 1.0);
  CHECK(k2(0, 0) == doctest::Approx(2e4 * want).epsilon(1e-12));
}

TEST_CASE("element stiffness is symmetric with the right null space") {
  for (const int dim : {2, 3}) {
    const Eigen::MatrixXd k =
        element_stiffness(dim, 100.0, 0.25, 0.8, 1.1, 0.9);
    const int n = dim == 2 ? 8 : 24;
    REQUIRE(k.rows() == n);
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() < 1e-10);

    // rigid translations produce zero force
    for (int c = 0; c < dim; ++c) {
      Eigen::VectorXd t = Eigen::VectorXd::Zero(n);
      for (int a = 0; a < n / dim; ++a) t(a * dim + c) = 1.0;
      CHECK((k * t).cwiseAbs().maxCoeff() < 1e-10);
    }

    // exactly dim translations + rotations of zero eigenvalues, rest positive
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    const int n_rigid = dim == 2 ? 3 : 6;
    const double scale = es.eigenvalues().maxCoeff();
    for (int i = 0; i < n_rigid; ++i)
      CHECK(std::abs(es.eigenvalues()(i)) < 1e-10 * scale);
    for (int i = n_rigid; i < n; ++i)
      CHECK(es.eigenvalues()(i) > 1e-6 * scale);
  }
}

TEST_CASE("sparse solver matches the dense oracle in 2d") {
  const GridMesh mesh = build_grid_2d(4, 2);
  MaterialModel mat;
  LoadCase lc;
  // clamp the left edge, pull the far bottom corner down
  for (int iy = 0; iy <= mesh.ny; ++iy) {
    const int node = 0 + (mesh.nx + 1) * iy;
    lc.fixed_dofs.push_back(mesh.dof(node, 0));
    lc.fixed_dofs.push_back(mesh.dof(node, 1));
  }
  lc.loads.push_back({mesh.dof(mesh.nx, 1), -1.0});

  std::mt19937 rng(9);
  std::uniform_real_distribution<double> val(0.2, 1.0);
  std::vector<double> rho(mesh.num_elems);
  for (auto& r : rho) r = val(rng);

  const SystemState got = assemble_and_solve(mesh, rho, mat, lc);
  const SystemState want = dense_solve_oracle(mesh, rho, mat, lc);
  CHECK((got.u - want.u).cwiseAbs().maxCoeff() <
        1e-10 * want.u.cwiseAbs().maxCoeff());
  CHECK(got.compliance ==
        doctest::Approx(want.compliance).epsilon(1e-10));
  CHECK(got.residual_u < 1e-9);
  for (const int fd : lc.fixed_dofs) CHECK(got.u(fd) == 0.0);
}

TEST_CASE("sparse solver matches the dense oracle in 3d with springs and dummy load") {
  const GridMesh mesh = build_grid_3d(3, 2, 2);
  MaterialModel mat;
  mat.youngs = 1.0;
  LoadCase lc;
  for (int iz = 0; iz <= mesh.nz; ++iz)
    for (int iy = 0; iy <= mesh.ny; ++iy) {
      const int node = 0 + (mesh.nx + 1) * (iy + (mesh.ny + 1) * iz);
      for (int c = 0; c < 3; ++c) lc.fixed_dofs.push_back(mesh.dof(node, c));
    }
  const int tip = mesh.nx + (mesh.nx + 1) * (0 + (mesh.ny + 1) * 1);
  lc.loads.push_back({mesh.dof(tip, 1), -2.0});
  lc.springs.push_back({mesh.dof(tip, 0), 10.0});
  lc.dummy_loads.push_back({mesh.dof(tip, 0), -1.0});

  std::mt19937 rng(4);
  std::uniform_real_distribution<double> val(0.3, 1.0);
  std::vector<double> rho(mesh.num_elems);
  for (auto& r : rho) r = val(rng);

  const SystemState got = assemble_and_solve(mesh, rho, mat, lc);
  const SystemState want = dense_solve_oracle(mesh, rho, mat, lc);
  CHECK((got.u - want.u).cwiseAbs().maxCoeff() <
        1e-9 * want.u.cwiseAbs().maxCoeff());
  CHECK((got.v - want.v).cwiseAbs().maxCoeff() <
        1e-9 * want.v.cwiseAbs().maxCoeff());
  CHECK(got.mutual == doctest::Approx(want.mutual).epsilon(1e-9));
  CHECK(got.residual_u < 1e-9);
  CHECK(got.residual_v < 1e-9);
}

TEST_CASE("solver reuse across density fields stays consistent") {
  const GridMesh mesh = build_grid_2d(6, 3);
  MaterialModel mat;
  LoadCase lc;
  for (int iy = 0; iy <= mesh.ny; ++iy) {
    const int node = (mesh.nx + 1) * iy;
    lc.fixed_dofs.push_back(mesh.dof(node, 0));
    lc.fixed_dofs.push_back(mesh.dof(node, 1));
  }
  lc.loads.push_back({mesh.dof(mesh.nx, 1), -1.0});
  const FemSolver solver(mesh, mat, lc);

  std::mt19937 rng(21);
  std::uniform_real_distribution<double> val(0.1, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<double> rho(mesh.num_elems);
    for (auto& r : rho) r = val(rng);
    const SystemState got = solver.solve(rho);
    const SystemState want = dense_solve_oracle(mesh, rho, mat, lc);
    CHECK((got.u - want.u).cwiseAbs().maxCoeff() <
          1e-10 * want.u.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("element strain energy terms sum to global quadratic forms") {
  const GridMesh mesh = build_grid_2d(4, 3);
  MaterialModel mat;
  LoadCase lc;
  for (int iy = 0; iy <= mesh.ny; ++iy) {
    const int node = (mesh.nx + 1) * iy;
    lc.fixed_dofs.push_back(mesh.dof(node, 0));
    lc.fixed_dofs.push_back(mesh.dof(node, 1));
  }
  lc.loads.push_back({mesh.dof(mesh.nx, 1), -1.0});
  lc.springs.push_back({mesh.dof(mesh.nx, 0), 5.0});
  lc.dummy_loads.push_back({mesh.dof((mesh.nx + 1) * mesh.ny, 0), -1.0});
  const FemSolver solver(mesh, mat, lc);

  std::vector<double> rho(mesh.num_elems, 0.6);
  const SystemState st = solver.solve(rho);
  std::vector<double> uku, ukv;
  solver.element_strain_energy_terms(st, uku, ukv);

  // sum_e scale_e u_e^T K0 u_e + spring terms == u^T K u == u^T F
  double uKu = 0.0, uKv = 0.0;
  for (int e = 0; e < mesh.num_elems; ++e) {
    uKu += simp_scale(rho[e], mat) * uku[e];
    uKv += simp_scale(rho[e], mat) * ukv[e];
  }
  for (const auto& sp : lc.springs) {
    uKu += sp.stiffness * st.u(sp.dof) * st.u(sp.dof);
    uKv += sp.stiffness * st.u(sp.dof) * st.v(sp.dof);
  }
  CHECK(uKu == doctest::Approx(st.compliance).epsilon(1e-10));
  CHECK(uKv == doctest::Approx(st.mutual).epsilon(1e-9));
}

TEST_CASE("solid beam is stiffer than a porous one") {
  const GridMesh mesh = build_grid_2d(8, 2);
  MaterialModel mat;
  LoadCase lc;
  for (int iy = 0; iy <= mesh.ny; ++iy) {
    const int node = (mesh.nx + 1) * iy;
    lc.fixed_dofs.push_back(mesh.dof(node, 0));
    lc.fixed_dofs.push_back(mesh.dof(node, 1));
  }
  lc.loads.push_back({mesh.dof(mesh.nx, 1), -1.0});
  const std::vector<double> solid(mesh.num_elems, 1.0);
  const std::vector<double> porous(mesh.num_elems, 0.4);
  const double c_solid = assemble_and_solve(mesh, solid, mat, lc).compliance;
  const double c_porous = assemble_and_solve(mesh, porous, mat, lc).compliance;
  CHECK(c_solid > 0.0);
  CHECK(c_porous > c_solid);
}

namespace {

int mirror_node_last_axis(const GridMesh& m, int n) {
  const int nnx = m.nx + 1, nny = m.ny + 1;
  const int kx = n % nnx, ky = (n / nnx) % nny, kz = n / (nnx * nny);
  if (m.dim == 3) return kx + nnx * (ky + nny * (m.nz - kz));
  return kx + nnx * (m.ny - ky);
}

}  // namespace

TEST_CASE("solver element matrix carries its reflection symmetries exactly") {
  // The reflection across an axis permutes local nodes and flips the sign of
  // that axis' displacement rows/columns; the solver's canonicalized element
  // matrix must satisfy these identities bit-exactly, not to roundoff.
  const int mirror_quad[2][4] = {{1, 0, 3, 2}, {3, 2, 1, 0}};
  for (int dim : {2, 3}) {
    const GridMesh m = dim == 2 ? build_grid_2d(2, 2) : build_grid_3d(2, 2, 2);
    LoadCase lc;
    lc.fixed_dofs.push_back(0);
    lc.fixed_dofs.push_back(1);
    if (dim == 3) lc.fixed_dofs.push_back(2);
    const FemSolver solver(m, MaterialModel{}, lc);
    const Eigen::MatrixXd& k0 = solver.k0();
    const int npe = dim == 2 ? 4 : 8;
    auto mirror_dof = [&](int axis, int p, double& sign) {
      int a = p / dim;
      const int c = p % dim;
      const int base = dim == 3 && axis == 2 ? (a ^ 4)
                       : dim == 3 ? (a & 4) | mirror_quad[axis][a & 3]
                                  : mirror_quad[axis][a];
      sign = c == axis ? -1.0 : 1.0;
      return base * dim + c;
    };
    for (int axis = 0; axis < dim; ++axis)
      for (int p = 0; p < npe * dim; ++p)
        for (int q = 0; q < npe * dim; ++q) {
          double sp, sq;
          const int pp = mirror_dof(axis, p, sp);
          const int qq = mirror_dof(axis, q, sq);
          CHECK(k0(pp, qq) == sp * sq * k0(p, q));
          CHECK(k0(q, p) == k0(p, q));
        }
  }
}

TEST_CASE("symmetric problems solve to bit-exactly symmetric displacements") {
  // Full-domain problem, mirror-symmetric across the last grid axis: the
  // in-plane displacement components must match across the mirror exactly
  // and the last-axis component must be its exact negation (hence exactly
  // zero on the mid-plane). Same for the per-element strain energies.
  const GridMesh m = build_grid_3d(6, 3, 4);
  LoadCase lc;
  for (int kz = 0; kz <= m.nz; ++kz)
    for (int ky = 0; ky <= m.ny; ++ky) {
      const int n = 0 + (m.nx + 1) * (ky + (m.ny + 1) * kz);
      for (int c = 0; c < 3; ++c) lc.fixed_dofs.push_back(m.dof(n, c));
    }
  const int tip = m.nx + (m.nx + 1) * (1 + (m.ny + 1) * (m.nz / 2));
  lc.loads.push_back({m.dof(tip, 1), -1.0});
  const FemSolver solver(m, MaterialModel{}, lc);

  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> val(0.2, 0.9);
  std::vector<double> rho(m.num_elems);
  for (auto& r : rho) r = val(rng);
  for (int e = 0; e < m.num_elems; ++e) {
    int ix, iy, iz;
    m.elem_coords(e, ix, iy, iz);
    const int me = m.elem_index(ix, iy, m.nz - 1 - iz);
    if (me > e) rho[me] = rho[e];
  }

  const SystemState st = solver.solve(rho);
  for (int n = 0; n < m.num_nodes; ++n) {
    const int mn = mirror_node_last_axis(m, n);
    CHECK(st.u[m.dof(mn, 0)] == st.u[m.dof(n, 0)]);
    CHECK(st.u[m.dof(mn, 1)] == st.u[m.dof(n, 1)]);
    CHECK(st.u[m.dof(mn, 2)] == -st.u[m.dof(n, 2)]);
    if (mn == n) CHECK(st.u[m.dof(n, 2)] == 0.0);
  }
  std::vector<double> uku, ukv;
  solver.element_strain_energy_terms(st, uku, ukv);
  for (int e = 0; e < m.num_elems; ++e) {
    int ix, iy, iz;
    m.elem_coords(e, ix, iy, iz);
    CHECK(uku[m.elem_index(ix, iy, m.nz - 1 - iz)] == uku[e]);
  }
}

TEST_CASE("2d symmetric problems stay symmetric across the last axis too") {
  const GridMesh m = build_grid_2d(8, 6);
  LoadCase lc;
  for (int ky = 0; ky <= m.ny; ++ky) {
    const int n = 0 + (m.nx + 1) * ky;
    lc.fixed_dofs.push_back(m.dof(n, 0));
    lc.fixed_dofs.push_back(m.dof(n, 1));
  }
  // y-symmetric load pair pulling the right edge apart vertically
  const int lo = m.nx + (m.nx + 1) * 0;
  const int hi = m.nx + (m.nx + 1) * m.ny;
  lc.loads.push_back({m.dof(lo, 1), -1.0});
  lc.loads.push_back({m.dof(hi, 1), 1.0});
  const FemSolver solver(m, MaterialModel{}, lc);

  std::mt19937 rng(99);
  std::uniform_real_distribution<double> val(0.2, 0.9);
  std::vector<double> rho(m.num_elems);
  for (auto& r : rho) r = val(rng);
  for (int e = 0; e < m.num_elems; ++e) {
    int ix, iy, iz;
    m.elem_coords(e, ix, iy, iz);
    const int me = m.elem_index(ix, m.ny - 1 - iy);
    if (me > e) rho[me] = rho[e];
  }
  const SystemState st = solver.solve(rho);
  for (int n = 0; n < m.num_nodes; ++n) {
    const int mn = mirror_node_last_axis(m, n);
    CHECK(st.u[m.dof(mn, 0)] == st.u[m.dof(n, 0)]);
    CHECK(st.u[m.dof(mn, 1)] == -st.u[m.dof(n, 1)]);
  }
}
