#include "nfp/fem.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "nfp/kernels.hpp"

namespace nfp {

double simp_scale(double rho, const MaterialModel& material) {
  return std::pow(rho, material.simp_eta) * (1.0 - material.rho_min) +
         material.rho_min;
}

double simp_scale_derivative(double rho, const MaterialModel& material) {
  return material.simp_eta * (1.0 - material.rho_min) *
         std::pow(rho, material.simp_eta - 1.0);
}

namespace {

constexpr double kGaussPoint = 0.5773502691896257;  // 1/sqrt(3)

Eigen::MatrixXd quad_stiffness(double youngs, double poisson, double hx,
                               double hy) {
  // Plane stress, unit thickness.
  Eigen::Matrix3d d;
  const double c = youngs / (1.0 - poisson * poisson);
  d << c, c * poisson, 0.0,
       c * poisson, c, 0.0,
       0.0, 0.0, c * (1.0 - poisson) / 2.0;

  // Node order (-,-) (+,-) (+,+) (-,+) matching the mesh connectivity.
  const double xs[4] = {-1.0, 1.0, 1.0, -1.0};
  const double ys[4] = {-1.0, -1.0, 1.0, 1.0};
  const double jx = hx / 2.0, jy = hy / 2.0;

  Eigen::MatrixXd ke = Eigen::MatrixXd::Zero(8, 8);
  for (int gx = 0; gx < 2; ++gx)
    for (int gy = 0; gy < 2; ++gy) {
      const double xi = (gx == 0 ? -1.0 : 1.0) * kGaussPoint;
      const double eta = (gy == 0 ? -1.0 : 1.0) * kGaussPoint;
      Eigen::Matrix<double, 3, 8> b = Eigen::Matrix<double, 3, 8>::Zero();
      for (int a = 0; a < 4; ++a) {
        const double dn_dx = 0.25 * xs[a] * (1.0 + ys[a] * eta) / jx;
        const double dn_dy = 0.25 * ys[a] * (1.0 + xs[a] * xi) / jy;
        b(0, 2 * a) = dn_dx;
        b(1, 2 * a + 1) = dn_dy;
        b(2, 2 * a) = dn_dy;
        b(2, 2 * a + 1) = dn_dx;
      }
      ke += b.transpose() * d * b * (jx * jy);
    }
  return ke;
}

Eigen::MatrixXd hex_stiffness(double youngs, double poisson, double hx,
                              double hy, double hz) {
  Eigen::Matrix<double, 6, 6> d = Eigen::Matrix<double, 6, 6>::Zero();
  const double c = youngs / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) d(i, j) = i == j ? c * (1.0 - poisson) : c * poisson;
  for (int i = 3; i < 6; ++i) d(i, i) = c * (1.0 - 2.0 * poisson) / 2.0;

  const double xs[8] = {-1, 1, 1, -1, -1, 1, 1, -1};
  const double ys[8] = {-1, -1, 1, 1, -1, -1, 1, 1};
  const double zs[8] = {-1, -1, -1, -1, 1, 1, 1, 1};
  const double jx = hx / 2.0, jy = hy / 2.0, jz = hz / 2.0;

  Eigen::MatrixXd ke = Eigen::MatrixXd::Zero(24, 24);
  for (int gx = 0; gx < 2; ++gx)
    for (int gy = 0; gy < 2; ++gy)
      for (int gz = 0; gz < 2; ++gz) {
        const double xi = (gx == 0 ? -1.0 : 1.0) * kGaussPoint;
        const double eta = (gy == 0 ? -1.0 : 1.0) * kGaussPoint;
        const double zeta = (gz == 0 ? -1.0 : 1.0) * kGaussPoint;
        Eigen::Matrix<double, 6, 24> b = Eigen::Matrix<double, 6, 24>::Zero();
        for (int a = 0; a < 8; ++a) {
          const double dn_dx = 0.125 * xs[a] * (1.0 + ys[a] * eta) *
                               (1.0 + zs[a] * zeta) / jx;
          const double dn_dy = 0.125 * ys[a] * (1.0 + xs[a] * xi) *
                               (1.0 + zs[a] * zeta) / jy;
          const double dn_dz = 0.125 * zs[a] * (1.0 + xs[a] * xi) *
                               (1.0 + ys[a] * eta) / jz;
          // strain order: xx yy zz xy yz zx
          b(0, 3 * a) = dn_dx;
          b(1, 3 * a + 1) = dn_dy;
          b(2, 3 * a + 2) = dn_dz;
          b(3, 3 * a) = dn_dy;
          b(3, 3 * a + 1) = dn_dx;
          b(4, 3 * a + 1) = dn_dz;
          b(4, 3 * a + 2) = dn_dy;
          b(5, 3 * a) = dn_dz;
          b(5, 3 * a + 2) = dn_dx;
        }
        ke += b.transpose() * d * b * (jx * jy * jz);
      }
  return ke;
}

// Local node permutation induced by reflecting the element across one axis.
// Quad node order (-,-) (+,-) (+,+) (-,+); hexes append the z+ copy.
constexpr int kMirrorNodeQuad[2][4] = {{1, 0, 3, 2},   // x
                                       {3, 2, 1, 0}};  // y

int mirror_local_node(int dim, int axis, int a) {
  if (dim == 2) return kMirrorNodeQuad[axis][a];
  if (axis == 2) return a ^ 4;
  return (a & 4) | kMirrorNodeQuad[axis][a & 3];
}

// Local dof -> slot of the eight-slot mirror tree: slot bit t is the sign
// bit of the node along axis t, so axis reflections act as bit flips.
int node_tree_slot(int dim, int a) {
  static constexpr int quad_slot[4] = {0, 1, 3, 2};
  if (dim == 2) return quad_slot[a];
  return (a & 4) | quad_slot[a & 3];
}

// Enforce the exact algebraic symmetries of the element stiffness matrix:
// transpose symmetry and equivariance under the 2^dim axis reflections
// (each reflection permutes local nodes and flips the sign of that axis'
// displacement component). Quadrature builds these only to roundoff; the
// assembled operator inherits them bit-exactly from this canonicalization,
// which is what lets symmetric problems stay symmetric indefinitely.
Eigen::MatrixXd symmetrize_element_stiffness(const Eigen::MatrixXd& k0,
                                             int dim) {
  const int n = static_cast<int>(k0.rows());
  const int ngroup = 1 << dim;

  // signed permutation of local dofs for reflection combination g
  auto apply = [&](int g, int p, int& out, double& sign) {
    int a = p / dim;
    const int c = p % dim;
    double s = 1.0;
    for (int axis = 0; axis < dim; ++axis)
      if (g >> axis & 1) {
        a = mirror_local_node(dim, axis, a);
        if (c == axis) s = -s;
      }
    out = a * dim + c;
    sign = s;
  };

  Eigen::MatrixXd r(n, n);
  std::vector<char> done(static_cast<std::size_t>(n) * n, 0);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      if (done[p * n + q]) continue;
      // Reynolds average over reflections x transpose, in fixed order.
      double sum = 0.0;
      bool conflict = false;
      std::vector<std::tuple<int, int, double>> orbit;
      for (int g = 0; g < ngroup; ++g)
        for (int t = 0; t < 2; ++t) {
          int pp, qq;
          double sp, sq;
          apply(g, p, pp, sp);
          apply(g, q, qq, sq);
          if (t) std::swap(pp, qq);
          const double s = sp * sq;
          sum += s * k0(pp, qq);
          orbit.emplace_back(pp, qq, s);
        }
      // Entries reached with both signs are forced to vanish exactly.
      for (const auto& [pp, qq, s] : orbit)
        for (const auto& [p2, q2, s2] : orbit)
          if (pp == p2 && qq == q2 && s != s2) conflict = true;
      const double avg = conflict ? 0.0 : sum / (2.0 * ngroup);
      for (const auto& [pp, qq, s] : orbit) {
        r(pp, qq) = s * avg;
        done[pp * n + qq] = 1;
      }
    }
  return r;
}

struct Block2 {
  // row-major 2x2
  double a00, a01, a10, a11;
};

inline Block2 mul(const Block2& x, const Block2& y) {
  return {x.a00 * y.a00 + x.a01 * y.a10, x.a00 * y.a01 + x.a01 * y.a11,
          x.a10 * y.a00 + x.a11 * y.a10, x.a10 * y.a01 + x.a11 * y.a11};
}

inline Block2 mul_bt(const Block2& x, const Block2& y) {  // x * y^T
  return {x.a00 * y.a00 + x.a01 * y.a01, x.a00 * y.a10 + x.a01 * y.a11,
          x.a10 * y.a00 + x.a11 * y.a01, x.a10 * y.a10 + x.a11 * y.a11};
}

}  // namespace

Eigen::MatrixXd element_stiffness(int dim, double youngs, double poisson,
                                  double hx, double hy, double hz) {
  if (youngs <= 0.0 || poisson < 0.0 || poisson >= 0.5)
    throw std::invalid_argument("invalid material constants");
  if (hx <= 0.0 || hy <= 0.0 || (dim == 3 && hz <= 0.0))
    throw std::invalid_argument("degenerate element dimensions");
  if (dim == 2) return quad_stiffness(youngs, poisson, hx, hy);
  if (dim == 3) return hex_stiffness(youngs, poisson, hx, hy, hz);
  throw std::invalid_argument("dim must be 2 or 3");
}

// The linear solver is a banded block LDL^T factorization whose 2x2 blocks
// pair each free dof with its mirror image across the grid's last axis
// (y in 2D, z in 3D). Every inner product in the factorization and the
// triangular solves is a fixed sequence of two-term sums that a swap of the
// pair members maps onto itself, so for problems whose supports, loads and
// densities are mirror-symmetric the displacement field is symmetric to the
// last bit - roundoff never seeds a symmetry break that the optimizer could
// amplify. Dofs without a free partner (mid-plane nodes, asymmetric
// supports) occupy a block alone with a decoupled unit dummy in the second
// slot. For non-symmetric problems the pairing is just an ordering choice.
struct FemSolver::Impl {
  GridMesh mesh;
  MaterialModel material;
  LoadCase loads;
  Eigen::MatrixXd k0;

  std::vector<int> full2red;  // -1 for fixed DOFs
  int num_free = 0;
  Eigen::VectorXd f_red;      // real loads
  Eigen::VectorXd fd_red;     // dummy loads

  // Pair-block structure over reduced dofs.
  int num_classes = 0;
  int bw = 0;                              // class half-bandwidth
  std::vector<int> red2class;              // reduced dof -> class
  std::vector<int> red2slot;               // reduced dof -> 0/1
  std::vector<std::array<int, 2>> class_dofs;  // reduced dof or -1 (dummy)

  // Band storage, blocks row-major: ((i*(bw+1) + (i-j))*4 + sa*2 + sb).
  mutable std::vector<double> band;
  mutable std::vector<Block2> dinv;        // inverse diagonal blocks

  // One record per stored scalar entry of the lower block band. The up to
  // eight contributing elements occupy mirror-tree slots keyed by which
  // side of each node the element lies on, so mirror-image entries sum
  // their contributions through sibling-swapped, bit-identical trees.
  struct EntryRec {
    std::int64_t pos;
    std::int64_t twin;  // diagonal-block transposed copy, or -1
    std::array<int, 8> elem;
    std::array<int, 8> k0pos;
  };
  std::vector<EntryRec> entries;
  std::vector<std::pair<std::int64_t, double>> spring_entries;
  std::vector<std::int64_t> pad_positions;  // dummy unit diagonals

  mutable std::vector<double> scale;  // per-element SIMP factors

  std::int64_t block_pos(int i, int j) const {
    return (static_cast<std::int64_t>(i) * (bw + 1) + (i - j)) * 4;
  }

  int mirror_node(int n) const {
    const int nnx = mesh.nx + 1, nny = mesh.ny + 1;
    const int kx = n % nnx, ky = (n / nnx) % nny, kz = n / (nnx * nny);
    if (mesh.dim == 3)
      return kx + nnx * (ky + nny * (mesh.nz - kz));
    return kx + nnx * (mesh.ny - ky);
  }

  void build_classes();
  void build_entries();
  void factorize() const;
  void solve_inplace(std::vector<double>& xy) const;  // class-slot layout
};

void FemSolver::Impl::build_classes() {
  const int nnx = mesh.nx + 1, nny = mesh.ny + 1;
  red2class.assign(num_free, -1);
  red2slot.assign(num_free, 0);

  struct Cand {
    std::int64_t key;
    int d0, d1;  // reduced dofs; d1 = -1 for singles
  };
  std::vector<Cand> cands;
  for (int d = 0; d < mesh.num_dofs; ++d) {
    const int r = full2red[d];
    if (r < 0) continue;
    const int n = d / mesh.dim, c = d % mesh.dim;
    const int pn = mirror_node(n);
    const int pd = pn * mesh.dim + c;
    const int pr = full2red[pd];

    const int kx = n % nnx, ky = (n / nnx) % nny, kz = n / (nnx * nny);
    int lvl, d0 = r, d1 = -1;
    if (mesh.dim == 3)
      lvl = std::min(kz, mesh.nz - kz);
    else
      lvl = std::min(ky, mesh.ny - ky);
    if (pd != d && pr >= 0) {
      // paired: created once, from the lower-coordinate member
      const bool low = (mesh.dim == 3) ? (kz < mesh.nz - kz) : (ky < mesh.ny - ky);
      if (!low) continue;
      d1 = pr;
    }
    const std::int64_t key =
        mesh.dim == 3
            ? ((static_cast<std::int64_t>(kx) * nny + ky) *
                   (std::max(mesh.ny, mesh.nz) + 2) +
               lvl) * 4 + c
            : (static_cast<std::int64_t>(kx) *
                   (mesh.ny + 2) +
               lvl) * 4 + c;
    cands.push_back({key, d0, d1});
  }
  std::sort(cands.begin(), cands.end(),
            [](const Cand& a, const Cand& b) { return a.key < b.key; });

  num_classes = static_cast<int>(cands.size());
  class_dofs.resize(num_classes);
  for (int i = 0; i < num_classes; ++i) {
    class_dofs[i] = {cands[i].d0, cands[i].d1};
    red2class[cands[i].d0] = i;
    red2slot[cands[i].d0] = 0;
    if (cands[i].d1 >= 0) {
      red2class[cands[i].d1] = i;
      red2slot[cands[i].d1] = 1;
    }
  }

  // Bandwidth from the actual coupling pattern.
  bw = 0;
  const int npe = mesh.nodes_per_elem();
  for (int e = 0; e < mesh.num_elems; ++e)
    for (int a = 0; a < npe; ++a)
      for (int b = 0; b < npe; ++b)
        for (int c1 = 0; c1 < mesh.dim; ++c1)
          for (int c2 = 0; c2 < mesh.dim; ++c2) {
            const int ra = full2red[mesh.dof(mesh.conn[e][a], c1)];
            const int rb = full2red[mesh.dof(mesh.conn[e][b], c2)];
            if (ra >= 0 && rb >= 0)
              bw = std::max(bw, std::abs(red2class[ra] - red2class[rb]));
          }
}

void FemSolver::Impl::build_entries() {
  const int npe = mesh.nodes_per_elem();
  const int ndof_e = mesh.dofs_per_elem();
  const int nnx = mesh.nx + 1, nny = mesh.ny + 1;

  auto node_xyz = [&](int n, int& kx, int& ky, int& kz) {
    kx = n % nnx;
    ky = (n / nnx) % nny;
    kz = n / (nnx * nny);
  };

  std::unordered_map<std::int64_t, int> by_pos;
  by_pos.reserve(static_cast<std::size_t>(num_classes) * 40);

  std::vector<int> enodes(npe);
  for (int e = 0; e < mesh.num_elems; ++e) {
    int ex, ey, ez;
    mesh.elem_coords(e, ex, ey, ez);
    for (int a = 0; a < npe; ++a) enodes[a] = mesh.conn[e][a];
    for (int la = 0; la < ndof_e; ++la) {
      const int da = mesh.dof(enodes[la / mesh.dim], la % mesh.dim);
      const int ra = full2red[da];
      if (ra < 0) continue;
      for (int lb = 0; lb < ndof_e; ++lb) {
        const int db = mesh.dof(enodes[lb / mesh.dim], lb % mesh.dim);
        const int rb = full2red[db];
        if (rb < 0) continue;
        const int ci = red2class[ra], cj = red2class[rb];
        const int sa = red2slot[ra], sb = red2slot[rb];
        std::int64_t pos, twin = -1;
        if (ci > cj) {
          pos = block_pos(ci, cj) + sa * 2 + sb;
        } else if (ci == cj) {
          if (sa > sb) continue;  // transposed copy handled via twin
          pos = block_pos(ci, ci) + sa * 2 + sb;
          if (sa < sb) twin = block_pos(ci, ci) + sb * 2 + sa;
        } else {
          continue;  // upper triangle: covered by the (lb, la) visit
        }
        auto [it, inserted] = by_pos.try_emplace(
            pos, static_cast<int>(entries.size()));
        if (inserted) {
          EntryRec rec;
          rec.pos = pos;
          rec.twin = twin;
          rec.elem.fill(-1);
          rec.k0pos.fill(0);
          entries.push_back(rec);
        }
        EntryRec& rec = entries[it->second];
        // Mirror-tree slot of this element relative to the dof pair: along
        // each axis where the two nodes coincide, two element layers can
        // contribute and the bit says which; otherwise the single layer
        // takes bit 0. Reflections swap exactly the two-layer bits.
        int ax, ay, az, bx, by, bz;
        node_xyz(enodes[la / mesh.dim], ax, ay, az);
        node_xyz(enodes[lb / mesh.dim], bx, by, bz);
        const int bitx = (ax == bx && ex == ax) ? 1 : 0;
        const int bity = (ay == by && ey == ay) ? 1 : 0;
        const int bitz = (mesh.dim == 3 && az == bz && ez == az) ? 1 : 0;
        const int slot = bitx + 2 * bity + 4 * bitz;
        rec.elem[slot] = e;
        rec.k0pos[slot] = la * ndof_e + lb;
      }
    }
  }

  spring_entries.clear();
  for (const auto& s : loads.springs) {
    const int r = full2red[s.dof];
    if (r < 0) continue;
    const int ci = red2class[r], si = red2slot[r];
    spring_entries.emplace_back(block_pos(ci, ci) + si * 3, s.stiffness);
  }
  pad_positions.clear();
  for (int i = 0; i < num_classes; ++i)
    if (class_dofs[i][1] < 0) pad_positions.push_back(block_pos(i, i) + 3);

  band.assign(static_cast<std::size_t>(num_classes) * (bw + 1) * 4, 0.0);
  dinv.resize(num_classes);
}

void FemSolver::Impl::factorize() const {
  const int m = num_classes;
  const std::int64_t stride = static_cast<std::int64_t>(bw + 1) * 4;
  double* bd = band.data();
  for (int i = 0; i < m; ++i) {
    const int kmin = std::max(0, i - bw);
    double* rowi = bd + i * stride;
    for (int j = kmin; j <= i; ++j) {
      double* sij = rowi + static_cast<std::int64_t>(i - j) * 4;
      Block2 s{sij[0], sij[1], sij[2], sij[3]};
      const double* rowj = bd + static_cast<std::int64_t>(j) * stride;
      for (int k = kmin; k < j; ++k) {
        const double* lik = rowi + static_cast<std::int64_t>(i - k) * 4;
        const double* ljk = rowj + static_cast<std::int64_t>(j - k) * 4;
        const double* dk = bd + static_cast<std::int64_t>(k) * stride;
        const Block2 w =
            mul({lik[0], lik[1], lik[2], lik[3]}, {dk[0], dk[1], dk[2], dk[3]});
        const Block2 t = mul_bt(w, {ljk[0], ljk[1], ljk[2], ljk[3]});
        s.a00 -= t.a00;
        s.a01 -= t.a01;
        s.a10 -= t.a10;
        s.a11 -= t.a11;
      }
      if (j < i) {
        const Block2 l = mul(s, dinv[j]);
        sij[0] = l.a00;
        sij[1] = l.a01;
        sij[2] = l.a10;
        sij[3] = l.a11;
      } else {
        // D_i stays in the band; invert by the adjugate so a swap of the
        // pair members maps the arithmetic onto itself exactly.
        const double det = s.a00 * s.a11 - s.a01 * s.a10;
        if (!(det > 0.0) || !(s.a00 > 0.0))
          throw std::runtime_error(
              "stiffness factorization failed: system is singular or "
              "indefinite (insufficient supports or negative spring)");
        dinv[i] = {s.a11 / det, -s.a01 / det, -s.a10 / det, s.a00 / det};
        sij[0] = s.a00;
        sij[1] = s.a01;
        sij[2] = s.a10;
        sij[3] = s.a11;
      }
    }
  }
}

void FemSolver::Impl::solve_inplace(std::vector<double>& xy) const {
  const int m = num_classes;
  const std::int64_t stride = static_cast<std::int64_t>(bw + 1) * 4;
  const double* bd = band.data();
  // forward: y = L^-1 b
  for (int i = 0; i < m; ++i) {
    const int kmin = std::max(0, i - bw);
    const double* rowi = bd + static_cast<std::int64_t>(i) * stride;
    double y0 = xy[2 * i], y1 = xy[2 * i + 1];
    for (int k = kmin; k < i; ++k) {
      const double* l = rowi + static_cast<std::int64_t>(i - k) * 4;
      const double x0 = xy[2 * k], x1 = xy[2 * k + 1];
      y0 -= l[0] * x0 + l[1] * x1;
      y1 -= l[2] * x0 + l[3] * x1;
    }
    xy[2 * i] = y0;
    xy[2 * i + 1] = y1;
  }
  // diagonal: z = D^-1 y
  for (int i = 0; i < m; ++i) {
    const Block2& v = dinv[i];
    const double y0 = xy[2 * i], y1 = xy[2 * i + 1];
    xy[2 * i] = v.a00 * y0 + v.a01 * y1;
    xy[2 * i + 1] = v.a10 * y0 + v.a11 * y1;
  }
  // backward: x = L^-T z
  for (int i = m - 1; i >= 0; --i) {
    const int kmax = std::min(m - 1, i + bw);
    double x0 = xy[2 * i], x1 = xy[2 * i + 1];
    for (int k = i + 1; k <= kmax; ++k) {
      const double* l =
          bd + (static_cast<std::int64_t>(k) * (bw + 1) + (k - i)) * 4;
      const double z0 = xy[2 * k], z1 = xy[2 * k + 1];
      // L_ki^T applied: columns become rows
      x0 -= l[0] * z0 + l[2] * z1;
      x1 -= l[1] * z0 + l[3] * z1;
    }
    xy[2 * i] = x0;
    xy[2 * i + 1] = x1;
  }
}

FemSolver::FemSolver(const GridMesh& mesh, MaterialModel material,
                     LoadCase loads)
    : impl_(std::make_unique<Impl>()) {
  Impl& im = *impl_;
  im.mesh = mesh;
  im.material = material;
  im.loads = std::move(loads);

  auto check_dof = [&](int dof) {
    if (dof < 0 || dof >= mesh.num_dofs)
      throw std::invalid_argument("DOF index out of range");
  };
  for (int d : im.loads.fixed_dofs) check_dof(d);
  for (const auto& l : im.loads.loads) check_dof(l.dof);
  for (const auto& l : im.loads.dummy_loads) check_dof(l.dof);
  for (const auto& s : im.loads.springs) {
    check_dof(s.dof);
    if (s.stiffness < 0.0)
      throw std::invalid_argument("spring stiffness must be >= 0");
  }

  im.k0 = symmetrize_element_stiffness(
      element_stiffness(mesh.dim, material.youngs, material.poisson, mesh.hx,
                        mesh.hy, mesh.hz),
      mesh.dim);

  im.full2red.assign(mesh.num_dofs, 0);
  for (int d : im.loads.fixed_dofs) im.full2red[d] = -1;
  for (int d = 0; d < mesh.num_dofs; ++d)
    if (im.full2red[d] >= 0) im.full2red[d] = im.num_free++;

  im.f_red = Eigen::VectorXd::Zero(im.num_free);
  for (const auto& l : im.loads.loads) {
    const int r = im.full2red[l.dof];
    if (r >= 0) im.f_red[r] += l.value;
  }
  im.fd_red = Eigen::VectorXd::Zero(im.num_free);
  for (const auto& l : im.loads.dummy_loads) {
    const int r = im.full2red[l.dof];
    if (r >= 0) im.fd_red[r] += l.value;
  }

  im.build_classes();
  im.build_entries();
}

FemSolver::~FemSolver() = default;
FemSolver::FemSolver(FemSolver&&) noexcept = default;

SystemState FemSolver::solve(const std::vector<double>& rho) const {
  Impl& im = *impl_;
  const GridMesh& mesh = im.mesh;
  if (static_cast<int>(rho.size()) != mesh.num_elems)
    throw std::invalid_argument("solve: density size mismatch");

  im.scale.resize(mesh.num_elems);
  for (int e = 0; e < mesh.num_elems; ++e)
    im.scale[e] = simp_scale(rho[e], im.material);

  std::fill(im.band.begin(), im.band.end(), 0.0);
  const double* k0 = im.k0.data();
  for (const auto& rec : im.entries) {
    double v[8];
    for (int k = 0; k < 8; ++k) {
      const int e = rec.elem[k];
      // k0 is column-major but exactly symmetric, so row-major reads match.
      v[k] = e >= 0 ? im.scale[e] * k0[rec.k0pos[k]] : 0.0;
    }
    const double s = kernels::mirror_tree8(v);
    im.band[rec.pos] = s;
    if (rec.twin >= 0) im.band[rec.twin] = s;
  }
  for (const auto& [pos, ks] : im.spring_entries) im.band[pos] += ks;
  for (const std::int64_t pos : im.pad_positions) im.band[pos] = 1.0;

  im.factorize();

  auto to_classes = [&](const Eigen::VectorXd& b) {
    std::vector<double> xy(static_cast<std::size_t>(im.num_classes) * 2, 0.0);
    for (int i = 0; i < im.num_classes; ++i)
      for (int s = 0; s < 2; ++s)
        if (im.class_dofs[i][s] >= 0) xy[2 * i + s] = b[im.class_dofs[i][s]];
    return xy;
  };
  auto from_classes = [&](const std::vector<double>& xy) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(im.num_free);
    for (int i = 0; i < im.num_classes; ++i)
      for (int s = 0; s < 2; ++s)
        if (im.class_dofs[i][s] >= 0) x[im.class_dofs[i][s]] = xy[2 * i + s];
    return x;
  };

  // Residual of the original element-level operator (the band holds the
  // factorization afterwards, so recompute K u element by element).
  const int ndof_e = mesh.dofs_per_elem();
  const int npe = mesh.nodes_per_elem();
  auto residual = [&](const Eigen::VectorXd& x_red,
                      const Eigen::VectorXd& b_red) {
    Eigen::VectorXd x_full = Eigen::VectorXd::Zero(mesh.num_dofs);
    for (int d = 0; d < mesh.num_dofs; ++d)
      if (im.full2red[d] >= 0) x_full[d] = x_red[im.full2red[d]];
    Eigen::VectorXd r_full = Eigen::VectorXd::Zero(mesh.num_dofs);
    Eigen::VectorXd ue(ndof_e);
    for (int e = 0; e < mesh.num_elems; ++e) {
      for (int a = 0; a < npe; ++a)
        for (int c = 0; c < mesh.dim; ++c)
          ue[a * mesh.dim + c] = x_full[mesh.dof(mesh.conn[e][a], c)];
      const Eigen::VectorXd ke_u = im.scale[e] * (im.k0 * ue);
      for (int a = 0; a < npe; ++a)
        for (int c = 0; c < mesh.dim; ++c)
          r_full[mesh.dof(mesh.conn[e][a], c)] += ke_u[a * mesh.dim + c];
    }
    for (const auto& s : im.loads.springs)
      r_full[s.dof] += s.stiffness * x_full[s.dof];
    double num = 0.0;
    for (int d = 0; d < mesh.num_dofs; ++d)
      if (im.full2red[d] >= 0) {
        const double rr = r_full[d] - b_red[im.full2red[d]];
        num += rr * rr;
      }
    const double den = b_red.norm();
    return den > 0.0 ? std::sqrt(num) / den : 0.0;
  };

  SystemState st;
  std::vector<double> xy = to_classes(im.f_red);
  im.solve_inplace(xy);
  const Eigen::VectorXd u_red = from_classes(xy);
  st.residual_u = residual(u_red, im.f_red);
  if (st.residual_u > 1e-9)
    throw std::runtime_error("solve residual exceeds 1e-9");

  st.u = Eigen::VectorXd::Zero(mesh.num_dofs);
  for (int d = 0; d < mesh.num_dofs; ++d)
    if (im.full2red[d] >= 0) st.u[d] = u_red[im.full2red[d]];
  st.compliance = u_red.dot(im.f_red);

  if (im.loads.has_dummy()) {
    std::vector<double> xyv = to_classes(im.fd_red);
    im.solve_inplace(xyv);
    const Eigen::VectorXd v_red = from_classes(xyv);
    st.residual_v = residual(v_red, im.fd_red);
    if (st.residual_v > 1e-9)
      throw std::runtime_error("dummy-load solve residual exceeds 1e-9");
    st.v = Eigen::VectorXd::Zero(mesh.num_dofs);
    for (int d = 0; d < mesh.num_dofs; ++d)
      if (im.full2red[d] >= 0) st.v[d] = v_red[im.full2red[d]];
    st.mutual = u_red.dot(im.fd_red);
  }
  return st;
}

void FemSolver::element_strain_energy_terms(const SystemState& state,
                                            std::vector<double>& u_k0_u,
                                            std::vector<double>& u_k0_v) const {
  const Impl& im = *impl_;
  const GridMesh& mesh = im.mesh;
  const int ndof_e = mesh.dofs_per_elem();
  const int npe = mesh.nodes_per_elem();
  const bool dual = state.v.size() > 0;

  u_k0_u.assign(mesh.num_elems, 0.0);
  u_k0_v.assign(mesh.num_elems, 0.0);

  int slot_of[8];
  for (int a = 0; a < npe; ++a) slot_of[a] = node_tree_slot(mesh.dim, a);

  // Quadratic forms summed through the mirror tree over local nodes so
  // mirror-image elements produce bit-identical energies.
  std::vector<double> ue(ndof_e), ve(ndof_e), m(ndof_e);
  for (int e = 0; e < mesh.num_elems; ++e) {
    for (int a = 0; a < npe; ++a)
      for (int c = 0; c < mesh.dim; ++c) {
        const int d = mesh.dof(mesh.conn[e][a], c);
        ue[a * mesh.dim + c] = state.u[d];
        if (dual) ve[a * mesh.dim + c] = state.v[d];
      }
    for (int p = 0; p < ndof_e; ++p) {
      double acc = 0.0;
      for (int c = 0; c < mesh.dim; ++c) {
        double v[8] = {0, 0, 0, 0, 0, 0, 0, 0};
        for (int a = 0; a < npe; ++a) {
          const int q = a * mesh.dim + c;
          v[slot_of[a]] = im.k0(p, q) * ue[q];
        }
        acc += kernels::mirror_tree8(v);
      }
      m[p] = acc;
    }
    double accu = 0.0, accv = 0.0;
    for (int c = 0; c < mesh.dim; ++c) {
      double vu[8] = {0, 0, 0, 0, 0, 0, 0, 0};
      double vv[8] = {0, 0, 0, 0, 0, 0, 0, 0};
      for (int a = 0; a < npe; ++a) {
        const int q = a * mesh.dim + c;
        vu[slot_of[a]] = ue[q] * m[q];
        if (dual) vv[slot_of[a]] = ve[q] * m[q];
      }
      accu += kernels::mirror_tree8(vu);
      if (dual) accv += kernels::mirror_tree8(vv);
    }
    u_k0_u[e] = accu;
    if (dual) u_k0_v[e] = accv;
  }
}

const Eigen::MatrixXd& FemSolver::k0() const { return impl_->k0; }
const MaterialModel& FemSolver::material() const { return impl_->material; }
const LoadCase& FemSolver::loads() const { return impl_->loads; }
const GridMesh& FemSolver::mesh() const { return impl_->mesh; }

SystemState assemble_and_solve(const GridMesh& mesh,
                               const std::vector<double>& rho,
                               const MaterialModel& material,
                               const LoadCase& loads) {
  return FemSolver(mesh, material, loads).solve(rho);
}

}  // namespace nfp
