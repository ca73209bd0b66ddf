#include "nfp/mesh.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace nfp {

GridMesh build_grid(int dim, int nx, int ny, int nz, double hx, double hy,
                    double hz) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("dim must be 2 or 3");
  if (dim == 2) nz = 1;
  if (nx < 1 || ny < 1 || nz < 1)
    throw std::invalid_argument("element counts must be >= 1");
  if (hx <= 0.0 || hy <= 0.0 || (dim == 3 && hz <= 0.0))
    throw std::invalid_argument("element edge lengths must be > 0");
  if (dim == 2) hz = 1.0;

  GridMesh m;
  m.dim = dim;
  m.nx = nx;
  m.ny = ny;
  m.nz = nz;
  m.hx = hx;
  m.hy = hy;
  m.hz = hz;
  m.num_elems = nx * ny * nz;

  const int nnx = nx + 1, nny = ny + 1, nnz = (dim == 3) ? nz + 1 : 1;
  m.num_nodes = nnx * nny * nnz;
  m.num_dofs = dim * m.num_nodes;

  m.node_coords.resize(m.num_nodes);
  for (int kz = 0; kz < nnz; ++kz)
    for (int ky = 0; ky < nny; ++ky)
      for (int kx = 0; kx < nnx; ++kx) {
        const int n = kx + nnx * (ky + nny * kz);
        m.node_coords[n] = {kx * hx, ky * hy, kz * hz};
      }

  auto node_id = [&](int kx, int ky, int kz) {
    return kx + nnx * (ky + nny * kz);
  };

  m.conn.resize(m.num_elems);
  m.centroids.resize(m.num_elems);
  m.elem_measure.resize(m.num_elems);
  const double measure = (dim == 2) ? hx * hy : hx * hy * hz;
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        const int e = m.elem_index(ix, iy, iz);
        if (dim == 2) {
          m.conn[e] = {node_id(ix, iy, 0), node_id(ix + 1, iy, 0),
                       node_id(ix + 1, iy + 1, 0), node_id(ix, iy + 1, 0),
                       -1, -1, -1, -1};
        } else {
          m.conn[e] = {node_id(ix, iy, iz),         node_id(ix + 1, iy, iz),
                       node_id(ix + 1, iy + 1, iz), node_id(ix, iy + 1, iz),
                       node_id(ix, iy, iz + 1),     node_id(ix + 1, iy, iz + 1),
                       node_id(ix + 1, iy + 1, iz + 1),
                       node_id(ix, iy + 1, iz + 1)};
        }
        m.centroids[e] = {(ix + 0.5) * hx, (iy + 0.5) * hy,
                          dim == 3 ? (iz + 0.5) * hz : 0.0};
        m.elem_measure[e] = measure;
      }
  return m;
}

namespace {

// Axis-aligned index window searched for candidate neighbors.
struct IndexWindow {
  int rx, ry, rz;
};

IndexWindow window_for(const GridMesh& mesh, const NeighborhoodSpec& spec) {
  switch (spec.shape) {
    case NeighborhoodSpec::Shape::Square:
      return {spec.ls, spec.ls, mesh.dim == 3 ? spec.ls : 0};
    case NeighborhoodSpec::Shape::Circle: {
      const int rx = static_cast<int>(std::floor(spec.r_min / mesh.hx));
      const int ry = static_cast<int>(std::floor(spec.r_min / mesh.hy));
      const int rz = static_cast<int>(std::floor(spec.r_min / mesh.hz));
      return {rx, ry, mesh.dim == 3 ? rz : 0};
    }
    case NeighborhoodSpec::Shape::Immediate:
      return {1, 1, mesh.dim == 3 ? 1 : 0};
  }
  return {0, 0, 0};
}

}  // namespace

NeighborhoodTable build_neighborhoods(const GridMesh& mesh,
                                      const NeighborhoodSpec& spec) {
  if (spec.shape == NeighborhoodSpec::Shape::Square && spec.ls < 0)
    throw std::invalid_argument("square neighborhood requires ls >= 0");
  if (spec.shape == NeighborhoodSpec::Shape::Circle && spec.r_min <= 0.0)
    throw std::invalid_argument("circle neighborhood requires r_min > 0");

  const IndexWindow win = window_for(mesh, spec);
  const double r2 = spec.r_min * spec.r_min;

  // Membership depends only on the absolute index offset, computed from
  // integer offsets so it is exactly invariant under axis reflections.
  auto member = [&](int adx, int ady, int adz) {
    if (spec.shape != NeighborhoodSpec::Shape::Circle) return true;
    const double d2 = (adx * mesh.hx) * (adx * mesh.hx) +
                      (ady * mesh.hy) * (ady * mesh.hy) +
                      (adz * mesh.hz) * (adz * mesh.hz);
    return d2 <= r2 * (1.0 + 1e-12);
  };

  NeighborhoodTable t;
  t.num_elems = mesh.num_elems;
  t.offsets.assign(mesh.num_elems + 1, 0);
  t.measure.assign(mesh.num_elems, 0.0);

  for (int e = 0; e < mesh.num_elems; ++e) {
    int ix, iy, iz;
    mesh.elem_coords(e, ix, iy, iz);
    for (int dz = -win.rz; dz <= win.rz; ++dz) {
      const int jz = iz + dz;
      if (jz < 0 || jz >= mesh.nz) continue;
      for (int dy = -win.ry; dy <= win.ry; ++dy) {
        const int jy = iy + dy;
        if (jy < 0 || jy >= mesh.ny) continue;
        for (int dx = -win.rx; dx <= win.rx; ++dx) {
          const int jx = ix + dx;
          if (jx < 0 || jx >= mesh.nx) continue;
          if (!member(std::abs(dx), std::abs(dy), std::abs(dz))) continue;
          const int j = mesh.elem_index(jx, jy, jz);
          t.indices.push_back(j);
          t.measure[e] += mesh.elem_measure[j];
          ++t.offsets[e + 1];
        }
      }
    }
  }
  for (int e = 0; e < mesh.num_elems; ++e) t.offsets[e + 1] += t.offsets[e];

  t.weights.resize(t.indices.size());
  for (int e = 0; e < mesh.num_elems; ++e)
    for (std::int64_t k = t.offsets[e]; k < t.offsets[e + 1]; ++k)
      t.weights[k] = mesh.elem_measure[t.indices[k]] / t.measure[e];

  // Transpose: rev row j lists every i with j in N_i, carrying w_ij.
  t.rev_offsets.assign(mesh.num_elems + 1, 0);
  for (int j : t.indices) ++t.rev_offsets[j + 1];
  for (int e = 0; e < mesh.num_elems; ++e)
    t.rev_offsets[e + 1] += t.rev_offsets[e];
  t.rev_indices.resize(t.indices.size());
  t.rev_weights.resize(t.indices.size());
  std::vector<std::int64_t> cursor(t.rev_offsets.begin(),
                                   t.rev_offsets.end() - 1);
  for (int i = 0; i < mesh.num_elems; ++i)
    for (std::int64_t k = t.offsets[i]; k < t.offsets[i + 1]; ++k) {
      const int j = t.indices[k];
      const std::int64_t p = cursor[j]++;
      t.rev_indices[p] = i;
      t.rev_weights[p] = t.weights[k];
    }

  // Grouped layout (see NeighborhoodTable). The reverse table exploits that
  // membership is a function of the absolute offset only, so j is in N_i
  // exactly when the offset passes the same test; the reverse weight is
  // normalized by the owning row i.
  auto build_grouped = [&](bool reverse, std::vector<std::int64_t>& goff,
                           std::vector<int>& gidx, std::vector<double>& gw) {
    goff.assign(mesh.num_elems + 1, 0);
    for (int e = 0; e < mesh.num_elems; ++e) {
      int ix, iy, iz;
      mesh.elem_coords(e, ix, iy, iz);
      for (int adz = 0; adz <= win.rz; ++adz)
        for (int ady = 0; ady <= win.ry; ++ady)
          for (int adx = 0; adx <= win.rx; ++adx) {
            if (!member(adx, ady, adz)) continue;
            int slot_idx[8];
            double slot_w[8];
            for (int k = 0; k < 8; ++k) slot_idx[k] = -1, slot_w[k] = 0.0;
            bool any = false;
            for (int sz = adz == 0 ? 0 : -1; sz <= 1; sz += 2) {
              const int jz = iz + sz * adz;
              if (jz < 0 || jz >= mesh.nz) continue;
              for (int sy = ady == 0 ? 0 : -1; sy <= 1; sy += 2) {
                const int jy = iy + sy * ady;
                if (jy < 0 || jy >= mesh.ny) continue;
                for (int sx = adx == 0 ? 0 : -1; sx <= 1; sx += 2) {
                  const int jx = ix + sx * adx;
                  if (jx < 0 || jx >= mesh.nx) continue;
                  const int j = mesh.elem_index(jx, jy, jz);
                  const int slot =
                      (sx > 0 ? 1 : 0) + (sy > 0 ? 2 : 0) + (sz > 0 ? 4 : 0);
                  slot_idx[slot] = j;
                  slot_w[slot] = reverse
                                     ? mesh.elem_measure[e] / t.measure[j]
                                     : mesh.elem_measure[j] / t.measure[e];
                  any = true;
                }
              }
            }
            if (!any) continue;
            gidx.insert(gidx.end(), slot_idx, slot_idx + 8);
            gw.insert(gw.end(), slot_w, slot_w + 8);
            ++goff[e + 1];
          }
    }
    for (int e = 0; e < mesh.num_elems; ++e) goff[e + 1] += goff[e];
  };
  build_grouped(false, t.grp_offsets, t.grp_indices, t.grp_weights);
  build_grouped(true, t.rev_grp_offsets, t.rev_grp_indices, t.rev_grp_weights);
  return t;
}

}  // namespace nfp
