#include "nfp/presets.hpp"

#include <stdexcept>

namespace nfp {

namespace {

int node_id_2d(const GridMesh& m, int kx, int ky) {
  return kx + (m.nx + 1) * ky;
}
int node_id_3d(const GridMesh& m, int kx, int ky, int kz) {
  return kx + (m.nx + 1) * (ky + (m.ny + 1) * kz);
}

// Left edge clamped, unit downward load at mid-height of the right edge.
LoadCase cantilever2d_loads(const GridMesh& m) {
  LoadCase lc;
  for (int ky = 0; ky <= m.ny; ++ky) {
    const int n = node_id_2d(m, 0, ky);
    lc.fixed_dofs.push_back(m.dof(n, 0));
    lc.fixed_dofs.push_back(m.dof(n, 1));
  }
  lc.loads.push_back({m.dof(node_id_2d(m, m.nx, m.ny / 2), 1), -1.0});
  return lc;
}

// Half mid-load beam: x-rollers on the left (symmetry) edge, downward load
// at the top-left corner, y-roller at the bottom-right corner.
LoadCase midload2d_loads(const GridMesh& m) {
  LoadCase lc;
  for (int ky = 0; ky <= m.ny; ++ky)
    lc.fixed_dofs.push_back(m.dof(node_id_2d(m, 0, ky), 0));
  lc.fixed_dofs.push_back(m.dof(node_id_2d(m, m.nx, 0), 1));
  lc.loads.push_back({m.dof(node_id_2d(m, 0, m.ny), 1), -1.0});
  return lc;
}

// Half displacement inverter: y-rollers on the bottom (symmetry) edge,
// input load +x at the bottom-left corner, output spring and dummy load on
// the bottom-right corner x DOF (desired motion opposite the input), and a
// clamped patch at the top-left corner.
LoadCase inverter2d_loads(const GridMesh& m, double spring) {
  LoadCase lc;
  for (int kx = 0; kx <= m.nx; ++kx)
    lc.fixed_dofs.push_back(m.dof(node_id_2d(m, kx, 0), 1));
  for (int ky = m.ny - 1; ky <= m.ny; ++ky) {
    const int n = node_id_2d(m, 0, ky);
    lc.fixed_dofs.push_back(m.dof(n, 0));
    lc.fixed_dofs.push_back(m.dof(n, 1));
  }
  const int in_dof = m.dof(node_id_2d(m, 0, 0), 0);
  const int out_dof = m.dof(node_id_2d(m, m.nx, 0), 0);
  lc.loads.push_back({in_dof, 1.0});
  lc.springs.push_back({out_dof, spring});
  lc.dummy_loads.push_back({out_dof, -1.0});
  return lc;
}

// Full-domain cantilever, clamped x=0 face, downward load at the mid-width
// bottom edge of the free face. Keeps the problem mirror-symmetric in z.
LoadCase cantilever3d_loads(const GridMesh& m) {
  LoadCase lc;
  for (int kz = 0; kz <= m.nz; ++kz)
    for (int ky = 0; ky <= m.ny; ++ky) {
      const int n = node_id_3d(m, 0, ky, kz);
      for (int c = 0; c < 3; ++c) lc.fixed_dofs.push_back(m.dof(n, c));
    }
  lc.loads.push_back({m.dof(node_id_3d(m, m.nx, 0, m.nz / 2), 1), -1.0});
  return lc;
}

// Half MBB beam: x-rollers on the symmetry face, load on the top edge of
// that face, y/z rollers along the bottom support edge.
LoadCase mbb3d_loads(const GridMesh& m) {
  LoadCase lc;
  for (int kz = 0; kz <= m.nz; ++kz)
    for (int ky = 0; ky <= m.ny; ++ky)
      lc.fixed_dofs.push_back(m.dof(node_id_3d(m, 0, ky, kz), 0));
  for (int kz = 0; kz <= m.nz; ++kz) {
    const int n = node_id_3d(m, m.nx, 0, kz);
    lc.fixed_dofs.push_back(m.dof(n, 1));
    lc.fixed_dofs.push_back(m.dof(n, 2));
  }
  lc.loads.push_back({m.dof(node_id_3d(m, 0, m.ny, m.nz / 2), 1), -1.0});
  return lc;
}

// Quarter displacement inverter: symmetry rollers on the y=0 and z=0 faces,
// input +x at the domain axis on the input face, output spring and dummy
// load on the axis of the far face, clamped strip on the outer rim of the
// input face.
LoadCase inverter3d_loads(const GridMesh& m, double spring) {
  LoadCase lc;
  for (int kz = 0; kz <= m.nz; ++kz)
    for (int kx = 0; kx <= m.nx; ++kx)
      lc.fixed_dofs.push_back(m.dof(node_id_3d(m, kx, 0, kz), 1));
  for (int ky = 0; ky <= m.ny; ++ky)
    for (int kx = 0; kx <= m.nx; ++kx)
      lc.fixed_dofs.push_back(m.dof(node_id_3d(m, kx, ky, 0), 2));
  for (int kz = 0; kz <= m.nz; ++kz) {
    const int n = node_id_3d(m, 0, m.ny, kz);
    for (int c = 0; c < 3; ++c) lc.fixed_dofs.push_back(m.dof(n, c));
  }
  for (int ky = 0; ky <= m.ny; ++ky) {
    const int n = node_id_3d(m, 0, ky, m.nz);
    for (int c = 0; c < 3; ++c) lc.fixed_dofs.push_back(m.dof(n, c));
  }
  const int in_dof = m.dof(node_id_3d(m, 0, 0, 0), 0);
  const int out_dof = m.dof(node_id_3d(m, m.nx, 0, 0), 0);
  lc.loads.push_back({in_dof, 1.0});
  lc.springs.push_back({out_dof, spring});
  lc.dummy_loads.push_back({out_dof, -1.0});
  return lc;
}

struct PresetDef {
  const char* name;
  int dim;
  int nx, ny, nz;
  double vf;
  ObjectiveKind kind;
};

constexpr PresetDef kPresets[] = {
    {"cantilever2d", 2, 120, 60, 1, 0.35, ObjectiveKind::Stiff},
    {"midload2d", 2, 120, 40, 1, 0.35, ObjectiveKind::Stiff},
    {"inverter2d", 2, 120, 60, 1, 0.20, ObjectiveKind::Compliant},
    {"cantilever3d", 3, 40, 20, 20, 0.25, ObjectiveKind::Stiff},
    {"mbb3d", 3, 45, 15, 15, 0.25, ObjectiveKind::Stiff},
    {"inverter3d", 3, 40, 20, 20, 0.15, ObjectiveKind::Compliant},
};

const PresetDef& find_preset(const std::string& name) {
  for (const auto& p : kPresets)
    if (name == p.name) return p;
  throw std::invalid_argument("unknown preset: " + name);
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : kPresets) names.emplace_back(p.name);
  return names;
}

LoadCase preset_loads(const std::string& name, const GridMesh& mesh,
                      double spring_stiffness) {
  const PresetDef& def = find_preset(name);
  if (mesh.dim != def.dim)
    throw std::invalid_argument("preset " + name + " needs a " +
                                std::to_string(def.dim) + "D mesh");
  if (name == "cantilever2d") return cantilever2d_loads(mesh);
  if (name == "midload2d") return midload2d_loads(mesh);
  if (name == "inverter2d") return inverter2d_loads(mesh, spring_stiffness);
  if (name == "cantilever3d") return cantilever3d_loads(mesh);
  if (name == "mbb3d") return mbb3d_loads(mesh);
  return inverter3d_loads(mesh, spring_stiffness);
}

ProblemSpec make_preset(const std::string& name, int nx, int ny, int nz) {
  const PresetDef& def = find_preset(name);
  ProblemSpec p;
  p.name = name;
  if (nx <= 0) nx = def.nx;
  if (ny <= 0) ny = def.ny;
  if (nz <= 0) nz = def.nz;
  p.mesh = build_grid(def.dim, nx, ny, def.dim == 3 ? nz : 1, 1.0, 1.0, 1.0);
  p.neighborhood = def.dim == 2 ? NeighborhoodSpec::square(2)
                                : NeighborhoodSpec::immediate();
  p.objective.kind = def.kind;
  p.objective.volume_fraction = def.vf;
  p.objective.scale = def.kind == ObjectiveKind::Stiff ? 1e3 : 1e5;
  p.loads = preset_loads(name, p.mesh, 100.0);
  return p;
}

}  // namespace nfp
