#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace nfp {

// Structured grid of bilinear quads (2D) or trilinear hexes (3D).
// Elements and nodes are numbered lexicographically, x fastest, so that
// output fields are reproducible bit-for-bit across runs.
struct GridMesh {
  int dim = 2;
  int nx = 0, ny = 0, nz = 1;       // elements per axis (nz == 1 in 2D)
  double hx = 1.0, hy = 1.0, hz = 1.0;

  int num_elems = 0;
  int num_nodes = 0;
  int num_dofs = 0;

  std::vector<std::array<double, 3>> node_coords;
  std::vector<std::array<int, 8>> conn;       // first 4 entries used in 2D
  std::vector<std::array<double, 3>> centroids;
  std::vector<double> elem_measure;           // area (2D) or volume (3D)

  int nodes_per_elem() const { return dim == 2 ? 4 : 8; }
  int dofs_per_elem() const { return dim * nodes_per_elem(); }
  int dof(int node, int comp) const { return node * dim + comp; }

  int elem_index(int ix, int iy, int iz = 0) const {
    return ix + nx * (iy + ny * iz);
  }
  void elem_coords(int e, int& ix, int& iy, int& iz) const {
    ix = e % nx;
    iy = (e / nx) % ny;
    iz = e / (nx * ny);
  }
};

GridMesh build_grid(int dim, int nx, int ny, int nz, double hx, double hy,
                    double hz);

inline GridMesh build_grid_2d(int nx, int ny, double hx = 1.0,
                              double hy = 1.0) {
  return build_grid(2, nx, ny, 1, hx, hy, 1.0);
}
inline GridMesh build_grid_3d(int nx, int ny, int nz, double hx = 1.0,
                              double hy = 1.0, double hz = 1.0) {
  return build_grid(3, nx, ny, nz, hx, hy, hz);
}

// Neighborhood shape selecting N_i around each element.
struct NeighborhoodSpec {
  enum class Shape { Square, Circle, Immediate };
  Shape shape = Shape::Square;
  int ls = 1;          // square: Chebyshev radius in element indices
  double r_min = 0.0;  // circle: centroid distance, inclusive

  static NeighborhoodSpec square(int ls) {
    return {Shape::Square, ls, 0.0};
  }
  static NeighborhoodSpec circle(double r_min) {
    return {Shape::Circle, 0, r_min};
  }
  static NeighborhoodSpec immediate() {
    return {Shape::Immediate, 0, 0.0};
  }
};

// Per-element neighbor lists in CSR form. weights[k] holds the normalized
// exponent A(Omega_j)/A(Gamma_i); each row sums to 1 even where the
// neighborhood is truncated by the domain boundary. The reverse table maps
// each j to the rows i that contain it, with the same weights, and is the
// exact transpose of the forward table.
struct NeighborhoodTable {
  int num_elems = 0;
  std::vector<std::int64_t> offsets;   // size num_elems + 1
  std::vector<int> indices;            // neighbor element ids j
  std::vector<double> weights;         // w_ij, row-normalized
  std::vector<double> measure;         // A(Gamma_i) per element

  std::vector<std::int64_t> rev_offsets;
  std::vector<int> rev_indices;        // owning rows i
  std::vector<double> rev_weights;     // w_ij again, transposed layout

  // Reflection-safe grouped layout consumed by the summation kernels.
  // Each row's neighbors are organized into groups of up to eight members
  // sharing the same absolute index offset (|dx|, |dy|, |dz|); within a
  // group, slot k holds the member whose offset signs match bit pattern k
  // (bit 0 = x, bit 1 = y, bit 2 = z), or index -1 / weight 0 when that
  // member is cut off by the domain boundary. Summed through the fixed
  // eight-slot tree, row sums for mirror-image elements agree bit-exactly,
  // so symmetric problems stay symmetric over long optimization runs.
  std::vector<std::int64_t> grp_offsets;     // size num_elems + 1, in groups
  std::vector<int> grp_indices;              // 8 per group
  std::vector<double> grp_weights;           // 8 per group
  std::vector<std::int64_t> rev_grp_offsets; // same layout, transposed table
  std::vector<int> rev_grp_indices;
  std::vector<double> rev_grp_weights;

  std::int64_t row_size(int i) const { return offsets[i + 1] - offsets[i]; }
};

NeighborhoodTable build_neighborhoods(const GridMesh& mesh,
                                      const NeighborhoodSpec& spec);

}  // namespace nfp
