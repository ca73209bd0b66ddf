#pragma once

#include <string>
#include <vector>

#include "nfp/driver.hpp"

namespace nfp {

// On-disk run outputs, plain text only:
//   density_final.csv   row-major rho, one CSV row per grid row (2D) or one
//                       file per z slice (3D), 17 significant digits
//   density_final.pgm   plain P2, pixel = round((1 - rho) * 255)
//   history.csv         iter,f0,g1,grayness
//   manifest            resolved config echo
//   solid_voxels.csv    3D only: ix,iy,iz of elements with rho >= 0.5
// Snapshot densities are written as density_iter_%06d.{csv,pgm}.
void write_outputs(const OptimizationTrace& trace, const GridMesh& mesh,
                   const std::string& manifest_text, const std::string& dir);

// Parses a density CSV written by write_outputs (2D single file or one
// slice of a 3D field).
std::vector<double> read_density_csv(const std::string& path);

void write_density_csv(const std::vector<double>& rho, const GridMesh& mesh,
                       const std::string& basename, const std::string& dir);
void write_density_pgm(const std::vector<double>& rho, const GridMesh& mesh,
                       const std::string& basename, const std::string& dir);

}  // namespace nfp
