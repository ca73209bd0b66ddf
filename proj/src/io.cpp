#include "nfp/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nfp {

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_slice_csv(const std::vector<double>& rho, const GridMesh& mesh,
                     int iz, const std::filesystem::path& path) {
  auto f = open_out(path);
  for (int iy = 0; iy < mesh.ny; ++iy) {
    for (int ix = 0; ix < mesh.nx; ++ix) {
      if (ix) f << ',';
      f << g17(rho[mesh.elem_index(ix, iy, iz)]);
    }
    f << '\n';
  }
}

void write_slice_pgm(const std::vector<double>& rho, const GridMesh& mesh,
                     int iz, const std::filesystem::path& path) {
  auto f = open_out(path);
  f << "P2\n" << mesh.nx << ' ' << mesh.ny << "\n255\n";
  // Top grid row first so solid renders where it belongs visually.
  for (int iy = mesh.ny - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < mesh.nx; ++ix) {
      const double rho_e = rho[mesh.elem_index(ix, iy, iz)];
      const int pix = static_cast<int>(std::lround((1.0 - rho_e) * 255.0));
      f << pix << (ix + 1 < mesh.nx ? ' ' : '\n');
    }
  }
}

std::string slice_suffix(int iz) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_z%03d", iz);
  return buf;
}

}  // namespace

void write_density_csv(const std::vector<double>& rho, const GridMesh& mesh,
                       const std::string& basename, const std::string& dir) {
  const std::filesystem::path d(dir);
  if (mesh.dim == 2) {
    write_slice_csv(rho, mesh, 0, d / (basename + ".csv"));
  } else {
    for (int iz = 0; iz < mesh.nz; ++iz)
      write_slice_csv(rho, mesh, iz, d / (basename + slice_suffix(iz) + ".csv"));
  }
}

void write_density_pgm(const std::vector<double>& rho, const GridMesh& mesh,
                       const std::string& basename, const std::string& dir) {
  const std::filesystem::path d(dir);
  if (mesh.dim == 2) {
    write_slice_pgm(rho, mesh, 0, d / (basename + ".pgm"));
  } else {
    for (int iz = 0; iz < mesh.nz; ++iz)
      write_slice_pgm(rho, mesh, iz, d / (basename + slice_suffix(iz) + ".pgm"));
  }
}

void write_outputs(const OptimizationTrace& trace, const GridMesh& mesh,
                   const std::string& manifest_text, const std::string& dir) {
  const std::filesystem::path d(dir);
  std::filesystem::create_directories(d);

  write_density_csv(trace.final_density, mesh, "density_final", dir);
  write_density_pgm(trace.final_density, mesh, "density_final", dir);

  {
    auto f = open_out(d / "history.csv");
    f << "iter,f0,g1,grayness\n";
    for (const auto& r : trace.history)
      f << r.iter << ',' << g17(r.f0) << ',' << g17(r.g1) << ','
        << g17(r.grayness) << '\n';
  }
  {
    auto f = open_out(d / "manifest");
    f << manifest_text;
    f << "# stop_reason " << trace.stop_reason << '\n'
      << "# iterations " << trace.iterations << '\n';
  }
  for (const auto& [iter, rho] : trace.snapshots) {
    char base[32];
    std::snprintf(base, sizeof base, "density_iter_%06d", iter);
    write_density_csv(rho, mesh, base, dir);
    if (mesh.dim == 2) write_density_pgm(rho, mesh, base, dir);
  }
  if (mesh.dim == 3) {
    auto f = open_out(d / "solid_voxels.csv");
    f << "ix,iy,iz\n";
    for (int iz = 0; iz < mesh.nz; ++iz)
      for (int iy = 0; iy < mesh.ny; ++iy)
        for (int ix = 0; ix < mesh.nx; ++ix)
          if (trace.final_density[mesh.elem_index(ix, iy, iz)] >= 0.5)
            f << ix << ',' << iy << ',' << iz << '\n';
  }
}

std::vector<double> read_density_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::vector<double> out;
  std::string line;
  while (std::getline(f, line)) {
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) out.push_back(std::stod(cell));
  }
  return out;
}

}  // namespace nfp
