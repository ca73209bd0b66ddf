#include "nfp/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nfp/io.hpp"
#include "nfp/presets.hpp"

namespace nfp {

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 1.0;
  return sab / std::sqrt(saa * sbb);
}

// Nearest-centroid resampling of a fine field onto a coarse grid.
DensityField resample_to(const GridMesh& coarse, const GridMesh& fine,
                         const DensityField& rho_fine) {
  DensityField out(coarse.num_elems);
  for (int e = 0; e < coarse.num_elems; ++e) {
    const auto& x = coarse.centroids[e];
    int jx = std::clamp(static_cast<int>(x[0] / fine.hx), 0, fine.nx - 1);
    int jy = std::clamp(static_cast<int>(x[1] / fine.hy), 0, fine.ny - 1);
    out[e] = rho_fine[fine.elem_index(jx, jy)];
  }
  return out;
}

double spring_of(const ProblemSpec& p) {
  return p.loads.springs.empty() ? 100.0 : p.loads.springs.front().stiffness;
}

}  // namespace

MeshIndependenceReport run_mesh_independence(
    const ProblemSpec& base, const std::vector<MeshRefinement>& refinements) {
  if (refinements.size() < 2)
    throw std::invalid_argument("mesh independence needs >= 2 refinements");
  const double width = base.mesh.nx * base.mesh.hx;
  const double height = base.mesh.ny * base.mesh.hy;
  for (const auto& r : refinements) {
    if (r.nx < 1 || r.ny < 1 || r.ls < 0)
      throw std::invalid_argument("bad refinement");
    // Element aspect must match the base discretization, otherwise the
    // refinement changes the physical problem.
    if (r.nx * base.mesh.ny != r.ny * base.mesh.nx)
      throw std::invalid_argument(
          "refinement changes the physical domain aspect");
  }

  MeshIndependenceReport rep;
  for (const auto& r : refinements) {
    ProblemSpec p = base;
    p.mesh = build_grid_2d(r.nx, r.ny, width / r.nx, height / r.ny);
    p.loads = preset_loads(base.name, p.mesh, spring_of(base));
    p.neighborhood = NeighborhoodSpec::square(r.ls);
    const OptimizationTrace trace = run(p);
    MeshIndependenceVariant v;
    v.refinement = r;
    v.mesh = p.mesh;
    v.f0 = trace.final_f0;
    v.grayness = trace.history.back().grayness;
    v.iterations = trace.iterations;
    v.density = trace.final_density;
    rep.variants.push_back(std::move(v));
  }

  // Compare on the coarsest grid.
  std::size_t coarsest = 0;
  for (std::size_t k = 1; k < rep.variants.size(); ++k)
    if (rep.variants[k].mesh.num_elems <
        rep.variants[coarsest].mesh.num_elems)
      coarsest = k;
  const GridMesh& cg = rep.variants[coarsest].mesh;
  for (auto& v : rep.variants)
    v.resampled = resample_to(cg, v.mesh, v.density);

  const std::size_t m = rep.variants.size();
  rep.correlation.assign(m, std::vector<double>(m, 1.0));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b)
      rep.correlation[a][b] = rep.correlation[b][a] =
          pearson(rep.variants[a].resampled, rep.variants[b].resampled);
  return rep;
}

ProjectionCompareReport run_projection_compare(
    const ProblemSpec& problem, const std::vector<double>& g_tols,
    const ProjectionSettings& schedule) {
  ProjectionCompareReport rep;

  ProblemSpec nfp = problem;
  nfp.method = DensityMethod::Nfp;
  if (!g_tols.empty())
    nfp.optimizer.g_tol = *std::min_element(g_tols.begin(), g_tols.end());
  rep.nfp = run(nfp);

  ProblemSpec proj = problem;
  proj.method = DensityMethod::Projection;
  proj.projection = schedule;
  proj.optimizer.g_tol.reset();  // run the full budget; it may plateau
  rep.projection = run(proj);

  for (const auto& rec : rep.projection.history)
    if (rec.iter > 0)
      rep.projection_min_grayness =
          std::min(rep.projection_min_grayness, rec.grayness);

  for (double tol : g_tols) {
    GraynessMilestone ms;
    ms.g_tol = tol;
    ms.nfp_iteration = rep.nfp.first_iteration_below(tol);
    ms.projection_iteration = rep.projection.first_iteration_below(tol);
    rep.milestones.push_back(ms);
  }
  return rep;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, sep))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

MeshRefinement parse_refinement(const std::string& s) {
  // 100x50:2
  const auto colon = s.find(':');
  const auto x = s.find('x');
  if (colon == std::string::npos || x == std::string::npos || x > colon)
    throw std::invalid_argument("bad variant '" + s + "', expected NXxNY:LS");
  MeshRefinement r;
  r.nx = std::stoi(s.substr(0, x));
  r.ny = std::stoi(s.substr(x + 1, colon - x - 1));
  r.ls = std::stoi(s.substr(colon + 1));
  return r;
}

void write_sweep_report(const std::vector<SweepEntry>& entries,
                        const std::filesystem::path& dir) {
  std::ofstream f(dir / "report.csv");
  f << "label,f0,g1,grayness,iterations,stop_reason\n";
  char buf[128];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", e.f0, e.g1,
                  e.grayness);
    f << e.label << ',' << buf << ',' << e.iterations << ',' << e.stop_reason
      << '\n';
  }
}

SweepEntry summarize(const std::string& label, const OptimizationTrace& t) {
  const auto& last = t.history.back();
  return {label, last.f0, last.g1, last.grayness, t.iterations,
          t.stop_reason};
}

}  // namespace

int run_study_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open study config: " + path);

  std::string study_kind;
  std::vector<MeshRefinement> refinements;
  std::vector<double> g_tols, vf_list, s_list;
  std::vector<int> ls_list;
  std::vector<std::string> functions;
  std::ostringstream base_text;

  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto eq = line.find('=');
    std::string key =
        eq == std::string::npos ? "" : line.substr(0, line.find('='));
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t\r") + 1);
    const std::string val =
        eq == std::string::npos ? "" : line.substr(eq + 1);
    if (key == "study") study_kind = val;
    else if (key == "variants")
      for (const auto& tok : split(val, ',')) refinements.push_back(parse_refinement(tok));
    else if (key == "g_tol_list")
      for (const auto& tok : split(val, ',')) g_tols.push_back(std::stod(tok));
    else if (key == "vf_list")
      for (const auto& tok : split(val, ',')) vf_list.push_back(std::stod(tok));
    else if (key == "ls_list")
      for (const auto& tok : split(val, ',')) ls_list.push_back(std::stoi(tok));
    else if (key == "S_list")
      for (const auto& tok : split(val, ',')) s_list.push_back(std::stod(tok));
    else if (key == "functions")
      functions = split(val, ',');
    else
      base_text << line << '\n';
  }
  if (study_kind.empty())
    throw std::invalid_argument(path + ": missing 'study' key");

  const RunConfig base_cfg = parse_config_text(base_text.str(), path);
  const ProblemSpec base = base_cfg.to_problem();
  const std::filesystem::path out(base_cfg.out_dir);
  std::filesystem::create_directories(out);
  {
    std::ofstream mf(out / "manifest");
    mf << "# study " << study_kind << '\n' << base_cfg.resolved_text();
  }

  std::vector<SweepEntry> entries;
  auto run_variant = [&](const std::string& label, const ProblemSpec& p) {
    const OptimizationTrace t = run(p);
    entries.push_back(summarize(label, t));
    write_outputs(t, p.mesh, base_cfg.resolved_text(),
                  (out / label).string());
    return t;
  };

  if (study_kind == "mesh_independence") {
    const auto rep = run_mesh_independence(base, refinements);
    for (const auto& v : rep.variants) {
      char label[64];
      std::snprintf(label, sizeof label, "%dx%d_ls%d", v.refinement.nx,
                    v.refinement.ny, v.refinement.ls);
      entries.push_back(
          {label, v.f0, 0.0, v.grayness, v.iterations, "see manifest"});
      write_density_csv(v.density, v.mesh, std::string("density_") + label,
                        out.string());
    }
    write_sweep_report(entries, out);
    std::ofstream cf(out / "correlation.csv");
    for (const auto& row : rep.correlation) {
      for (std::size_t k = 0; k < row.size(); ++k)
        cf << (k ? "," : "") << row[k];
      cf << '\n';
    }
    return static_cast<int>(rep.variants.size());
  }

  if (study_kind == "projection_compare") {
    const auto rep = run_projection_compare(base, g_tols, base.projection);
    entries.push_back(summarize("nfp", rep.nfp));
    entries.push_back(summarize("projection", rep.projection));
    write_sweep_report(entries, out);
    std::ofstream mf(out / "milestones.csv");
    mf << "g_tol,nfp_iteration,projection_iteration\n";
    for (const auto& ms : rep.milestones) {
      mf << ms.g_tol << ',';
      if (ms.nfp_iteration) mf << *ms.nfp_iteration;
      else mf << "stuck";
      mf << ',';
      if (ms.projection_iteration) mf << *ms.projection_iteration;
      else mf << "stuck(g_min=" << rep.projection_min_grayness << ')';
      mf << '\n';
    }
    write_outputs(rep.nfp, base.mesh, base_cfg.resolved_text(),
                  (out / "nfp").string());
    write_outputs(rep.projection, base.mesh, base_cfg.resolved_text(),
                  (out / "projection").string());
    return 2;
  }

  if (study_kind == "function_choice") {
    if (functions.empty()) functions = {"exp", "tanh", "power", "atan"};
    for (const auto& fn : functions) {
      ProblemSpec p = base;
      p.shaping = shaping_kind_from_string(fn);
      run_variant(fn, p);
    }
    write_sweep_report(entries, out);
    return static_cast<int>(functions.size());
  }

  if (study_kind == "step_size") {
    if (s_list.empty())
      throw std::invalid_argument("step_size study needs S_list");
    for (double s : s_list) {
      ProblemSpec p = base;
      p.optimizer.step_damping = s;
      char label[32];
      std::snprintf(label, sizeof label, "S%g", s);
      run_variant(label, p);
    }
    write_sweep_report(entries, out);
    return static_cast<int>(s_list.size());
  }

  if (study_kind == "vf_ls_sweep") {
    if (vf_list.empty() || ls_list.empty())
      throw std::invalid_argument("vf_ls_sweep needs vf_list and ls_list");
    for (double vf : vf_list)
      for (int ls : ls_list) {
        ProblemSpec p = base;
        p.objective.volume_fraction = vf;
        p.neighborhood = NeighborhoodSpec::square(ls);
        char label[32];
        std::snprintf(label, sizeof label, "vf%g_ls%d", vf, ls);
        run_variant(label, p);
      }
    write_sweep_report(entries, out);
    return static_cast<int>(vf_list.size() * ls_list.size());
  }

  throw std::invalid_argument("unknown study kind: " + study_kind);
}

}  // namespace nfp
