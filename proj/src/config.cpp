#include "nfp/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nfp/presets.hpp"

namespace nfp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& why) {
  throw std::invalid_argument("config key '" + key + "': " + why);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (...) {
    bad_value(key, "not a number: " + v);
  }
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const int i = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (...) {
    bad_value(key, "not an integer: " + v);
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunConfig parse_config_text(const std::string& text,
                            const std::string& origin) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // comments run to end of line, including after a value
    const auto hash = line.find('#');
    const std::string s =
        trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                  ": expected key=value, got '" + s + "'");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));

    if (key == "preset") c.preset = val;
    else if (key == "nx") c.nx = parse_int(key, val);
    else if (key == "ny") c.ny = parse_int(key, val);
    else if (key == "nz") c.nz = parse_int(key, val);
    else if (key == "hx") c.hx = parse_double(key, val);
    else if (key == "hy") c.hy = parse_double(key, val);
    else if (key == "hz") c.hz = parse_double(key, val);
    else if (key == "vf") c.vf = parse_double(key, val);
    else if (key == "neighborhood") c.neighborhood = val;
    else if (key == "ls") c.ls = parse_int(key, val);
    else if (key == "rmin") c.rmin = parse_double(key, val);
    else if (key == "function") c.function = val;
    else if (key == "power_n") c.power_n = parse_double(key, val);
    else if (key == "E") c.youngs = parse_double(key, val);
    else if (key == "nu") c.poisson = parse_double(key, val);
    else if (key == "eta") c.eta = parse_double(key, val);
    else if (key == "rho_min") c.rho_min = parse_double(key, val);
    else if (key == "mu") c.mu = parse_double(key, val);
    else if (key == "spring") c.spring = parse_double(key, val);
    else if (key == "method") c.method = val;
    else if (key == "beta_h_init") c.beta_h_init = parse_double(key, val);
    else if (key == "beta_h_max") c.beta_h_max = parse_double(key, val);
    else if (key == "beta_h_double_every")
      c.beta_h_double_every = parse_int(key, val);
    else if (key == "S") c.step = parse_double(key, val);
    else if (key == "max_iter") c.max_iter = parse_int(key, val);
    else if (key == "g_tol") c.g_tol = parse_double(key, val);
    else if (key == "tol_fun") c.tol_fun = parse_double(key, val);
    else if (key == "snapshot_every") c.snapshot_every = parse_int(key, val);
    else if (key == "out_dir") c.out_dir = val;
    else
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                  ": unknown key '" + key + "'");
  }

  // Validation, naming the offending key.
  {
    bool known = false;
    for (const auto& name : preset_names()) known |= (name == c.preset);
    if (!known) bad_value("preset", "unknown preset: " + c.preset);
  }
  if (c.vf && (*c.vf <= 0.0 || *c.vf >= 1.0))
    bad_value("vf", "must lie in (0, 1)");
  if (c.neighborhood != "square" && c.neighborhood != "circle" &&
      c.neighborhood != "immediate")
    bad_value("neighborhood", "must be square, circle or immediate");
  if (c.ls < 0) bad_value("ls", "must be >= 0");
  if (c.rmin <= 0.0) bad_value("rmin", "must be > 0");
  shaping_kind_from_string(c.function);  // throws for bad names
  if (c.power_n < 1.0) bad_value("power_n", "must be >= 1");
  if (c.youngs <= 0.0) bad_value("E", "must be > 0");
  if (c.poisson < 0.0 || c.poisson >= 0.5)
    bad_value("nu", "must lie in [0, 0.5)");
  if (c.eta < 1.0) bad_value("eta", "must be >= 1");
  if (c.rho_min <= 0.0 || c.rho_min >= 1.0)
    bad_value("rho_min", "must lie in (0, 1)");
  if (c.mu && *c.mu <= 0.0) bad_value("mu", "must be > 0");
  if (c.spring < 0.0) bad_value("spring", "must be >= 0");
  if (c.method != "nfp" && c.method != "projection")
    bad_value("method", "must be nfp or projection");
  if (c.beta_h_init < 0.0) bad_value("beta_h_init", "must be >= 0");
  if (c.beta_h_max < c.beta_h_init)
    bad_value("beta_h_max", "must be >= beta_h_init");
  if (c.step <= 0.0 || c.step > 1.0) bad_value("S", "must lie in (0, 1]");
  if (c.max_iter < 0) bad_value("max_iter", "must be >= 0");
  if (c.g_tol && (*c.g_tol <= 0.0 || *c.g_tol >= 1.0))
    bad_value("g_tol", "must lie in (0, 1)");
  if (c.tol_fun && *c.tol_fun <= 0.0) bad_value("tol_fun", "must be > 0");
  if (c.snapshot_every < 0) bad_value("snapshot_every", "must be >= 0");
  if (c.hx <= 0.0) bad_value("hx", "must be > 0");
  if (c.hy <= 0.0) bad_value("hy", "must be > 0");
  if (c.hz <= 0.0) bad_value("hz", "must be > 0");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path);
}

ProblemSpec RunConfig::to_problem() const {
  ProblemSpec p = make_preset(preset, nx, ny, nz);
  if (hx != 1.0 || hy != 1.0 || hz != 1.0) {
    p.mesh = build_grid(p.mesh.dim, p.mesh.nx, p.mesh.ny, p.mesh.nz, hx, hy,
                        p.mesh.dim == 3 ? hz : 1.0);
    p.loads = preset_loads(preset, p.mesh, spring);
  } else if (spring != 100.0) {
    p.loads = preset_loads(preset, p.mesh, spring);
  }
  if (vf) p.objective.volume_fraction = *vf;
  if (mu) p.objective.scale = *mu;
  if (neighborhood == "square")
    p.neighborhood = NeighborhoodSpec::square(ls);
  else if (neighborhood == "circle")
    p.neighborhood = NeighborhoodSpec::circle(rmin);
  else
    p.neighborhood = NeighborhoodSpec::immediate();
  p.shaping = shaping_kind_from_string(function);
  p.power_n = power_n;
  p.material.youngs = youngs;
  p.material.poisson = poisson;
  p.material.simp_eta = eta;
  p.material.rho_min = rho_min;
  p.method = method == "projection" ? DensityMethod::Projection
                                    : DensityMethod::Nfp;
  p.projection = {beta_h_init, beta_h_max, beta_h_double_every};
  p.optimizer.step_damping = step;
  p.optimizer.max_iter = max_iter;
  p.optimizer.g_tol = g_tol;
  p.optimizer.tol_fun = tol_fun;
  p.optimizer.snapshot_every = snapshot_every;
  return p;
}

std::string RunConfig::resolved_text() const {
  std::ostringstream o;
  o << "preset=" << preset << "\n";
  o << "nx=" << nx << "\nny=" << ny << "\nnz=" << nz << "\n";
  o << "hx=" << fmt(hx) << "\nhy=" << fmt(hy) << "\nhz=" << fmt(hz) << "\n";
  if (vf) o << "vf=" << fmt(*vf) << "\n";
  o << "neighborhood=" << neighborhood << "\n";
  o << "ls=" << ls << "\n";
  o << "rmin=" << fmt(rmin) << "\n";
  o << "function=" << function << "\n";
  o << "power_n=" << fmt(power_n) << "\n";
  o << "E=" << fmt(youngs) << "\nnu=" << fmt(poisson) << "\n";
  o << "eta=" << fmt(eta) << "\nrho_min=" << fmt(rho_min) << "\n";
  if (mu) o << "mu=" << fmt(*mu) << "\n";
  o << "spring=" << fmt(spring) << "\n";
  o << "method=" << method << "\n";
  o << "beta_h_init=" << fmt(beta_h_init) << "\n";
  o << "beta_h_max=" << fmt(beta_h_max) << "\n";
  o << "beta_h_double_every=" << beta_h_double_every << "\n";
  o << "S=" << fmt(step) << "\n";
  o << "max_iter=" << max_iter << "\n";
  if (g_tol) o << "g_tol=" << fmt(*g_tol) << "\n";
  if (tol_fun) o << "tol_fun=" << fmt(*tol_fun) << "\n";
  o << "snapshot_every=" << snapshot_every << "\n";
  o << "out_dir=" << out_dir << "\n";
  return o.str();
}

}  // namespace nfp
