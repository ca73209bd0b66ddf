#pragma once

#include <map>
#include <optional>
#include <string>

#include "nfp/driver.hpp"

namespace nfp {

// Flat key=value run configuration. Every key has a validated default; the
// preset picks mesh size, loads, objective and volume fraction, and any
// explicit key overrides it.
struct RunConfig {
  std::string preset = "cantilever2d";
  int nx = 0, ny = 0, nz = 0;         // 0 = preset default
  double hx = 1.0, hy = 1.0, hz = 1.0;
  std::optional<double> vf;
  std::string neighborhood = "square";  // square | circle | immediate
  int ls = 2;
  double rmin = 2.0;
  std::string function = "exp";         // exp | tanh | power | atan
  double power_n = 12.0;
  double youngs = 2e4;
  double poisson = 0.3;
  double eta = 3.0;
  double rho_min = 1e-4;
  std::optional<double> mu;             // objective scale
  double spring = 100.0;
  std::string method = "nfp";           // nfp | projection
  double beta_h_init = 1.0;
  double beta_h_max = 512.0;
  int beta_h_double_every = 50;
  double step = 0.005;                  // MMA step damping S
  int max_iter = 400;
  std::optional<double> g_tol;
  std::optional<double> tol_fun = 1e-10;
  int snapshot_every = 50;
  std::string out_dir = "out";

  ProblemSpec to_problem() const;

  // key=value echo that load_config round-trips to an identical config.
  std::string resolved_text() const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text,
                            const std::string& origin = "<string>");

}  // namespace nfp
