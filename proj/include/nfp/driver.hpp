#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nfp/density.hpp"
#include "nfp/fem.hpp"
#include "nfp/mesh.hpp"
#include "nfp/mma.hpp"
#include "nfp/objectives.hpp"
#include "nfp/shaping.hpp"

namespace nfp {

enum class DensityMethod { Nfp, Projection };

struct ProjectionSettings {
  double beta_h_init = 1.0;
  double beta_h_max = 512.0;
  int double_every = 50;  // iterations between doublings
};

struct OptimizerSettings {
  double step_damping = 0.005;  // S
  int max_iter = 400;
  std::optional<double> g_tol;            // stop when grayness <= g_tol
  std::optional<double> tol_fun = 1e-10;  // |df0| window stop
  int snapshot_every = 50;
  MmaOptions mma;
};

struct ProblemSpec {
  std::string name = "problem";
  GridMesh mesh;
  NeighborhoodSpec neighborhood = NeighborhoodSpec::square(2);
  ShapingKind shaping = ShapingKind::Exp;
  double power_n = 12.0;
  MaterialModel material;
  LoadCase loads;
  ObjectiveSpec objective;
  OptimizerSettings optimizer;
  DensityMethod method = DensityMethod::Nfp;
  ProjectionSettings projection;
};

struct IterationRecord {
  int iter = 0;
  double f0 = 0.0;
  double g1 = 0.0;
  double grayness = 0.0;
};

struct OptimizationTrace {
  std::vector<IterationRecord> history;  // entry 0 is the initial design
  std::vector<std::pair<int, DensityField>> snapshots;
  DensityField final_density;
  std::vector<double> final_variables;   // beta (nFP) or mu (projection)
  double initial_f0 = 0.0;
  double final_f0 = 0.0;
  int iterations = 0;
  std::string stop_reason;

  // First iteration whose grayness is <= tol, or nullopt.
  std::optional<int> first_iteration_below(double g_tol) const;
};

OptimizationTrace run(const ProblemSpec& problem);

}  // namespace nfp
