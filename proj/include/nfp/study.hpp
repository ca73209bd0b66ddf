#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nfp/config.hpp"
#include "nfp/driver.hpp"

namespace nfp {

// Scripted comparative studies built on the optimization driver.

struct MeshRefinement {
  int nx = 0;
  int ny = 0;
  int ls = 1;
};

struct MeshIndependenceVariant {
  MeshRefinement refinement;
  GridMesh mesh;
  double f0 = 0.0;
  double grayness = 0.0;
  int iterations = 0;
  DensityField density;
  DensityField resampled;  // nearest-centroid on the coarsest grid
};

struct MeshIndependenceReport {
  std::vector<MeshIndependenceVariant> variants;
  // Pearson correlation of resampled densities, variants x variants.
  std::vector<std::vector<double>> correlation;
};

// Same physical domain solved at several refinements; the ls per refinement
// keeps the physical neighborhood extent fixed. Throws invalid_argument when
// a refinement changes the domain aspect.
MeshIndependenceReport run_mesh_independence(
    const ProblemSpec& base, const std::vector<MeshRefinement>& refinements);

struct GraynessMilestone {
  double g_tol = 0.0;
  std::optional<int> nfp_iteration;
  std::optional<int> projection_iteration;
};

struct ProjectionCompareReport {
  OptimizationTrace nfp;
  OptimizationTrace projection;
  std::vector<GraynessMilestone> milestones;
  double projection_min_grayness = 1.0;
};

// nFP vs the Heaviside-projection baseline under sharpness continuation,
// recording the first iteration at which each grayness tolerance is met.
ProjectionCompareReport run_projection_compare(
    const ProblemSpec& problem, const std::vector<double>& g_tols,
    const ProjectionSettings& schedule);

// Generic labeled sweep result used by the remaining studies.
struct SweepEntry {
  std::string label;
  double f0 = 0.0;
  double g1 = 0.0;
  double grayness = 0.0;
  int iterations = 0;
  std::string stop_reason;
};

// Parses a study config (study=<kind> plus run-config keys plus the kind's
// list keys), runs it and writes reports under out_dir. Returns the number
// of variants run.
int run_study_file(const std::string& path);

}  // namespace nfp
