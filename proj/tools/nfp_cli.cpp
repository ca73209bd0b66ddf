#include <CLI11.hpp>
#include <exception>
#include <iostream>

#include "nfp/config.hpp"
#include "nfp/io.hpp"
#include "nfp/kernels.hpp"
#include "nfp/presets.hpp"
#include "nfp/study.hpp"

int main(int argc, char** argv) {
  CLI::App app{"nFP topology optimization"};
  app.require_subcommand(1);

  std::string config_path, study_path, out_override;

  auto* run_cmd = app.add_subcommand("run", "optimize a configured problem");
  run_cmd->add_option("config", config_path, "key=value config file")
      ->required();
  run_cmd->add_option("--out", out_override, "override output directory");

  auto* list_cmd = app.add_subcommand("preset-list", "list built-in presets");

  auto* study_cmd =
      app.add_subcommand("study", "run a comparative study");
  study_cmd->add_option("config", study_path, "study config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_cmd->parsed()) {
      for (const auto& name : nfp::preset_names()) std::cout << name << '\n';
      return 0;
    }
    if (run_cmd->parsed()) {
      nfp::RunConfig cfg = nfp::load_config(config_path);
      if (!out_override.empty()) cfg.out_dir = out_override;
      const nfp::ProblemSpec problem = cfg.to_problem();
      std::cout << "preset " << problem.name << ": " << problem.mesh.nx << "x"
                << problem.mesh.ny;
      if (problem.mesh.dim == 3) std::cout << "x" << problem.mesh.nz;
      std::cout << ", " << problem.mesh.num_elems << " elements, kernels "
                << nfp::kernels::active().name << "\n";
      const nfp::OptimizationTrace trace = nfp::run(problem);
      nfp::write_outputs(trace, problem.mesh, cfg.resolved_text(),
                         cfg.out_dir);
      const auto& last = trace.history.back();
      std::cout << "stopped after " << trace.iterations << " iterations ("
                << trace.stop_reason << "): f0=" << last.f0
                << " g1=" << last.g1 << " grayness=" << last.grayness << '\n'
                << "outputs in " << cfg.out_dir << '\n';
      return 0;
    }
    if (study_cmd->parsed()) {
      const int n = nfp::run_study_file(study_path);
      std::cout << "study complete, " << n << " variants\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
