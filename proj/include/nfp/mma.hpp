#pragma once

#include <vector>

namespace nfp {

struct MmaOptions {
  double asymptote_init = 0.5;      // fraction of bound range
  double asymptote_increase = 1.2;
  double asymptote_decrease = 0.7;
  double move_limit = 0.5;          // fraction of bound range
};

// Method of Moving Asymptotes for one inequality constraint g1 <= 0.
// Each step builds the convex separable subproblem and solves its dual by
// bisection on the single constraint multiplier.
class MmaSolver {
 public:
  explicit MmaSolver(int num_vars, MmaOptions options = {});

  std::vector<double> step(const std::vector<double>& x, double f0,
                           const std::vector<double>& df0_dx, double g1,
                           const std::vector<double>& dg1_dx,
                           const std::vector<double>& x_min,
                           const std::vector<double>& x_max);

  int iteration() const { return iter_; }
  const std::vector<double>& lower_asymptotes() const { return low_; }
  const std::vector<double>& upper_asymptotes() const { return upp_; }

 private:
  int num_vars_;
  MmaOptions options_;
  int iter_ = 0;
  std::vector<double> low_, upp_, xold1_, xold2_;
};

// Damped update x_old + S (x_candidate - x_old), clamped to the variable
// bounds.
std::vector<double> apply_step_damping(const std::vector<double>& x_old,
                                       const std::vector<double>& x_candidate,
                                       double step,
                                       const std::vector<double>& x_min,
                                       const std::vector<double>& x_max);

}  // namespace nfp
