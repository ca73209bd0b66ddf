#include "nfp/mma.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nfp {

namespace {
constexpr double kAlbefa = 0.1;    // keep variables off the asymptotes
constexpr double kRaa0 = 1e-5;
constexpr double kDualTol = 1e-10;
}  // namespace

MmaSolver::MmaSolver(int num_vars, MmaOptions options)
    : num_vars_(num_vars), options_(options) {
  if (num_vars < 1) throw std::invalid_argument("MMA needs >= 1 variable");
  if (options.move_limit <= 0.0 || options.move_limit > 1.0)
    throw std::invalid_argument("move limit must lie in (0, 1]");
}

std::vector<double> MmaSolver::step(const std::vector<double>& x, double /*f0*/,
                                    const std::vector<double>& df0_dx,
                                    double g1,
                                    const std::vector<double>& dg1_dx,
                                    const std::vector<double>& x_min,
                                    const std::vector<double>& x_max) {
  const std::size_t n = static_cast<std::size_t>(num_vars_);
  if (x.size() != n || df0_dx.size() != n || dg1_dx.size() != n ||
      x_min.size() != n || x_max.size() != n)
    throw std::invalid_argument("mma_step: size mismatch");
  for (std::size_t j = 0; j < n; ++j)
    if (!std::isfinite(df0_dx[j]) || !std::isfinite(dg1_dx[j]))
      throw std::invalid_argument("mma_step: non-finite gradient");
  if (!std::isfinite(g1)) throw std::invalid_argument("mma_step: non-finite g1");

  ++iter_;
  if (iter_ <= 2) {
    low_.resize(n);
    upp_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double range = x_max[j] - x_min[j];
      low_[j] = x[j] - options_.asymptote_init * range;
      upp_[j] = x[j] + options_.asymptote_init * range;
    }
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      const double range = x_max[j] - x_min[j];
      const double zzz = (x[j] - xold1_[j]) * (xold1_[j] - xold2_[j]);
      double factor = 1.0;
      if (zzz > 0.0) factor = options_.asymptote_increase;
      if (zzz < 0.0) factor = options_.asymptote_decrease;
      low_[j] = x[j] - factor * (xold1_[j] - low_[j]);
      upp_[j] = x[j] + factor * (upp_[j] - xold1_[j]);
      low_[j] = std::clamp(low_[j], x[j] - 10.0 * range, x[j] - 0.01 * range);
      upp_[j] = std::clamp(upp_[j], x[j] + 0.01 * range, x[j] + 10.0 * range);
    }
  }
  xold2_ = xold1_;
  xold1_ = x;

  std::vector<double> alfa(n), beta(n), p0(n), q0(n), p1(n), q1(n);
  double b = -g1;
  for (std::size_t j = 0; j < n; ++j) {
    const double range = std::max(x_max[j] - x_min[j], 1e-5);
    alfa[j] = std::max({x_min[j], low_[j] + kAlbefa * (x[j] - low_[j]),
                        x[j] - options_.move_limit * range});
    beta[j] = std::min({x_max[j], upp_[j] - kAlbefa * (upp_[j] - x[j]),
                        x[j] + options_.move_limit * range});

    const double ux = upp_[j] - x[j];
    const double xl = x[j] - low_[j];
    const double dfp = std::max(df0_dx[j], 0.0);
    const double dfm = std::max(-df0_dx[j], 0.0);
    const double pq0 = 0.001 * (dfp + dfm) + kRaa0 / range;
    p0[j] = ux * ux * (dfp + pq0);
    q0[j] = xl * xl * (dfm + pq0);

    const double dgp = std::max(dg1_dx[j], 0.0);
    const double dgm = std::max(-dg1_dx[j], 0.0);
    const double pq1 = 0.001 * (dgp + dgm) + kRaa0 / range;
    p1[j] = ux * ux * (dgp + pq1);
    q1[j] = xl * xl * (dgm + pq1);
    b += p1[j] / ux + q1[j] / xl;
  }

  // Primal minimizer for a given multiplier.
  auto primal = [&](double lam, std::vector<double>& xc) {
    for (std::size_t j = 0; j < n; ++j) {
      const double sp = std::sqrt(p0[j] + lam * p1[j]);
      const double sq = std::sqrt(q0[j] + lam * q1[j]);
      const double xj = (low_[j] * sp + upp_[j] * sq) / (sp + sq);
      xc[j] = std::clamp(xj, alfa[j], beta[j]);
    }
  };
  // Subproblem constraint value; decreasing in the multiplier.
  auto constraint = [&](const std::vector<double>& xc) {
    double g = -b;
    for (std::size_t j = 0; j < n; ++j)
      g += p1[j] / (upp_[j] - xc[j]) + q1[j] / (xc[j] - low_[j]);
    return g;
  };

  std::vector<double> xc(n);
  primal(0.0, xc);
  if (constraint(xc) <= kDualTol) return xc;

  double lo = 0.0, hi = 1.0;
  primal(hi, xc);
  int expand = 0;
  while (constraint(xc) > 0.0) {
    lo = hi;
    hi *= 2.0;
    primal(hi, xc);
    // The subproblem may be infeasible inside the trust region when the
    // constraint is badly violated. Capping the multiplier returns the most
    // feasible point, like the elastic-variable treatment would; the outer
    // iterations then walk back to feasibility.
    if (++expand > 60) return xc;
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    primal(mid, xc);
    const double c = constraint(xc);
    if (std::abs(c) < kDualTol) return xc;
    (c > 0.0 ? lo : hi) = mid;
    if (hi - lo < 1e-15 * (1.0 + hi)) break;
  }
  primal(0.5 * (lo + hi), xc);
  return xc;
}

std::vector<double> apply_step_damping(const std::vector<double>& x_old,
                                       const std::vector<double>& x_candidate,
                                       double step,
                                       const std::vector<double>& x_min,
                                       const std::vector<double>& x_max) {
  if (step <= 0.0 || step > 1.0)
    throw std::invalid_argument("step damping S must lie in (0, 1]");
  if (x_old.size() != x_candidate.size() || x_old.size() != x_min.size() ||
      x_old.size() != x_max.size())
    throw std::invalid_argument("apply_step_damping: size mismatch");
  std::vector<double> x(x_old.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    x[j] = std::clamp(x_old[j] + step * (x_candidate[j] - x_old[j]), x_min[j],
                      x_max[j]);
  return x;
}

}  // namespace nfp
