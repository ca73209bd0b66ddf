#include <cmath>

#include "nfp/kernels.hpp"

namespace nfp::kernels {
namespace {

void grouped_weighted_sum_scalar(const std::int64_t* group_offsets,
                                 const int* slot_indices,
                                 const double* slot_weights, const double* x,
                                 double* out, std::size_t rows) {
  for (std::size_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    for (std::int64_t g = group_offsets[i]; g < group_offsets[i + 1]; ++g) {
      const int* idx = slot_indices + g * 8;
      const double* w = slot_weights + g * 8;
      double v[8];
      for (int k = 0; k < 8; ++k)
        v[k] = idx[k] >= 0 ? w[k] * x[idx[k]] : 0.0;
      acc += mirror_tree8(v);
    }
    out[i] = acc;
  }
}

void csr_weighted_sum_scalar(const std::int64_t* offsets, const int* indices,
                             const double* weights, const double* x,
                             double* out, std::size_t rows) {
  for (std::size_t i = 0; i < rows; ++i) {
    // Four independent accumulators, combined in a fixed order. This matches
    // the lane layout of the AVX2 variant so the two agree to roundoff.
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::int64_t k = offsets[i];
    const std::int64_t end = offsets[i + 1];
    for (; k + 4 <= end; k += 4) {
      a0 += weights[k] * x[indices[k]];
      a1 += weights[k + 1] * x[indices[k + 1]];
      a2 += weights[k + 2] * x[indices[k + 2]];
      a3 += weights[k + 3] * x[indices[k + 3]];
    }
    for (; k < end; ++k) a0 += weights[k] * x[indices[k]];
    out[i] = (a0 + a2) + (a1 + a3);
  }
}

double grayness_sum_scalar(const double* rho, std::size_t n) {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a0 += 4.0 * rho[i] * (1.0 - rho[i]);
    a1 += 4.0 * rho[i + 1] * (1.0 - rho[i + 1]);
    a2 += 4.0 * rho[i + 2] * (1.0 - rho[i + 2]);
    a3 += 4.0 * rho[i + 3] * (1.0 - rho[i + 3]);
  }
  for (; i < n; ++i) a0 += 4.0 * rho[i] * (1.0 - rho[i]);
  return (a0 + a2) + (a1 + a3);
}

void one_minus_exp_scalar(const double* s, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 - std::exp(s[i]);
}

}  // namespace

const Dispatch scalar = {grouped_weighted_sum_scalar, csr_weighted_sum_scalar,
                         grayness_sum_scalar, one_minus_exp_scalar, "scalar"};

}  // namespace nfp::kernels
