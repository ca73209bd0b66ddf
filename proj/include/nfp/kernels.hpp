#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

// Inner-loop kernels behind the density and sensitivity evaluations.
// Scalar reference implementations always exist; on x86 an AVX2 variant is
// selected once at startup when the CPU supports it. Both variants of a
// kernel are equivalence-tested against each other. Within one process the
// selection is fixed, so results stay deterministic.

namespace nfp::kernels {

// Fixed 8-slot summation tree:
//   ((v0+v4) + (v2+v6)) + ((v1+v5) + (v3+v7))
// Slot k encodes a sign pattern over the grid axes (bit 0 = x, bit 1 = y,
// bit 2 = z). Reflecting the grid across an axis permutes the slots by
// flipping that bit, which this tree absorbs as swaps of commutative
// two-term additions. Sums arranged this way are therefore bit-exactly
// invariant under axis reflections of their operands, which is what keeps
// geometrically symmetric problems symmetric to the last bit over long
// optimization runs.
inline double mirror_tree8(const double v[8]) {
  const double s0 = v[0] + v[4];
  const double s1 = v[1] + v[5];
  const double s2 = v[2] + v[6];
  const double s3 = v[3] + v[7];
  return (s0 + s2) + (s1 + s3);
}

// out[i] = sum over the groups of row i of the mirror_tree8 sum of
// slot_weights[g*8+k] * x[slot_indices[g*8+k]]. Empty slots carry index -1
// and weight 0 and contribute +0.0. group_offsets has rows+1 entries
// delimiting each row's group range.
using GroupedWeightedSumFn = void (*)(const std::int64_t* group_offsets,
                                      const int* slot_indices,
                                      const double* slot_weights,
                                      const double* x, double* out,
                                      std::size_t rows);

// out[i] = sum_k weights[k] * x[indices[k]] over CSR row i.
using CsrWeightedSumFn = void (*)(const std::int64_t* offsets,
                                  const int* indices, const double* weights,
                                  const double* x, double* out,
                                  std::size_t rows);

// sum_i 4 * rho[i] * (1 - rho[i])
using GraynessSumFn = double (*)(const double* rho, std::size_t n);

// out[i] = 1 - exp(s[i])
using OneMinusExpFn = void (*)(const double* s, double* out, std::size_t n);

struct Dispatch {
  GroupedWeightedSumFn grouped_weighted_sum;
  CsrWeightedSumFn csr_weighted_sum;
  GraynessSumFn grayness_sum;
  OneMinusExpFn one_minus_exp;
  const char* name;
};

// Scalar reference kernels, always available.
extern const Dispatch scalar;
#if defined(__x86_64__)
extern const Dispatch avx2;
bool cpu_has_avx2();
#endif

// Variant picked at load time (scalar unless AVX2 is available).
const Dispatch& active();

}  // namespace nfp::kernels
