// AVX2 variants. Compiled with -mavx2 in its own TU; callers go through the
// runtime dispatch and never reach this code on CPUs without AVX2.
#if defined(__x86_64__)

#include <immintrin.h>

#include <cmath>

#include "nfp/kernels.hpp"

namespace nfp::kernels {
namespace {

// Plain mul+add (no FMA) so lane arithmetic matches the scalar reference
// bit-for-bit; the equivalence tests assert exact agreement.
void grouped_weighted_sum_avx2(const std::int64_t* group_offsets,
                               const int* slot_indices,
                               const double* slot_weights, const double* x,
                               double* out, std::size_t rows) {
  const __m256d zero = _mm256_setzero_pd();
  const __m128i minus1 = _mm_set1_epi32(-1);
  for (std::size_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    for (std::int64_t g = group_offsets[i]; g < group_offsets[i + 1]; ++g) {
      const int* idx = slot_indices + g * 8;
      const double* w = slot_weights + g * 8;
      // Slots 0-3 and 4-7; empty slots (index -1) gather 0.0 and carry
      // weight 0, matching the scalar reference exactly.
      const __m128i i0 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx));
      const __m128i i1 =
          _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + 4));
      const __m256d m0 = _mm256_castsi256_pd(
          _mm256_cvtepi32_epi64(_mm_cmpgt_epi32(i0, minus1)));
      const __m256d m1 = _mm256_castsi256_pd(
          _mm256_cvtepi32_epi64(_mm_cmpgt_epi32(i1, minus1)));
      const __m256d x0 = _mm256_mask_i32gather_pd(zero, x, i0, m0, 8);
      const __m256d x1 = _mm256_mask_i32gather_pd(zero, x, i1, m1, 8);
      const __m256d v0 = _mm256_mul_pd(_mm256_loadu_pd(w), x0);
      const __m256d v1 = _mm256_mul_pd(_mm256_loadu_pd(w + 4), x1);
      // mirror_tree8: (s0+s2) + (s1+s3) with s_k = v_k + v_{k+4}.
      const __m256d s = _mm256_add_pd(v0, v1);
      alignas(32) double lane[4];
      _mm256_store_pd(lane, s);
      acc += (lane[0] + lane[2]) + (lane[1] + lane[3]);
    }
    out[i] = acc;
  }
}

void csr_weighted_sum_avx2(const std::int64_t* offsets, const int* indices,
                           const double* weights, const double* x, double* out,
                           std::size_t rows) {
  for (std::size_t i = 0; i < rows; ++i) {
    __m256d acc = _mm256_setzero_pd();
    std::int64_t k = offsets[i];
    const std::int64_t end = offsets[i + 1];
    for (; k + 4 <= end; k += 4) {
      const __m128i idx = _mm_loadu_si128(
          reinterpret_cast<const __m128i*>(indices + k));
      const __m256d xv = _mm256_i32gather_pd(x, idx, 8);
      const __m256d wv = _mm256_loadu_pd(weights + k);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(wv, xv));
    }
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    for (; k < end; ++k) lane[0] += weights[k] * x[indices[k]];
    out[i] = (lane[0] + lane[2]) + (lane[1] + lane[3]);
  }
}

double grayness_sum_avx2(const double* rho, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d four = _mm256_set1_pd(4.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_loadu_pd(rho + i);
    const __m256d term =
        _mm256_mul_pd(_mm256_mul_pd(four, r), _mm256_sub_pd(one, r));
    acc = _mm256_add_pd(acc, term);
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (; i < n; ++i) lane[0] += 4.0 * rho[i] * (1.0 - rho[i]);
  return (lane[0] + lane[2]) + (lane[1] + lane[3]);
}

// exp has no intrinsic; the transcendental stays scalar either way.
void one_minus_exp_plain(const double* s, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 - std::exp(s[i]);
}

}  // namespace

const Dispatch avx2 = {grouped_weighted_sum_avx2, csr_weighted_sum_avx2,
                       grayness_sum_avx2, one_minus_exp_plain, "avx2"};

}  // namespace nfp::kernels

#endif  // __x86_64__
