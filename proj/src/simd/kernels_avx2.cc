// Copyright 2026 The Automaton-LM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Functions here carry target attributes instead of the file being built with
// -mavx2, so no inline definition pulled in from a header gets AVX2 code that
// the linker could pick for callers on older CPUs.

#include "alm/simd/kernels.h"

#if defined(ALM_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#include <cstddef>
#include <cstdint>
#include <span>

#define ALM_AVX2 __attribute__((target("avx2,fma,f16c")))

namespace alm::simd::avx2 {
namespace {

ALM_AVX2 inline double HorizontalSum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

// Accumulates (a - b)^2 for 8 float lanes into two double accumulators.
ALM_AVX2 inline void Accumulate8(__m256 a, __m256 b, __m256d& acc0,
                                 __m256d& acc1) {
  const __m256d a0 = _mm256_cvtps_pd(_mm256_castps256_ps128(a));
  const __m256d a1 = _mm256_cvtps_pd(_mm256_extractf128_ps(a, 1));
  const __m256d b0 = _mm256_cvtps_pd(_mm256_castps256_ps128(b));
  const __m256d b1 = _mm256_cvtps_pd(_mm256_extractf128_ps(b, 1));
  const __m256d d0 = _mm256_sub_pd(a0, b0);
  const __m256d d1 = _mm256_sub_pd(a1, b1);
  acc0 = _mm256_fmadd_pd(d0, d0, acc0);
  acc1 = _mm256_fmadd_pd(d1, d1, acc1);
}

ALM_AVX2 inline double L2Kernel(const float* a, const float* b,
                                std::size_t dim) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= dim; i += 8) {
    Accumulate8(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0, acc1);
  }
  double sum = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < dim; ++i) {
    const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += diff * diff;
  }
  return sum;
}

ALM_AVX2 inline double L2HalfKernel(const float* a, const std::uint16_t* b,
                                    std::size_t dim) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= dim; i += 8) {
    const __m256 bf = _mm256_cvtph_ps(
        _mm_loadu_si128(reinterpret_cast<const __m128i*>(b + i)));
    Accumulate8(_mm256_loadu_ps(a + i), bf, acc0, acc1);
  }
  double sum = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < dim; ++i) {
    const double diff = static_cast<double>(a[i]) -
                        static_cast<double>(scalar::HalfToFloat(b[i]));
    sum += diff * diff;
  }
  return sum;
}

}  // namespace

ALM_AVX2 double SquaredL2(std::span<const float> a, std::span<const float> b) {
  return L2Kernel(a.data(), b.data(), a.size());
}

ALM_AVX2 double SquaredL2Half(std::span<const float> a,
                              std::span<const std::uint16_t> b) {
  return L2HalfKernel(a.data(), b.data(), a.size());
}

ALM_AVX2 void SquaredL2Rows(std::span<const float> query, const float* rows,
                            std::span<double> out) {
  const std::size_t dim = query.size();
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[r] = L2Kernel(query.data(), rows + r * dim, dim);
  }
}

ALM_AVX2 void SquaredL2RowsHalf(std::span<const float> query,
                                const std::uint16_t* rows,
                                std::span<double> out) {
  const std::size_t dim = query.size();
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[r] = L2HalfKernel(query.data(), rows + r * dim, dim);
  }
}

ALM_AVX2 void FloatToHalf(std::span<const float> in,
                          std::span<std::uint16_t> out) {
  std::size_t i = 0;
  for (; i + 8 <= in.size(); i += 8) {
    const __m128i h = _mm256_cvtps_ph(_mm256_loadu_ps(in.data() + i),
                                      _MM_FROUND_TO_NEAREST_INT);
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out.data() + i), h);
  }
  for (; i < in.size(); ++i) out[i] = scalar::FloatToHalf(in[i]);
}

ALM_AVX2 void HalfToFloat(std::span<const std::uint16_t> in,
                          std::span<float> out) {
  std::size_t i = 0;
  for (; i + 8 <= in.size(); i += 8) {
    const __m256 f = _mm256_cvtph_ps(
        _mm_loadu_si128(reinterpret_cast<const __m128i*>(in.data() + i)));
    _mm256_storeu_ps(out.data() + i, f);
  }
  for (; i < in.size(); ++i) out[i] = scalar::HalfToFloat(in[i]);
}

}  // namespace alm::simd::avx2

#endif  // ALM_HAVE_AVX2_KERNELS
