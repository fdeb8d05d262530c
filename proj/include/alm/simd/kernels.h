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

#ifndef ALM_SIMD_KERNELS_H_
#define ALM_SIMD_KERNELS_H_

// Distance and half-precision conversion kernels. Each kernel has a portable
// scalar reference in alm::simd::scalar and an AVX2/F16C variant in
// alm::simd::avx2; the unqualified entry points dispatch once, at first use,
// to the best variant the running CPU supports.
//
// Squared distances accumulate in double. Float differences are exact in
// double, so variants differ only in summation order.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace alm::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view IsaName(Isa isa);

// True if the CPU and the build both support the AVX2 variant.
bool Avx2Available();

// The variant the dispatching entry points currently use.
Isa ActiveIsa();

// Forces a variant for the dispatching entry points. Requesting kAvx2 on a CPU
// without it falls back to kScalar. Returns the variant actually selected.
Isa SetActiveIsa(Isa isa);

// Sum over i of (a[i] - b[i])^2. a and b must have equal length.
double SquaredL2(std::span<const float> a, std::span<const float> b);

// As SquaredL2, with b stored as IEEE binary16 bit patterns.
double SquaredL2Half(std::span<const float> a, std::span<const std::uint16_t> b);

// out[r] = SquaredL2(query, rows[r*dim .. (r+1)*dim)) for r in [0, out.size()).
void SquaredL2Rows(std::span<const float> query, const float* rows,
                   std::span<double> out);
void SquaredL2RowsHalf(std::span<const float> query, const std::uint16_t* rows,
                       std::span<double> out);

// Round-to-nearest-even conversion to binary16 and exact conversion back.
void FloatToHalf(std::span<const float> in, std::span<std::uint16_t> out);
void HalfToFloat(std::span<const std::uint16_t> in, std::span<float> out);

namespace scalar {
double SquaredL2(std::span<const float> a, std::span<const float> b);
double SquaredL2Half(std::span<const float> a, std::span<const std::uint16_t> b);
void SquaredL2Rows(std::span<const float> query, const float* rows,
                   std::span<double> out);
void SquaredL2RowsHalf(std::span<const float> query, const std::uint16_t* rows,
                       std::span<double> out);
void FloatToHalf(std::span<const float> in, std::span<std::uint16_t> out);
void HalfToFloat(std::span<const std::uint16_t> in, std::span<float> out);

std::uint16_t FloatToHalf(float value);
float HalfToFloat(std::uint16_t bits);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define ALM_HAVE_AVX2_KERNELS 1
namespace avx2 {
double SquaredL2(std::span<const float> a, std::span<const float> b);
double SquaredL2Half(std::span<const float> a, std::span<const std::uint16_t> b);
void SquaredL2Rows(std::span<const float> query, const float* rows,
                   std::span<double> out);
void SquaredL2RowsHalf(std::span<const float> query, const std::uint16_t* rows,
                       std::span<double> out);
void FloatToHalf(std::span<const float> in, std::span<std::uint16_t> out);
void HalfToFloat(std::span<const std::uint16_t> in, std::span<float> out);
}  // namespace avx2
#endif

}  // namespace alm::simd

#endif  // ALM_SIMD_KERNELS_H_
