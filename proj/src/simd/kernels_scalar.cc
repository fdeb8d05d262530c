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

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>

#include "alm/simd/kernels.h"

namespace alm::simd::scalar {

std::uint16_t FloatToHalf(float value) {
  const std::uint32_t x = std::bit_cast<std::uint32_t>(value);
  const std::uint16_t sign = static_cast<std::uint16_t>((x >> 16) & 0x8000u);
  const std::uint32_t abs = x & 0x7fffffffu;
  const std::uint32_t exp = abs >> 23;
  const std::uint32_t mant = abs & 0x7fffffu;

  if (exp == 0xff) {
    if (mant == 0) return sign | 0x7c00u;
    // Quiet NaN, keeping the top of the payload.
    return static_cast<std::uint16_t>(sign | 0x7e00u | (mant >> 13));
  }
  if (exp >= 143) return sign | 0x7c00u;  // >= 2^16 overflows
  if (exp < 102) return sign;             // < 2^-25 rounds to zero

  if (exp < 113) {
    // Half subnormal: value = m * 2^(exp - 150), unit 2^-24.
    const std::uint32_t m = mant | 0x800000u;
    const std::uint32_t shift = 126 - exp;
    std::uint32_t h = m >> shift;
    const std::uint32_t rem = m & ((1u << shift) - 1);
    const std::uint32_t halfway = 1u << (shift - 1);
    if (rem > halfway || (rem == halfway && (h & 1u))) ++h;
    return static_cast<std::uint16_t>(sign | h);
  }

  std::uint32_t h = ((exp - 112) << 10) | (mant >> 13);
  const std::uint32_t rem = mant & 0x1fffu;
  // A carry out of the mantissa bumps the exponent, up to infinity.
  if (rem > 0x1000u || (rem == 0x1000u && (h & 1u))) ++h;
  return static_cast<std::uint16_t>(sign | h);
}

float HalfToFloat(std::uint16_t bits) {
  const std::uint32_t sign = static_cast<std::uint32_t>(bits & 0x8000u) << 16;
  const std::uint32_t exp = (bits >> 10) & 0x1fu;
  std::uint32_t mant = bits & 0x3ffu;
  std::uint32_t out;
  if (exp == 0) {
    if (mant == 0) {
      out = sign;
    } else {
      std::uint32_t e = 113;
      while ((mant & 0x400u) == 0) {
        mant <<= 1;
        --e;
      }
      out = sign | (e << 23) | ((mant & 0x3ffu) << 13);
    }
  } else if (exp == 0x1f) {
    out = sign | 0x7f800000u | (mant << 13);
  } else {
    out = sign | ((exp + 112) << 23) | (mant << 13);
  }
  return std::bit_cast<float>(out);
}

double SquaredL2(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += diff * diff;
  }
  return sum;
}

double SquaredL2Half(std::span<const float> a,
                     std::span<const std::uint16_t> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff =
        static_cast<double>(a[i]) - static_cast<double>(HalfToFloat(b[i]));
    sum += diff * diff;
  }
  return sum;
}

void SquaredL2Rows(std::span<const float> query, const float* rows,
                   std::span<double> out) {
  const std::size_t dim = query.size();
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[r] = SquaredL2(query, {rows + r * dim, dim});
  }
}

void SquaredL2RowsHalf(std::span<const float> query, const std::uint16_t* rows,
                       std::span<double> out) {
  const std::size_t dim = query.size();
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[r] = SquaredL2Half(query, {rows + r * dim, dim});
  }
}

void FloatToHalf(std::span<const float> in, std::span<std::uint16_t> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = FloatToHalf(in[i]);
}

void HalfToFloat(std::span<const std::uint16_t> in, std::span<float> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = HalfToFloat(in[i]);
}

}  // namespace alm::simd::scalar
