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

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <span>
#include <string_view>

#include "alm/simd/kernels.h"

namespace alm::simd {
namespace {

struct KernelTable {
  Isa isa;
  double (*squared_l2)(std::span<const float>, std::span<const float>);
  double (*squared_l2_half)(std::span<const float>,
                            std::span<const std::uint16_t>);
  void (*squared_l2_rows)(std::span<const float>, const float*,
                          std::span<double>);
  void (*squared_l2_rows_half)(std::span<const float>, const std::uint16_t*,
                               std::span<double>);
  void (*float_to_half)(std::span<const float>, std::span<std::uint16_t>);
  void (*half_to_float)(std::span<const std::uint16_t>, std::span<float>);
};

constexpr KernelTable kScalarTable = {
    Isa::kScalar,           scalar::SquaredL2,      scalar::SquaredL2Half,
    scalar::SquaredL2Rows,  scalar::SquaredL2RowsHalf,
    scalar::FloatToHalf,    scalar::HalfToFloat,
};

#if defined(ALM_HAVE_AVX2_KERNELS)
constexpr KernelTable kAvx2Table = {
    Isa::kAvx2,           avx2::SquaredL2,      avx2::SquaredL2Half,
    avx2::SquaredL2Rows,  avx2::SquaredL2RowsHalf,
    avx2::FloatToHalf,    avx2::HalfToFloat,
};
#endif

const KernelTable* TableFor(Isa isa) {
#if defined(ALM_HAVE_AVX2_KERNELS)
  if (isa == Isa::kAvx2 && Avx2Available()) return &kAvx2Table;
#endif
  (void)isa;
  return &kScalarTable;
}

// ALM_SIMD=scalar pins the reference kernels, e.g. to compare outputs.
const KernelTable* DetectTable() {
  const char* env = std::getenv("ALM_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return &kScalarTable;
  return TableFor(Isa::kAvx2);
}

std::atomic<const KernelTable*>& ActiveTable() {
  static std::atomic<const KernelTable*> table{DetectTable()};
  return table;
}

const KernelTable& Table() {
  return *ActiveTable().load(std::memory_order_relaxed);
}

}  // namespace

std::string_view IsaName(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool Avx2Available() {
#if defined(ALM_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  static const bool available = __builtin_cpu_supports("avx2") &&
                                __builtin_cpu_supports("fma") &&
                                __builtin_cpu_supports("f16c");
  return available;
#else
  return false;
#endif
}

Isa ActiveIsa() { return Table().isa; }

Isa SetActiveIsa(Isa isa) {
  const KernelTable* table = TableFor(isa);
  ActiveTable().store(table, std::memory_order_relaxed);
  return table->isa;
}

double SquaredL2(std::span<const float> a, std::span<const float> b) {
  return Table().squared_l2(a, b);
}

double SquaredL2Half(std::span<const float> a,
                     std::span<const std::uint16_t> b) {
  return Table().squared_l2_half(a, b);
}

void SquaredL2Rows(std::span<const float> query, const float* rows,
                   std::span<double> out) {
  Table().squared_l2_rows(query, rows, out);
}

void SquaredL2RowsHalf(std::span<const float> query, const std::uint16_t* rows,
                       std::span<double> out) {
  Table().squared_l2_rows_half(query, rows, out);
}

void FloatToHalf(std::span<const float> in, std::span<std::uint16_t> out) {
  Table().float_to_half(in, out);
}

void HalfToFloat(std::span<const std::uint16_t> in, std::span<float> out) {
  Table().half_to_float(in, out);
}

}  // namespace alm::simd
