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

#ifndef ALM_SRC_BINARY_IO_H_
#define ALM_SRC_BINARY_IO_H_

// Little-endian stream helpers shared by the artifact readers and writers.

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

#include "alm/error.h"

namespace alm::io {

template <typename T>
void WriteLE(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  std::array<char, sizeof(T)> bytes;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>(u & 0xff);
    if constexpr (sizeof(T) > 1) u = static_cast<U>(u >> 8);
  }
  out.write(bytes.data(), bytes.size());
}

inline void WriteFloat(std::ostream& out, float value) {
  WriteLE(out, std::bit_cast<std::uint32_t>(value));
}

template <typename T>
T ReadLE(std::istream& in) {
  static_assert(std::is_integral_v<T>);
  using U = std::make_unsigned_t<T>;
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), bytes.size())) {
    ThrowData("truncated artifact");
  }
  U u = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) {
    if constexpr (sizeof(T) > 1) u = static_cast<U>(u << 8);
    u = static_cast<U>(u | static_cast<unsigned char>(bytes[i]));
  }
  return static_cast<T>(u);
}

inline float ReadFloat(std::istream& in) {
  return std::bit_cast<float>(ReadLE<std::uint32_t>(in));
}

inline void WriteMagic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline void ExpectMagic(std::istream& in, std::string_view magic) {
  std::string got(magic.size(), '\0');
  if (!in.read(got.data(), static_cast<std::streamsize>(got.size())) ||
      got != magic) {
    ThrowData("unrecognized artifact header");
  }
}

inline void ExpectEnd(std::istream& in) {
  if (in.peek() != std::char_traits<char>::eof()) {
    ThrowData("trailing bytes after artifact payload");
  }
}

}  // namespace alm::io

#endif  // ALM_SRC_BINARY_IO_H_
