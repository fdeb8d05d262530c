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

#ifndef ALM_TYPES_H_
#define ALM_TYPES_H_

#include <cstdint>
#include <limits>
#include <vector>

namespace alm {

using TokenId = std::uint32_t;
using EntryId = std::uint32_t;
using StateId = std::uint32_t;

inline constexpr EntryId kNoPointer = std::numeric_limits<EntryId>::max();
inline constexpr TokenId kNoToken = std::numeric_limits<TokenId>::max();

// Dense distribution over the vocabulary, indexed by TokenId.
using Distribution = std::vector<double>;

}  // namespace alm

#endif  // ALM_TYPES_H_
