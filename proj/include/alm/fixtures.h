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

#ifndef ALM_FIXTURES_H_
#define ALM_FIXTURES_H_

#include <cstddef>
#include <cstdint>
#include <string>

namespace alm {

// Synthetic train/validation text pairs, blank-line separated documents.
struct FixtureText {
  std::string train;
  std::string valid;
};

struct FixtureOptions {
  std::size_t vocab_size = 80;
  std::size_t phrase_count = 60;
  std::size_t min_phrase_len = 2;
  std::size_t max_phrase_len = 6;
  std::size_t train_docs = 60;
  std::size_t min_doc_len = 40;
  std::size_t max_doc_len = 80;
  std::size_t valid_docs = 8;
  std::size_t min_valid_len = 30;
  std::size_t max_valid_len = 40;
};

// Training documents are random concatenations of a fixed phrase inventory;
// every validation document is a verbatim span of a training document.
FixtureText MakeRepetitiveFixture(std::uint64_t seed,
                                  const FixtureOptions& options = {});

// Same training side; validation documents are uniform random word strings,
// so their longer n-grams are almost never seen in training.
FixtureText MakeNovelFixture(std::uint64_t seed,
                             const FixtureOptions& options = {});

}  // namespace alm

#endif  // ALM_FIXTURES_H_
