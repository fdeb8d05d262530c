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

#include "alm/fixtures.h"

#include <string>
#include <vector>

#include "alm/error.h"
#include "alm/rng.h"

namespace alm {
namespace {

constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m",
                                   "n", "p", "r", "s", "t", "v", "z"};
constexpr const char* kVowels[] = {"a", "e", "i", "o", "u"};

// Pronounceable, distinct word for each index.
std::string Word(std::size_t index) {
  std::string word;
  std::size_t x = index;
  do {
    word += kOnsets[x % 14];
    x /= 14;
    word += kVowels[x % 5];
    x /= 5;
  } while (x > 0);
  return word;
}

std::size_t Between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + rng.UniformBelow(hi - lo + 1);
}

std::string Join(const std::vector<std::vector<std::size_t>>& docs) {
  std::string text;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (d > 0) text += "\n\n";
    for (std::size_t i = 0; i < docs[d].size(); ++i) {
      if (i > 0) text += ' ';
      text += Word(docs[d][i]);
    }
  }
  text += '\n';
  return text;
}

void Check(const FixtureOptions& o) {
  if (o.vocab_size < 2 || o.phrase_count == 0 || o.min_phrase_len == 0 ||
      o.min_phrase_len > o.max_phrase_len || o.train_docs == 0 ||
      o.min_doc_len == 0 || o.min_doc_len > o.max_doc_len ||
      o.min_valid_len == 0 || o.min_valid_len > o.max_valid_len ||
      o.max_valid_len > o.min_doc_len) {
    ThrowUsage("inconsistent fixture options");
  }
}

std::vector<std::vector<std::size_t>> MakeTrain(Rng& rng,
                                                const FixtureOptions& o) {
  std::vector<std::vector<std::size_t>> phrases(o.phrase_count);
  for (auto& phrase : phrases) {
    phrase.resize(Between(rng, o.min_phrase_len, o.max_phrase_len));
    for (auto& w : phrase) w = rng.UniformBelow(o.vocab_size);
  }
  std::vector<std::vector<std::size_t>> docs(o.train_docs);
  for (auto& doc : docs) {
    const std::size_t len = Between(rng, o.min_doc_len, o.max_doc_len);
    while (doc.size() < len) {
      const auto& phrase = phrases[rng.UniformBelow(phrases.size())];
      doc.insert(doc.end(), phrase.begin(), phrase.end());
    }
    doc.resize(len);
  }
  return docs;
}

}  // namespace

FixtureText MakeRepetitiveFixture(std::uint64_t seed,
                                  const FixtureOptions& options) {
  Check(options);
  Rng rng(seed);
  const auto train = MakeTrain(rng, options);
  std::vector<std::vector<std::size_t>> valid(options.valid_docs);
  for (auto& doc : valid) {
    const auto& source = train[rng.UniformBelow(train.size())];
    const std::size_t len =
        Between(rng, options.min_valid_len, options.max_valid_len);
    const std::size_t start = rng.UniformBelow(source.size() - len + 1);
    doc.assign(source.begin() + static_cast<std::ptrdiff_t>(start),
               source.begin() + static_cast<std::ptrdiff_t>(start + len));
  }
  return {Join(train), Join(valid)};
}

FixtureText MakeNovelFixture(std::uint64_t seed, const FixtureOptions& options) {
  Check(options);
  Rng rng(seed);
  const auto train = MakeTrain(rng, options);
  std::vector<std::vector<std::size_t>> valid(options.valid_docs);
  for (auto& doc : valid) {
    doc.resize(Between(rng, options.min_valid_len, options.max_valid_len));
    for (auto& w : doc) w = rng.UniformBelow(options.vocab_size);
  }
  return {Join(train), Join(valid)};
}

}  // namespace alm
