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

#ifndef ALM_CORPUS_H_
#define ALM_CORPUS_H_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "alm/types.h"

namespace alm {

enum class TokenizeMode { kWhitespace, kChar };

TokenizeMode ParseTokenizeMode(std::string_view name);

// Token strings and their ids. Id 0 is always the beginning-of-sequence
// marker; other ids follow first-occurrence order.
class Vocabulary {
 public:
  static constexpr std::string_view kBosToken = "<s>";

  Vocabulary();

  // Returns the id of token, adding it if unseen.
  TokenId Add(std::string_view token);

  // Returns the id of token, or kNoToken if absent.
  TokenId Find(std::string_view token) const;

  // Like Find but throws a data error naming the token.
  TokenId Lookup(std::string_view token) const;

  const std::string& Token(TokenId id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  TokenId bos_id() const { return 0; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // One token per line; line number is the id.
  void Write(std::ostream& out) const;
  static Vocabulary Read(std::istream& in);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

struct Corpus {
  std::vector<std::vector<TokenId>> documents;
  std::string source;

  std::size_t TokenCount() const;
  std::size_t LongestDocument() const;
};

// Splits text into blank-line separated documents and maps every token to an
// id in vocab, extending it as needed. Throws on invalid UTF-8, on the
// reserved bos spelling, and on input without any token ("empty corpus").
Corpus TokenizeInto(std::string_view text, TokenizeMode mode,
                    Vocabulary& vocab, std::string source = "");

struct TokenizedText {
  Vocabulary vocab;
  Corpus corpus;
};

TokenizedText Tokenize(std::string_view text, TokenizeMode mode,
                       std::string source = "");

// Tokens of a single line or prompt, all of which must already be known.
std::vector<TokenId> TokenizeKnown(std::string_view text, TokenizeMode mode,
                                   const Vocabulary& vocab);

bool IsValidUtf8(std::string_view text);

// The context of a pair is [bos] followed by prefix.
struct ContextTargetPair {
  std::size_t doc_index = 0;
  std::size_t position = 0;
  std::span<const TokenId> prefix;
  TokenId target = 0;

  std::vector<TokenId> Context(TokenId bos_id) const;
};

std::vector<ContextTargetPair> IterPairs(const Corpus& corpus);

struct OverlapRow {
  std::size_t n = 0;
  double type_fraction = 0.0;
  double occurrence_fraction = 0.0;
  // False when no validation document has n tokens; fractions are then 0.
  bool defined = false;
};

// For n in [1, n_max], the fraction of distinct validation n-grams and of
// validation n-gram occurrences that appear at least once in train.
std::vector<OverlapRow> NgramOverlap(const Corpus& train, const Corpus& valid,
                                     std::size_t n_max);

}  // namespace alm

#endif  // ALM_CORPUS_H_
