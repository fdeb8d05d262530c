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

#include "alm/corpus.h"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <unordered_set>

#include "alm/error.h"

namespace alm {
namespace {

bool IsAsciiSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Splits text into documents: maximal runs of lines that contain at least one
// non-space character.
std::vector<std::string_view> SplitDocuments(std::string_view text) {
  std::vector<std::string_view> docs;
  std::size_t doc_begin = std::string_view::npos;
  std::size_t doc_end = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = text.substr(pos, eol - pos);
    const bool blank = std::all_of(line.begin(), line.end(), IsAsciiSpace);
    if (blank) {
      if (doc_begin != std::string_view::npos) {
        docs.push_back(text.substr(doc_begin, doc_end - doc_begin));
        doc_begin = std::string_view::npos;
      }
    } else {
      if (doc_begin == std::string_view::npos) doc_begin = pos;
      doc_end = eol;
    }
    pos = eol + 1;
  }
  if (doc_begin != std::string_view::npos) {
    docs.push_back(text.substr(doc_begin, doc_end - doc_begin));
  }
  return docs;
}

std::size_t Utf8Length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xe) return 3;
  return 4;
}

std::vector<std::string_view> SplitTokens(std::string_view doc,
                                          TokenizeMode mode) {
  std::vector<std::string_view> out;
  if (mode == TokenizeMode::kWhitespace) {
    std::size_t i = 0;
    while (i < doc.size()) {
      while (i < doc.size() && IsAsciiSpace(doc[i])) ++i;
      const std::size_t begin = i;
      while (i < doc.size() && !IsAsciiSpace(doc[i])) ++i;
      if (i > begin) out.push_back(doc.substr(begin, i - begin));
    }
  } else {
    std::size_t i = 0;
    while (i < doc.size()) {
      const std::size_t len =
          Utf8Length(static_cast<unsigned char>(doc[i]));
      if (doc[i] != '\n' && doc[i] != '\r') out.push_back(doc.substr(i, len));
      i += len;
    }
  }
  return out;
}

}  // namespace

TokenizeMode ParseTokenizeMode(std::string_view name) {
  if (name == "whitespace") return TokenizeMode::kWhitespace;
  if (name == "char") return TokenizeMode::kChar;
  ThrowUsage("unknown tokenizer mode '" + std::string(name) +
             "' (expected whitespace or char)");
}

Vocabulary::Vocabulary() { Add(kBosToken); }

TokenId Vocabulary::Add(std::string_view token) {
  auto [it, inserted] =
      ids_.try_emplace(std::string(token), static_cast<TokenId>(tokens_.size()));
  if (inserted) tokens_.emplace_back(token);
  return it->second;
}

TokenId Vocabulary::Find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kNoToken : it->second;
}

TokenId Vocabulary::Lookup(std::string_view token) const {
  const TokenId id = Find(token);
  if (id == kNoToken) ThrowData("unknown token '" + std::string(token) + "'");
  return id;
}

void Vocabulary::Write(std::ostream& out) const {
  for (const auto& token : tokens_) out << token << '\n';
}

Vocabulary Vocabulary::Read(std::istream& in) {
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    if (line_no == 0) {
      if (line != kBosToken) ThrowData("vocabulary must start with <s>");
    } else if (vocab.Add(line) != line_no) {
      ThrowData("duplicate vocabulary token '" + line + "'");
    }
    ++line_no;
  }
  if (line_no == 0) ThrowData("empty vocabulary file");
  return vocab;
}

std::size_t Corpus::TokenCount() const {
  std::size_t n = 0;
  for (const auto& doc : documents) n += doc.size();
  return n;
}

std::size_t Corpus::LongestDocument() const {
  std::size_t longest = 0;
  for (const auto& doc : documents) longest = std::max(longest, doc.size());
  return longest;
}

bool IsValidUtf8(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t len;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c >> 5) == 0x6) {
      len = 2;
      cp = c & 0x1f;
    } else if ((c >> 4) == 0xe) {
      len = 3;
      cp = c & 0x0f;
    } else if ((c >> 3) == 0x1e) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > text.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc >> 6) != 0x2) return false;
      cp = (cp << 6) | (cc & 0x3f);
    }
    // Overlong forms, surrogates and out-of-range code points.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000) || cp > 0x10ffff ||
        (cp >= 0xd800 && cp <= 0xdfff)) {
      return false;
    }
    i += len;
  }
  return true;
}

Corpus TokenizeInto(std::string_view text, TokenizeMode mode,
                    Vocabulary& vocab, std::string source) {
  if (!IsValidUtf8(text)) ThrowData("input is not valid UTF-8");
  Corpus corpus;
  corpus.source = std::move(source);
  for (std::string_view doc_text : SplitDocuments(text)) {
    std::vector<TokenId> doc;
    for (std::string_view token : SplitTokens(doc_text, mode)) {
      if (token == Vocabulary::kBosToken) {
        ThrowData("token '<s>' is reserved for the beginning of sequence");
      }
      doc.push_back(vocab.Add(token));
    }
    if (!doc.empty()) corpus.documents.push_back(std::move(doc));
  }
  if (corpus.documents.empty()) ThrowData("empty corpus");
  return corpus;
}

TokenizedText Tokenize(std::string_view text, TokenizeMode mode,
                       std::string source) {
  TokenizedText out;
  out.corpus = TokenizeInto(text, mode, out.vocab, std::move(source));
  return out;
}

std::vector<TokenId> TokenizeKnown(std::string_view text, TokenizeMode mode,
                                   const Vocabulary& vocab) {
  if (!IsValidUtf8(text)) ThrowData("input is not valid UTF-8");
  std::vector<TokenId> ids;
  for (std::string_view token : SplitTokens(text, mode)) {
    ids.push_back(vocab.Lookup(token));
  }
  return ids;
}

std::vector<TokenId> ContextTargetPair::Context(TokenId bos_id) const {
  std::vector<TokenId> context;
  context.reserve(prefix.size() + 1);
  context.push_back(bos_id);
  context.insert(context.end(), prefix.begin(), prefix.end());
  return context;
}

std::vector<ContextTargetPair> IterPairs(const Corpus& corpus) {
  std::vector<ContextTargetPair> pairs;
  pairs.reserve(corpus.TokenCount());
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const std::vector<TokenId>& doc = corpus.documents[d];
    for (std::size_t t = 0; t < doc.size(); ++t) {
      pairs.push_back({d, t, std::span<const TokenId>(doc.data(), t), doc[t]});
    }
  }
  return pairs;
}

std::vector<OverlapRow> NgramOverlap(const Corpus& train, const Corpus& valid,
                                     std::size_t n_max) {
  if (n_max == 0) ThrowUsage("n_max must be at least 1");
  std::vector<OverlapRow> rows;
  for (std::size_t n = 1; n <= n_max; ++n) {
    std::set<std::vector<TokenId>> train_grams;
    for (const auto& doc : train.documents) {
      for (std::size_t i = 0; i + n <= doc.size(); ++i) {
        train_grams.emplace(doc.begin() + i, doc.begin() + i + n);
      }
    }
    std::set<std::vector<TokenId>> valid_types;
    std::size_t occurrences = 0;
    std::size_t seen_occurrences = 0;
    for (const auto& doc : valid.documents) {
      for (std::size_t i = 0; i + n <= doc.size(); ++i) {
        std::vector<TokenId> gram(doc.begin() + i, doc.begin() + i + n);
        ++occurrences;
        if (train_grams.contains(gram)) ++seen_occurrences;
        valid_types.insert(std::move(gram));
      }
    }
    OverlapRow row;
    row.n = n;
    if (occurrences > 0) {
      std::size_t seen_types = 0;
      for (const auto& gram : valid_types) {
        if (train_grams.contains(gram)) ++seen_types;
      }
      row.defined = true;
      row.type_fraction =
          static_cast<double>(seen_types) / static_cast<double>(valid_types.size());
      row.occurrence_fraction =
          static_cast<double>(seen_occurrences) / static_cast<double>(occurrences);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace alm
