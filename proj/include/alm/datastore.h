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

#ifndef ALM_DATASTORE_H_
#define ALM_DATASTORE_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alm/corpus.h"
#include "alm/encoder_lm.h"
#include "alm/types.h"

namespace alm {

enum class KeyPrecision : std::uint8_t { kFp32 = 0, kFp16 = 1 };

KeyPrecision ParseKeyPrecision(std::string_view name);
std::string_view KeyPrecisionName(KeyPrecision precision);

// Flat (keys, values, pointers) arrays, one entry per training token. Entry i
// holds the encoding of the context before token i, the token itself, and the
// index of the entry for the next token of the same document (kNoPointer at
// the end of a document).
class Datastore {
 public:
  Datastore() = default;
  Datastore(std::size_t dim, KeyPrecision precision, std::vector<float> keys,
            std::vector<TokenId> values, std::vector<EntryId> pointers);

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  std::size_t dim() const { return dim_; }
  KeyPrecision precision() const { return precision_; }

  TokenId value(EntryId i) const { return values_[i]; }
  EntryId pointer(EntryId i) const { return pointers_[i]; }
  bool has_pointer(EntryId i) const { return pointers_[i] != kNoPointer; }
  std::span<const TokenId> values() const { return values_; }
  std::span<const EntryId> pointers() const { return pointers_; }

  // Raw fp32 keys (fp32 stores) and binary16 bit patterns (fp16 stores).
  std::span<const float> keys_f32() const { return keys_f32_; }
  std::span<const std::uint16_t> keys_f16() const { return keys_f16_; }

  // Key of entry i as fp32, upcasting fp16 storage.
  std::vector<float> Key(EntryId i) const;

  double SquaredDistance(std::span<const float> query, EntryId i) const;

  // out[i] = SquaredDistance(query, i) for every entry.
  void AllSquaredDistances(std::span<const float> query,
                           std::span<double> out) const;

  void Save(std::ostream& out) const;
  static Datastore Load(std::istream& in);
  void SaveFile(const std::string& path) const;
  static Datastore LoadFile(const std::string& path);

  // Debug export: index,value,token,pointer,k0..k{d-1}.
  void WriteCsv(std::ostream& out, const Vocabulary* vocab) const;

 private:
  std::size_t dim_ = 0;
  KeyPrecision precision_ = KeyPrecision::kFp32;
  std::vector<float> keys_f32_;
  std::vector<std::uint16_t> keys_f16_;
  std::vector<TokenId> values_;
  std::vector<EntryId> pointers_;
};

// Encodes every (context, target) pair of corpus. Keys are rounded to binary16
// when precision is kFp16.
Datastore BuildDatastore(const Corpus& corpus, const ContextEncoder& encoder,
                         TokenId bos_id, KeyPrecision precision);

struct Neighbor {
  EntryId index = 0;
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Nearest entries sorted by (distance, index).
struct NeighborSet {
  std::vector<Neighbor> entries;
  std::size_t k = 0;
};

// Exact search over all entries by squared L2 distance; ties go to the lower
// entry index.
NeighborSet KnnSearch(const Datastore& ds, std::span<const float> query,
                      std::size_t k);

class Clustering;

// Exact search restricted to the members of the nprobe clusters whose
// centroids are nearest the query. Clusterings without stored centroids use
// member means. nprobe >= cluster count reproduces KnnSearch.
NeighborSet KnnSearchIvf(const Datastore& ds, const Clustering& clustering,
                         std::span<const float> query, std::size_t k,
                         std::size_t nprobe);

// p(w) proportional to the sum of exp(-distance) over neighbors with value w.
Distribution PKnn(const Datastore& ds, const NeighborSet& neighbors,
                  std::size_t vocab_size);

// lambda * retrieval + (1 - lambda) * lm, elementwise.
Distribution Interpolate(std::span<const double> retrieval,
                         std::span<const double> lm, double lambda);

}  // namespace alm

#endif  // ALM_DATASTORE_H_
