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

#include "alm/datastore.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>

#include "alm/clustering.h"
#include "alm/error.h"
#include "alm/simd/kernels.h"
#include "binary_io.h"
#include "csv.h"

namespace alm {
namespace {

constexpr std::string_view kMagic = "RTMD";
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kValueWidth = sizeof(TokenId);

bool NeighborLess(const Neighbor& a, const Neighbor& b) {
  return a.distance < b.distance ||
         (a.distance == b.distance && a.index < b.index);
}

// Keeps the k best of candidates, sorted.
NeighborSet SelectNearest(std::vector<Neighbor> candidates, std::size_t k) {
  NeighborSet result;
  result.k = k;
  const std::size_t keep = std::min(k, candidates.size());
  if (keep < candidates.size()) {
    std::nth_element(candidates.begin(), candidates.begin() + keep,
                     candidates.end(), NeighborLess);
    candidates.resize(keep);
  }
  std::sort(candidates.begin(), candidates.end(), NeighborLess);
  result.entries = std::move(candidates);
  return result;
}

}  // namespace

KeyPrecision ParseKeyPrecision(std::string_view name) {
  if (name == "fp32") return KeyPrecision::kFp32;
  if (name == "fp16") return KeyPrecision::kFp16;
  ThrowUsage("unknown key precision '" + std::string(name) +
             "' (expected fp32 or fp16)");
}

std::string_view KeyPrecisionName(KeyPrecision precision) {
  return precision == KeyPrecision::kFp16 ? "fp16" : "fp32";
}

Datastore::Datastore(std::size_t dim, KeyPrecision precision,
                     std::vector<float> keys, std::vector<TokenId> values,
                     std::vector<EntryId> pointers)
    : dim_(dim),
      precision_(precision),
      values_(std::move(values)),
      pointers_(std::move(pointers)) {
  if (dim_ == 0) ThrowUsage("datastore dimension must be positive");
  if (keys.size() != values_.size() * dim_ ||
      pointers_.size() != values_.size()) {
    ThrowUsage("datastore arrays have inconsistent sizes");
  }
  if (values_.size() >= kNoPointer) ThrowUsage("datastore too large");
  for (EntryId p : pointers_) {
    if (p != kNoPointer && p >= values_.size()) {
      ThrowData("datastore pointer out of range");
    }
  }
  if (precision_ == KeyPrecision::kFp16) {
    keys_f16_.resize(keys.size());
    simd::FloatToHalf(keys, keys_f16_);
  } else {
    keys_f32_ = std::move(keys);
  }
}

std::vector<float> Datastore::Key(EntryId i) const {
  std::vector<float> key(dim_);
  const std::size_t offset = static_cast<std::size_t>(i) * dim_;
  if (precision_ == KeyPrecision::kFp16) {
    simd::HalfToFloat({keys_f16_.data() + offset, dim_}, key);
  } else {
    std::copy_n(keys_f32_.data() + offset, dim_, key.begin());
  }
  return key;
}

double Datastore::SquaredDistance(std::span<const float> query,
                                  EntryId i) const {
  const std::size_t offset = static_cast<std::size_t>(i) * dim_;
  if (precision_ == KeyPrecision::kFp16) {
    return simd::SquaredL2Half(query, {keys_f16_.data() + offset, dim_});
  }
  return simd::SquaredL2(query, {keys_f32_.data() + offset, dim_});
}

void Datastore::AllSquaredDistances(std::span<const float> query,
                                    std::span<double> out) const {
  if (precision_ == KeyPrecision::kFp16) {
    simd::SquaredL2RowsHalf(query, keys_f16_.data(), out);
  } else {
    simd::SquaredL2Rows(query, keys_f32_.data(), out);
  }
}

void Datastore::Save(std::ostream& out) const {
  io::WriteMagic(out, kMagic);
  io::WriteLE<std::uint32_t>(out, kVersion);
  io::WriteLE<std::uint64_t>(out, size());
  io::WriteLE<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
  io::WriteLE<std::uint8_t>(out, static_cast<std::uint8_t>(precision_));
  io::WriteLE<std::uint8_t>(out, kValueWidth);
  if (precision_ == KeyPrecision::kFp16) {
    for (std::uint16_t h : keys_f16_) io::WriteLE(out, h);
  } else {
    for (float f : keys_f32_) io::WriteFloat(out, f);
  }
  for (TokenId v : values_) io::WriteLE<std::uint32_t>(out, v);
  for (EntryId p : pointers_) io::WriteLE<std::uint32_t>(out, p);
}

Datastore Datastore::Load(std::istream& in) {
  io::ExpectMagic(in, kMagic);
  if (io::ReadLE<std::uint32_t>(in) != kVersion) {
    ThrowData("unsupported datastore version");
  }
  const auto n = io::ReadLE<std::uint64_t>(in);
  const auto dim = io::ReadLE<std::uint32_t>(in);
  const auto precision_byte = io::ReadLE<std::uint8_t>(in);
  const auto value_width = io::ReadLE<std::uint8_t>(in);
  if (precision_byte > 1) ThrowData("unknown key precision in datastore");
  if (value_width != kValueWidth) ThrowData("unsupported value width");
  if (dim == 0 || n >= kNoPointer) ThrowData("invalid datastore header");

  Datastore ds;
  ds.dim_ = dim;
  ds.precision_ = static_cast<KeyPrecision>(precision_byte);
  const std::size_t key_count = static_cast<std::size_t>(n) * dim;
  if (ds.precision_ == KeyPrecision::kFp16) {
    ds.keys_f16_.resize(key_count);
    for (auto& h : ds.keys_f16_) h = io::ReadLE<std::uint16_t>(in);
  } else {
    ds.keys_f32_.resize(key_count);
    for (auto& f : ds.keys_f32_) f = io::ReadFloat(in);
  }
  ds.values_.resize(n);
  for (auto& v : ds.values_) v = io::ReadLE<std::uint32_t>(in);
  ds.pointers_.resize(n);
  for (auto& p : ds.pointers_) {
    p = io::ReadLE<std::uint32_t>(in);
    if (p != kNoPointer && p >= n) ThrowData("datastore pointer out of range");
  }
  io::ExpectEnd(in);
  return ds;
}

void Datastore::SaveFile(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowData("cannot write " + path);
  Save(out);
  if (!out) ThrowData("failed writing " + path);
}

Datastore Datastore::LoadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowData("cannot open " + path);
  return Load(in);
}

void Datastore::WriteCsv(std::ostream& out, const Vocabulary* vocab) const {
  out << "index,value,token,pointer";
  for (std::size_t k = 0; k < dim_; ++k) out << ",k" << k;
  out << '\n';
  for (EntryId i = 0; i < size(); ++i) {
    out << i << ',' << values_[i] << ','
        << (vocab != nullptr ? CsvField(vocab->Token(values_[i])) : std::string())
        << ',';
    if (has_pointer(i)) out << pointers_[i];
    for (float f : Key(i)) out << ',' << ShortestFloat(f);
    out << '\n';
  }
}

Datastore BuildDatastore(const Corpus& corpus, const ContextEncoder& encoder,
                         TokenId bos_id, KeyPrecision precision) {
  if (corpus.documents.empty()) ThrowData("empty corpus");
  const std::size_t dim = encoder.dim();
  const std::size_t n = corpus.TokenCount();
  std::vector<float> keys;
  keys.reserve(n * dim);
  std::vector<TokenId> values;
  values.reserve(n);
  std::vector<EntryId> pointers;
  pointers.reserve(n);

  std::vector<TokenId> context;
  for (const auto& doc : corpus.documents) {
    context.assign(1, bos_id);
    for (std::size_t t = 0; t < doc.size(); ++t) {
      if (doc[t] == bos_id) ThrowData("bos token cannot be a datastore value");
      const std::vector<float> key = encoder.Encode(context);
      if (key.size() != dim) ThrowUsage("encoder dimension mismatch");
      keys.insert(keys.end(), key.begin(), key.end());
      values.push_back(doc[t]);
      const bool last = t + 1 == doc.size();
      pointers.push_back(last ? kNoPointer
                              : static_cast<EntryId>(values.size()));
      context.push_back(doc[t]);
    }
  }
  return Datastore(dim, precision, std::move(keys), std::move(values),
                   std::move(pointers));
}

NeighborSet KnnSearch(const Datastore& ds, std::span<const float> query,
                      std::size_t k) {
  if (ds.empty()) ThrowData("kNN search on an empty datastore");
  if (k == 0) ThrowUsage("k must be at least 1");
  if (query.size() != ds.dim()) ThrowUsage("query dimension mismatch");
  std::vector<double> dist(ds.size());
  ds.AllSquaredDistances(query, dist);
  std::vector<Neighbor> candidates(ds.size());
  for (EntryId i = 0; i < ds.size(); ++i) candidates[i] = {i, dist[i]};
  return SelectNearest(std::move(candidates), k);
}

NeighborSet KnnSearchIvf(const Datastore& ds, const Clustering& clustering,
                         std::span<const float> query, std::size_t k,
                         std::size_t nprobe) {
  if (ds.empty()) ThrowData("kNN search on an empty datastore");
  if (k == 0) ThrowUsage("k must be at least 1");
  if (nprobe == 0) ThrowUsage("nprobe must be at least 1");
  if (query.size() != ds.dim()) ThrowUsage("query dimension mismatch");
  if (clustering.size() != ds.size()) {
    ThrowUsage("clustering does not cover the datastore");
  }
  const std::size_t num_states = clustering.num_states();
  std::vector<Neighbor> coarse(num_states);
  for (StateId q = 0; q < num_states; ++q) {
    double d;
    if (clustering.has_centroids()) {
      d = simd::SquaredL2(query, clustering.centroid(q));
    } else {
      std::vector<double> mean(ds.dim(), 0.0);
      const auto members = clustering.members(q);
      for (EntryId e : members) {
        const std::vector<float> key = ds.Key(e);
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += key[j];
      }
      std::vector<float> centroid(ds.dim());
      for (std::size_t j = 0; j < mean.size(); ++j) {
        centroid[j] = static_cast<float>(mean[j] / static_cast<double>(members.size()));
      }
      d = simd::SquaredL2(query, centroid);
    }
    coarse[q] = {q, d};
  }
  const NeighborSet probes = SelectNearest(std::move(coarse), nprobe);

  std::vector<Neighbor> candidates;
  for (const Neighbor& probe : probes.entries) {
    for (EntryId e : clustering.members(probe.index)) {
      candidates.push_back({e, ds.SquaredDistance(query, e)});
    }
  }
  return SelectNearest(std::move(candidates), k);
}

Distribution PKnn(const Datastore& ds, const NeighborSet& neighbors,
                  std::size_t vocab_size) {
  if (neighbors.entries.empty()) ThrowUsage("p_kNN needs at least one neighbor");
  // Shifting by the smallest distance leaves the normalized result unchanged
  // and keeps exp() away from underflow.
  double min_dist = std::numeric_limits<double>::infinity();
  for (const Neighbor& n : neighbors.entries) min_dist = std::min(min_dist, n.distance);
  Distribution p(vocab_size, 0.0);
  double total = 0.0;
  for (const Neighbor& n : neighbors.entries) {
    const double w = std::exp(-(n.distance - min_dist));
    p.at(ds.value(n.index)) += w;
    total += w;
  }
  for (double& v : p) v /= total;
  return p;
}

Distribution Interpolate(std::span<const double> retrieval,
                         std::span<const double> lm, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    ThrowUsage("lambda must lie in [0, 1]");
  }
  if (retrieval.size() != lm.size()) {
    ThrowUsage("interpolated distributions differ in size");
  }
  Distribution p(lm.size());
  for (std::size_t w = 0; w < p.size(); ++w) {
    p[w] = lambda * retrieval[w] + (1.0 - lambda) * lm[w];
  }
  return p;
}

}  // namespace alm
