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

#ifndef ALM_ENCODER_LM_H_
#define ALM_ENCODER_LM_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "alm/types.h"

namespace alm {

// Maps a context (token ids, oldest first) to a fixed-length key vector.
// Implementations must be pure: equal contexts give bitwise-equal vectors.
class ContextEncoder {
 public:
  virtual ~ContextEncoder() = default;
  virtual std::size_t dim() const = 0;
  virtual std::vector<float> Encode(std::span<const TokenId> context) const = 0;
};

struct DecayEncoderOptions {
  std::size_t dim = 16;
  double decay = 0.5;
  std::size_t window = 8;
  std::uint64_t seed = 0;
};

// Unit-normalized, exponentially decayed sum of the embeddings of the last
// `window` context tokens; the most recent token has weight 1.
class DecayEncoder : public ContextEncoder {
 public:
  // Embedding rows are drawn uniformly from [-1, 1) using options.seed.
  DecayEncoder(std::size_t vocab_size, const DecayEncoderOptions& options);

  // Uses the given |vocab| x dim row-major table verbatim.
  DecayEncoder(std::vector<double> embeddings, std::size_t dim, double decay,
               std::size_t window);

  std::size_t dim() const override { return dim_; }
  std::vector<float> Encode(std::span<const TokenId> context) const override;

  std::span<const double> Embedding(TokenId id) const {
    return {embeddings_.data() + static_cast<std::size_t>(id) * dim_, dim_};
  }

 private:
  std::vector<double> embeddings_;
  std::size_t dim_;
  double decay_;
  std::size_t window_;
};

// Next-token distribution p_LM(. | context) over the whole vocabulary.
class BaseLM {
 public:
  virtual ~BaseLM() = default;
  virtual std::size_t vocab_size() const = 0;
  virtual Distribution Prob(std::span<const TokenId> context) const = 0;
};

struct CountLMOptions {
  std::size_t order = 3;
  double alpha = 0.1;
};

// Additively smoothed n-gram model keyed on the last order-1 context tokens
// (fewer near the start of a document, where the context is [bos] + prefix).
// The bos token is outside the target support: it gets probability 0 and the
// smoothing denominator uses |V| - 1.
class CountLM : public BaseLM {
 public:
  CountLM(const std::vector<std::vector<TokenId>>& documents,
          std::size_t vocab_size, TokenId bos_id, const CountLMOptions& options);

  std::size_t vocab_size() const override { return vocab_size_; }
  Distribution Prob(std::span<const TokenId> context) const override;

  std::size_t order() const { return order_; }

 private:
  struct Counts {
    std::map<TokenId, std::uint64_t> next;
    std::uint64_t total = 0;
  };

  std::span<const TokenId> History(std::span<const TokenId> context) const;

  std::size_t vocab_size_;
  TokenId bos_id_;
  std::size_t order_;
  double alpha_;
  std::map<std::vector<TokenId>, Counts> counts_;
};

}  // namespace alm

#endif  // ALM_ENCODER_LM_H_
