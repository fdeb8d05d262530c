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

#include "alm/encoder_lm.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "alm/error.h"
#include "alm/rng.h"

namespace alm {

DecayEncoder::DecayEncoder(std::size_t vocab_size,
                           const DecayEncoderOptions& options)
    : dim_(options.dim), decay_(options.decay), window_(options.window) {
  if (dim_ == 0) ThrowUsage("encoder.dim must be positive");
  if (!(decay_ > 0.0 && decay_ < 1.0)) {
    ThrowUsage("encoder.decay must lie in (0, 1)");
  }
  if (window_ == 0) ThrowUsage("encoder.window must be positive");
  Rng rng(options.seed);
  embeddings_.resize(vocab_size * dim_);
  for (double& v : embeddings_) v = 2.0 * rng.UniformDouble() - 1.0;
}

DecayEncoder::DecayEncoder(std::vector<double> embeddings, std::size_t dim,
                           double decay, std::size_t window)
    : embeddings_(std::move(embeddings)),
      dim_(dim),
      decay_(decay),
      window_(window) {
  if (dim_ == 0 || embeddings_.size() % dim_ != 0) {
    ThrowUsage("embedding table size is not a multiple of dim");
  }
}

std::vector<float> DecayEncoder::Encode(std::span<const TokenId> context) const {
  const std::size_t vocab = embeddings_.size() / dim_;
  std::vector<double> acc(dim_, 0.0);
  const std::size_t terms = std::min(window_, context.size());
  double weight = 1.0;
  for (std::size_t j = 0; j < terms; ++j) {
    const TokenId id = context[context.size() - 1 - j];
    if (id >= vocab) ThrowData("context token id out of range");
    const std::span<const double> row = Embedding(id);
    for (std::size_t k = 0; k < dim_; ++k) acc[k] += weight * row[k];
    weight *= decay_;
  }
  double norm = 0.0;
  for (double v : acc) norm += v * v;
  norm = std::sqrt(norm);
  std::vector<float> out(dim_, 0.0f);
  if (norm > 0.0) {
    for (std::size_t k = 0; k < dim_; ++k) {
      out[k] = static_cast<float>(acc[k] / norm);
    }
  }
  return out;
}

CountLM::CountLM(const std::vector<std::vector<TokenId>>& documents,
                 std::size_t vocab_size, TokenId bos_id,
                 const CountLMOptions& options)
    : vocab_size_(vocab_size),
      bos_id_(bos_id),
      order_(options.order),
      alpha_(options.alpha) {
  if (order_ == 0) ThrowUsage("base_lm.order must be at least 1");
  if (!(alpha_ > 0.0)) ThrowUsage("base_lm.alpha must be positive");
  if (vocab_size_ < 2) ThrowUsage("vocabulary needs at least one non-bos token");
  std::vector<TokenId> context;
  for (const auto& doc : documents) {
    context.assign(1, bos_id_);
    for (TokenId target : doc) {
      if (target >= vocab_size_) ThrowData("token id out of range in CountLM");
      const std::span<const TokenId> history = History(context);
      Counts& counts = counts_[std::vector<TokenId>(history.begin(), history.end())];
      ++counts.next[target];
      ++counts.total;
      context.push_back(target);
    }
  }
}

std::span<const TokenId> CountLM::History(std::span<const TokenId> context) const {
  const std::size_t len = std::min(order_ - 1, context.size());
  return context.subspan(context.size() - len);
}

Distribution CountLM::Prob(std::span<const TokenId> context) const {
  const std::span<const TokenId> history = History(context);
  const auto it = counts_.find(std::vector<TokenId>(history.begin(), history.end()));
  const double support = static_cast<double>(vocab_size_ - 1);
  const double total = it == counts_.end() ? 0.0 : static_cast<double>(it->second.total);
  const double denom = total + alpha_ * support;
  Distribution p(vocab_size_, alpha_ / denom);
  p[bos_id_] = 0.0;
  if (it != counts_.end()) {
    for (const auto& [token, count] : it->second.next) {
      p[token] = (static_cast<double>(count) + alpha_) / denom;
    }
  }
  return p;
}

}  // namespace alm
