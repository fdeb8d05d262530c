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

#ifndef ALM_TRAVERSAL_H_
#define ALM_TRAVERSAL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alm/automaton.h"
#include "alm/encoder_lm.h"
#include "alm/types.h"

namespace alm {

// Restart threshold: traversal continues without search when the number of
// successor states is at least the threshold. The infinite threshold searches
// at every step.
class Tau {
 public:
  explicit constexpr Tau(std::uint64_t value) : value_(value) {}
  static constexpr Tau Infinite() { return Tau(kInfinite); }

  // Accepts a positive integer or "inf".
  static Tau Parse(std::string_view text);

  bool is_infinite() const { return value_ == kInfinite; }
  std::uint64_t value() const { return value_; }
  bool Continues(std::size_t successor_states) const {
    return !is_infinite() && successor_states >= value_;
  }
  std::string ToString() const;

  friend bool operator==(Tau, Tau) = default;
  friend auto operator<=>(Tau, Tau) = default;

 private:
  static constexpr std::uint64_t kInfinite = ~std::uint64_t{0};
  std::uint64_t value_;
};

struct TraversalConfig {
  Tau tau = Tau(1);
  std::size_t k_neigh = 32;
  std::size_t max_knns = 32;
  double lambda = 0.25;
  std::uint64_t rng_seed = 0;

  // Throws a usage error naming the offending field.
  void Validate() const;
};

// Entries scored by p_auto: preferred entries first (lowest index first when
// they alone exceed cap), then search anchors in rank order, then a seeded
// uniform sample of the remaining members. Returned ascending.
std::vector<EntryId> SelectActiveEntries(const Automaton& aut,
                                         const StateSet& states, std::size_t cap,
                                         std::uint64_t seed);

// One traversal over one token sequence. Not thread-safe; sessions over the
// same automaton are independent.
class TraversalSession {
 public:
  // stream separates the sampling streams of sessions sharing a seed.
  TraversalSession(const Automaton& aut, const TraversalConfig& cfg,
                   std::uint64_t stream = 0);

  // Searches for the query's neighbors and enters their states.
  const StateSet& Start(std::span<const float> query);

  // Follows arcs on consumed from every current state; searches next_query
  // and adds the neighbors' states when fewer than tau successors remain.
  // Returns whether a search was made.
  bool Step(TokenId consumed, std::span<const float> next_query);

  std::vector<EntryId> ActiveEntries() const;

  // lambda * p_auto + (1 - lambda) * p_LM for the current state set.
  Distribution NextDistribution(const BaseLM& base_lm,
                                std::span<const TokenId> context,
                                std::span<const float> query) const;

  const StateSet& current() const { return current_; }
  std::size_t search_count() const { return search_count_; }
  std::size_t step_count() const { return step_count_; }
  // Lengths of completed no-search runs, each including its anchoring search.
  std::vector<std::size_t> RunLengths() const;

 private:
  void EnterSearchStates(std::span<const float> query, StateSet& next);

  const Automaton* aut_;
  TraversalConfig cfg_;
  std::uint64_t stream_;
  StateSet current_;
  std::size_t search_count_ = 0;
  std::size_t step_count_ = 0;
  std::vector<std::size_t> run_lengths_;
  std::size_t open_run_ = 0;
};

struct StepRecord {
  std::size_t position = 0;
  TokenId gold = 0;
  double prob = 0.0;
  bool searched = false;
  std::size_t num_states = 0;
  std::size_t num_active = 0;
};

struct RunOptions {
  // Test hook: start a fresh session (a plain search, no pointer carry-over)
  // at every position.
  bool fresh_session_each_step = false;
};

// Teacher-forced traversal: the distribution at position t is computed from
// [bos] + tokens[0..t) before tokens[t] is consumed.
std::vector<StepRecord> RunSequence(const Automaton& aut, const BaseLM& base_lm,
                                    const ContextEncoder& encoder, TokenId bos_id,
                                    std::span<const TokenId> tokens,
                                    const TraversalConfig& cfg,
                                    std::uint64_t stream = 0,
                                    const RunOptions& options = {});

enum class GenerationMode { kArgmax, kSample };

GenerationMode ParseGenerationMode(std::string_view name);

struct GeneratedToken {
  TokenId token = 0;
  bool searched = false;
};

// Consumes the prompt with teacher forcing, then emits length tokens, each
// consumed as the next input.
std::vector<GeneratedToken> Generate(const Automaton& aut, const BaseLM& base_lm,
                                     const ContextEncoder& encoder,
                                     TokenId bos_id,
                                     std::span<const TokenId> prompt,
                                     std::size_t length, GenerationMode mode,
                                     const TraversalConfig& cfg);

}  // namespace alm

#endif  // ALM_TRAVERSAL_H_
