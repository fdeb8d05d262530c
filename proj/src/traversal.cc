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

#include "alm/traversal.h"

#include <algorithm>
#include <charconv>
#include <string>

#include "alm/error.h"
#include "alm/rng.h"

namespace alm {
namespace {

void SortUnique(std::vector<std::uint32_t>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

TokenId Argmax(const Distribution& p) {
  return static_cast<TokenId>(std::max_element(p.begin(), p.end()) - p.begin());
}

TokenId SampleFrom(const Distribution& p, Rng& rng) {
  double target = rng.UniformDouble();
  TokenId last = 0;
  for (TokenId w = 0; w < p.size(); ++w) {
    if (p[w] <= 0.0) continue;
    last = w;
    target -= p[w];
    if (target < 0.0) return w;
  }
  return last;
}

void CheckTokens(std::span<const TokenId> tokens, std::size_t vocab_size,
                 TokenId bos_id) {
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t] >= vocab_size || tokens[t] == bos_id) {
      ThrowData("unknown token id " + std::to_string(tokens[t]) +
                " at position " + std::to_string(t));
    }
  }
}

}  // namespace

Tau Tau::Parse(std::string_view text) {
  if (text == "inf" || text == "infinity" || text == "INF") return Infinite();
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v == 0 ||
      v == kInfinite) {
    ThrowUsage("tau must be a positive integer or 'inf', got '" +
               std::string(text) + "'");
  }
  return Tau(v);
}

std::string Tau::ToString() const {
  return is_infinite() ? "inf" : std::to_string(value_);
}

void TraversalConfig::Validate() const {
  if (tau.value() == 0) ThrowUsage("traversal.tau must be at least 1");
  if (k_neigh == 0) ThrowUsage("datastore.k_neigh must be at least 1");
  if (max_knns == 0) ThrowUsage("traversal.max_knns must be at least 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    ThrowUsage("traversal.lambda must lie in [0, 1]");
  }
}

std::vector<EntryId> SelectActiveEntries(const Automaton& aut,
                                         const StateSet& states, std::size_t cap,
                                         std::uint64_t seed) {
  if (states.empty()) ThrowUsage("cannot select entries of an empty state set");
  std::vector<EntryId> preferred = states.preferred;
  SortUnique(preferred);
  if (preferred.size() >= cap) {
    preferred.resize(cap);
    return preferred;
  }
  std::vector<EntryId> active = preferred;
  for (EntryId e : states.anchors) {
    if (active.size() >= cap) break;
    if (!std::binary_search(preferred.begin(), preferred.end(), e) &&
        std::find(active.begin() + static_cast<std::ptrdiff_t>(preferred.size()),
                  active.end(), e) == active.end()) {
      active.push_back(e);
    }
  }
  std::sort(active.begin(), active.end());
  if (active.size() < cap) {
    std::vector<EntryId> others;
    for (EntryId e : MemberEntries(aut, states)) {
      if (!std::binary_search(active.begin(), active.end(), e)) others.push_back(e);
    }
    const std::size_t room = cap - active.size();
    if (others.size() > room) {
      Rng rng(seed);
      for (std::size_t i = 0; i < room; ++i) {
        std::swap(others[i], others[i + rng.UniformBelow(others.size() - i)]);
      }
      others.resize(room);
    }
    active.insert(active.end(), others.begin(), others.end());
    std::sort(active.begin(), active.end());
  }
  return active;
}

TraversalSession::TraversalSession(const Automaton& aut,
                                   const TraversalConfig& cfg,
                                   std::uint64_t stream)
    : aut_(&aut), cfg_(cfg), stream_(stream) {
  cfg_.Validate();
}

void TraversalSession::EnterSearchStates(std::span<const float> query,
                                         StateSet& next) {
  const NeighborSet neighbors = KnnSearch(aut_->datastore(), query, cfg_.k_neigh);
  next.anchors.clear();
  for (const Neighbor& n : neighbors.entries) {
    next.anchors.push_back(n.index);
    next.states.push_back(aut_->clustering().state_of(n.index));
  }
  SortUnique(next.states);
  ++search_count_;
  if (open_run_ > 0) run_lengths_.push_back(open_run_);
  open_run_ = 1;
}

const StateSet& TraversalSession::Start(std::span<const float> query) {
  StateSet next;
  EnterSearchStates(query, next);
  next.preferred = next.anchors;
  SortUnique(next.preferred);
  current_ = std::move(next);
  ++step_count_;
  return current_;
}

bool TraversalSession::Step(TokenId consumed, std::span<const float> next_query) {
  if (current_.empty()) ThrowUsage("Step called before Start");
  StateSet next;
  for (StateId q : current_.states) {
    const auto succ = aut_->Successors(q, consumed);
    next.states.insert(next.states.end(), succ.begin(), succ.end());
    const auto pointed = aut_->PointedEntries(q, consumed);
    next.preferred.insert(next.preferred.end(), pointed.begin(), pointed.end());
  }
  SortUnique(next.states);
  SortUnique(next.preferred);
  ++step_count_;
  const bool search = !cfg_.tau.Continues(next.states.size());
  if (search) {
    EnterSearchStates(next_query, next);
  } else {
    ++open_run_;
  }
  current_ = std::move(next);
  return search;
}

std::vector<EntryId> TraversalSession::ActiveEntries() const {
  return SelectActiveEntries(*aut_, current_, cfg_.max_knns,
                             MixSeed(cfg_.rng_seed, MixSeed(stream_, step_count_)));
}

Distribution TraversalSession::NextDistribution(
    const BaseLM& base_lm, std::span<const TokenId> context,
    std::span<const float> query) const {
  const std::vector<EntryId> active = ActiveEntries();
  const Distribution p_auto = PAutoOverEntries(aut_->datastore(), active, query,
                                               base_lm.vocab_size());
  return Interpolate(p_auto, base_lm.Prob(context), cfg_.lambda);
}

std::vector<std::size_t> TraversalSession::RunLengths() const {
  std::vector<std::size_t> runs = run_lengths_;
  if (open_run_ > 0) runs.push_back(open_run_);
  return runs;
}

std::vector<StepRecord> RunSequence(const Automaton& aut, const BaseLM& base_lm,
                                    const ContextEncoder& encoder, TokenId bos_id,
                                    std::span<const TokenId> tokens,
                                    const TraversalConfig& cfg,
                                    std::uint64_t stream,
                                    const RunOptions& options) {
  if (tokens.empty()) ThrowUsage("cannot run an empty sequence");
  CheckTokens(tokens, base_lm.vocab_size(), bos_id);
  std::vector<StepRecord> records;
  records.reserve(tokens.size());
  std::vector<TokenId> context{bos_id};
  TraversalSession session(aut, cfg, stream);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const std::vector<float> query = encoder.Encode(context);
    bool searched = true;
    if (t == 0) {
      session.Start(query);
    } else if (options.fresh_session_each_step) {
      session = TraversalSession(aut, cfg, MixSeed(stream, t));
      session.Start(query);
    } else {
      searched = session.Step(tokens[t - 1], query);
    }
    const Distribution p = session.NextDistribution(base_lm, context, query);
    StepRecord rec;
    rec.position = t;
    rec.gold = tokens[t];
    rec.prob = p[tokens[t]];
    rec.searched = searched;
    rec.num_states = session.current().states.size();
    rec.num_active = session.ActiveEntries().size();
    records.push_back(rec);
    context.push_back(tokens[t]);
  }
  return records;
}

GenerationMode ParseGenerationMode(std::string_view name) {
  if (name == "argmax") return GenerationMode::kArgmax;
  if (name == "sample") return GenerationMode::kSample;
  ThrowUsage("unknown generation mode '" + std::string(name) +
             "' (expected argmax or sample)");
}

std::vector<GeneratedToken> Generate(const Automaton& aut, const BaseLM& base_lm,
                                     const ContextEncoder& encoder,
                                     TokenId bos_id,
                                     std::span<const TokenId> prompt,
                                     std::size_t length, GenerationMode mode,
                                     const TraversalConfig& cfg) {
  CheckTokens(prompt, base_lm.vocab_size(), bos_id);
  std::vector<GeneratedToken> out;
  if (length == 0) return out;
  Rng rng(MixSeed(cfg.rng_seed, 0x67656eULL));
  TraversalSession session(aut, cfg);
  std::vector<TokenId> context{bos_id};
  bool started = false;
  // Advances the session to the position after context, returning whether a
  // search was made.
  auto advance = [&](TokenId consumed) {
    const std::vector<float> query = encoder.Encode(context);
    if (!started) {
      started = true;
      session.Start(query);
      return std::make_pair(true, query);
    }
    return std::make_pair(session.Step(consumed, query), query);
  };
  TokenId last = bos_id;
  for (TokenId token : prompt) {
    advance(last);
    context.push_back(token);
    last = token;
  }
  for (std::size_t i = 0; i < length; ++i) {
    const auto [searched, query] = advance(last);
    const Distribution p = session.NextDistribution(base_lm, context, query);
    const TokenId next =
        mode == GenerationMode::kArgmax ? Argmax(p) : SampleFrom(p, rng);
    out.push_back({next, searched});
    context.push_back(next);
    last = next;
  }
  return out;
}

}  // namespace alm
