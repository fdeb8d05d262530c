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

#ifndef ALM_AUTOMATON_H_
#define ALM_AUTOMATON_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "alm/clustering.h"
#include "alm/corpus.h"
#include "alm/datastore.h"
#include "alm/types.h"

namespace alm {

// Weighted automaton whose states are clusters of datastore entries. A state
// q has an arc on token w when some member of q has value w and a pointer;
// the arc leads to the states of all such pointed-to entries. Arc weights are
// not stored: they depend on the query vector (see Phi).
//
// Holds non-owning references; the datastore and clustering must outlive it.
class Automaton {
 public:
  static Automaton Build(const Datastore& ds, const Clustering& clustering);

  const Datastore& datastore() const { return *ds_; }
  const Clustering& clustering() const { return *clustering_; }
  std::size_t num_states() const { return state_arcs_.size() - 1; }

  // delta(q, w): successor states, ascending and deduplicated.
  std::span<const StateId> Successors(StateId q, TokenId w) const;

  // Entries pointed to by members of q with value w, ascending.
  std::span<const EntryId> PointedEntries(StateId q, TokenId w) const;

  // Tokens with an outgoing arc from q, ascending.
  std::span<const TokenId> ArcTokens(StateId q) const;

  // Sum of exp(-dist(query, key)) over members of q with value w.
  double Phi(StateId q, std::span<const float> query, TokenId w) const;

  // As Phi, counting only members listed in active (sorted ascending).
  double Phi(StateId q, std::span<const float> query, TokenId w,
             std::span<const EntryId> active) const;

  std::size_t num_arcs() const { return arc_tokens_.size(); }

  void Save(std::ostream& out) const;
  // Reads tables written by Save and checks them against ds and clustering.
  static Automaton Load(std::istream& in, const Datastore& ds,
                        const Clustering& clustering);
  void SaveFile(const std::string& path) const;
  static Automaton LoadFile(const std::string& path, const Datastore& ds,
                            const Clustering& clustering);

  // GraphViz text for `count` states drawn with seed, with their members'
  // values and outgoing arcs.
  void WriteDot(std::ostream& out, const Vocabulary& vocab, std::size_t count,
                std::uint64_t seed) const;

 private:
  Automaton() = default;
  void Validate() const;
  std::size_t FindArc(StateId q, TokenId w) const;

  const Datastore* ds_ = nullptr;
  const Clustering* clustering_ = nullptr;
  // Compressed sparse rows: state -> arcs -> (successor states, entries).
  std::vector<std::size_t> state_arcs_;
  std::vector<TokenId> arc_tokens_;
  std::vector<std::size_t> arc_state_offsets_;
  std::vector<StateId> arc_states_;
  std::vector<std::size_t> arc_entry_offsets_;
  std::vector<EntryId> arc_entries_;
};

// Active states of a traversal. preferred holds entries reached by following
// pointers on the last consumed token; anchors holds the entries returned by
// the kNN search made at this step, in rank order (empty when no search).
struct StateSet {
  std::vector<StateId> states;
  std::vector<EntryId> preferred;
  std::vector<EntryId> anchors;

  bool empty() const { return states.empty(); }
};

// Every member entry of the states in S, ascending.
std::vector<EntryId> MemberEntries(const Automaton& aut, const StateSet& states);

// Normalized sum over q in S of Phi(q, query, .) using all members.
Distribution PAuto(const Automaton& aut, const StateSet& states,
                   std::span<const float> query, std::size_t vocab_size);

// Same distribution restricted to the given entries, each counted once.
Distribution PAutoOverEntries(const Datastore& ds,
                              std::span<const EntryId> entries,
                              std::span<const float> query,
                              std::size_t vocab_size);

}  // namespace alm

#endif  // ALM_AUTOMATON_H_
