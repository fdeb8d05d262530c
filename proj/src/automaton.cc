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

#include "alm/automaton.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include "alm/error.h"
#include "alm/rng.h"
#include "binary_io.h"

namespace alm {
namespace {

constexpr std::string_view kMagic = "RTMA";
constexpr std::uint32_t kVersion = 1;

template <typename T>
void WriteArray(std::ostream& out, const std::vector<T>& values) {
  io::WriteLE<std::uint64_t>(out, values.size());
  for (T v : values) io::WriteLE(out, v);
}

template <typename T>
std::vector<T> ReadArray(std::istream& in, std::uint64_t limit) {
  const auto count = io::ReadLE<std::uint64_t>(in);
  if (count > limit) ThrowData("automaton table larger than expected");
  std::vector<T> values(count);
  for (T& v : values) v = io::ReadLE<T>(in);
  return values;
}

std::string DotEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

Automaton Automaton::Build(const Datastore& ds, const Clustering& clustering) {
  if (clustering.size() != ds.size()) {
    ThrowUsage("clustering size does not match the datastore");
  }
  Automaton aut;
  aut.ds_ = &ds;
  aut.clustering_ = &clustering;
  const std::size_t num_states = clustering.num_states();
  aut.state_arcs_.assign(1, 0);
  aut.arc_state_offsets_.assign(1, 0);
  aut.arc_entry_offsets_.assign(1, 0);
  std::map<TokenId, std::vector<EntryId>> by_token;
  for (StateId q = 0; q < num_states; ++q) {
    by_token.clear();
    for (EntryId e : clustering.members(q)) {
      if (ds.has_pointer(e)) by_token[ds.value(e)].push_back(ds.pointer(e));
    }
    for (auto& [token, targets] : by_token) {
      std::sort(targets.begin(), targets.end());
      std::vector<StateId> states;
      states.reserve(targets.size());
      for (EntryId t : targets) states.push_back(clustering.state_of(t));
      std::sort(states.begin(), states.end());
      states.erase(std::unique(states.begin(), states.end()), states.end());
      aut.arc_tokens_.push_back(token);
      aut.arc_states_.insert(aut.arc_states_.end(), states.begin(), states.end());
      aut.arc_state_offsets_.push_back(aut.arc_states_.size());
      aut.arc_entries_.insert(aut.arc_entries_.end(), targets.begin(),
                              targets.end());
      aut.arc_entry_offsets_.push_back(aut.arc_entries_.size());
    }
    aut.state_arcs_.push_back(aut.arc_tokens_.size());
  }
  return aut;
}

std::size_t Automaton::FindArc(StateId q, TokenId w) const {
  const auto begin = arc_tokens_.begin() + static_cast<std::ptrdiff_t>(state_arcs_[q]);
  const auto end = arc_tokens_.begin() + static_cast<std::ptrdiff_t>(state_arcs_[q + 1]);
  const auto it = std::lower_bound(begin, end, w);
  if (it == end || *it != w) return std::numeric_limits<std::size_t>::max();
  return static_cast<std::size_t>(it - arc_tokens_.begin());
}

std::span<const StateId> Automaton::Successors(StateId q, TokenId w) const {
  const std::size_t arc = FindArc(q, w);
  if (arc == std::numeric_limits<std::size_t>::max()) return {};
  return {arc_states_.data() + arc_state_offsets_[arc],
          arc_state_offsets_[arc + 1] - arc_state_offsets_[arc]};
}

std::span<const EntryId> Automaton::PointedEntries(StateId q, TokenId w) const {
  const std::size_t arc = FindArc(q, w);
  if (arc == std::numeric_limits<std::size_t>::max()) return {};
  return {arc_entries_.data() + arc_entry_offsets_[arc],
          arc_entry_offsets_[arc + 1] - arc_entry_offsets_[arc]};
}

std::span<const TokenId> Automaton::ArcTokens(StateId q) const {
  return {arc_tokens_.data() + state_arcs_[q],
          state_arcs_[q + 1] - state_arcs_[q]};
}

double Automaton::Phi(StateId q, std::span<const float> query,
                      TokenId w) const {
  double sum = 0.0;
  for (EntryId e : clustering_->members(q)) {
    if (ds_->value(e) == w) sum += std::exp(-ds_->SquaredDistance(query, e));
  }
  return sum;
}

double Automaton::Phi(StateId q, std::span<const float> query, TokenId w,
                      std::span<const EntryId> active) const {
  double sum = 0.0;
  for (EntryId e : clustering_->members(q)) {
    if (ds_->value(e) == w &&
        std::binary_search(active.begin(), active.end(), e)) {
      sum += std::exp(-ds_->SquaredDistance(query, e));
    }
  }
  return sum;
}

void Automaton::Validate() const {
  const std::size_t num_states = clustering_->num_states();
  const std::size_t arcs = arc_tokens_.size();
  auto check_offsets = [](const std::vector<std::size_t>& offsets,
                          std::size_t rows, std::size_t total) {
    if (offsets.size() != rows + 1 || offsets.front() != 0 ||
        offsets.back() != total ||
        !std::is_sorted(offsets.begin(), offsets.end())) {
      ThrowData("automaton tables are inconsistent");
    }
  };
  check_offsets(state_arcs_, num_states, arcs);
  check_offsets(arc_state_offsets_, arcs, arc_states_.size());
  check_offsets(arc_entry_offsets_, arcs, arc_entries_.size());
  for (StateId s : arc_states_) {
    if (s >= num_states) ThrowData("automaton successor state out of range");
  }
  for (EntryId e : arc_entries_) {
    if (e >= ds_->size()) ThrowData("automaton successor entry out of range");
  }
}

void Automaton::Save(std::ostream& out) const {
  io::WriteMagic(out, kMagic);
  io::WriteLE<std::uint32_t>(out, kVersion);
  io::WriteLE<std::uint64_t>(out, ds_->size());
  io::WriteLE<std::uint64_t>(out, num_states());
  WriteArray<std::uint64_t>(out, {state_arcs_.begin(), state_arcs_.end()});
  WriteArray(out, arc_tokens_);
  WriteArray<std::uint64_t>(out, {arc_state_offsets_.begin(), arc_state_offsets_.end()});
  WriteArray(out, arc_states_);
  WriteArray<std::uint64_t>(out, {arc_entry_offsets_.begin(), arc_entry_offsets_.end()});
  WriteArray(out, arc_entries_);
}

Automaton Automaton::Load(std::istream& in, const Datastore& ds,
                          const Clustering& clustering) {
  io::ExpectMagic(in, kMagic);
  if (io::ReadLE<std::uint32_t>(in) != kVersion) {
    ThrowData("unsupported automaton version");
  }
  const auto n = io::ReadLE<std::uint64_t>(in);
  const auto num_states = io::ReadLE<std::uint64_t>(in);
  if (n != ds.size() || num_states != clustering.num_states() ||
      clustering.size() != ds.size()) {
    ThrowData("automaton does not match the datastore and clustering");
  }
  Automaton aut;
  aut.ds_ = &ds;
  aut.clustering_ = &clustering;
  auto to_size = [](const std::vector<std::uint64_t>& v) {
    return std::vector<std::size_t>(v.begin(), v.end());
  };
  aut.state_arcs_ = to_size(ReadArray<std::uint64_t>(in, n + 1));
  aut.arc_tokens_ = ReadArray<std::uint32_t>(in, n);
  aut.arc_state_offsets_ = to_size(ReadArray<std::uint64_t>(in, n + 1));
  aut.arc_states_ = ReadArray<std::uint32_t>(in, n);
  aut.arc_entry_offsets_ = to_size(ReadArray<std::uint64_t>(in, n + 1));
  aut.arc_entries_ = ReadArray<std::uint32_t>(in, n);
  io::ExpectEnd(in);
  aut.Validate();
  return aut;
}

void Automaton::SaveFile(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowData("cannot write " + path);
  Save(out);
  if (!out) ThrowData("failed writing " + path);
}

Automaton Automaton::LoadFile(const std::string& path, const Datastore& ds,
                              const Clustering& clustering) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowData("cannot open " + path);
  return Load(in, ds, clustering);
}

void Automaton::WriteDot(std::ostream& out, const Vocabulary& vocab,
                         std::size_t count, std::uint64_t seed) const {
  const std::size_t total = num_states();
  count = std::min(count, total);
  // Partial Fisher-Yates over state ids.
  std::vector<StateId> ids(total);
  for (StateId q = 0; q < total; ++q) ids[q] = q;
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(ids[i], ids[i + rng.UniformBelow(total - i)]);
  }
  ids.resize(count);
  std::sort(ids.begin(), ids.end());

  out << "digraph automaton {\n  rankdir=LR;\n";
  for (StateId q : ids) {
    out << "  q" << q << " [label=\"q" << q << "\\n";
    const auto members = clustering_->members(q);
    const std::size_t shown = std::min<std::size_t>(members.size(), 5);
    for (std::size_t m = 0; m < shown; ++m) {
      out << (m ? " " : "") << DotEscape(vocab.Token(ds_->value(members[m])));
    }
    if (members.size() > shown) out << " ...";
    out << "\"];\n";
    for (TokenId w : ArcTokens(q)) {
      for (StateId s : Successors(q, w)) {
        out << "  q" << q << " -> q" << s << " [label=\""
            << DotEscape(vocab.Token(w)) << "\"];\n";
      }
    }
  }
  out << "}\n";
}

std::vector<EntryId> MemberEntries(const Automaton& aut, const StateSet& states) {
  std::vector<EntryId> entries;
  for (StateId q : states.states) {
    const auto members = aut.clustering().members(q);
    entries.insert(entries.end(), members.begin(), members.end());
  }
  std::sort(entries.begin(), entries.end());
  return entries;
}

Distribution PAuto(const Automaton& aut, const StateSet& states,
                   std::span<const float> query, std::size_t vocab_size) {
  if (states.empty()) ThrowUsage("p_auto needs a non-empty state set");
  const std::vector<EntryId> entries = MemberEntries(aut, states);
  return PAutoOverEntries(aut.datastore(), entries, query, vocab_size);
}

Distribution PAutoOverEntries(const Datastore& ds,
                              std::span<const EntryId> entries,
                              std::span<const float> query,
                              std::size_t vocab_size) {
  if (entries.empty()) ThrowUsage("p_auto needs at least one active entry");
  std::vector<double> dist(entries.size());
  double min_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    dist[i] = ds.SquaredDistance(query, entries[i]);
    min_dist = std::min(min_dist, dist[i]);
  }
  // exp(-(d - min)) differs from exp(-d) by a common factor that cancels.
  Distribution p(vocab_size, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const double w = std::exp(-(dist[i] - min_dist));
    p.at(ds.value(entries[i])) += w;
    total += w;
  }
  for (double& v : p) v /= total;
  return p;
}

}  // namespace alm
