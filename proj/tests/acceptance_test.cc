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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any selected criterion fails. `--criterion N` runs just one.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "alm/automaton.h"
#include "alm/clustering.h"
#include "alm/config.h"
#include "alm/corpus.h"
#include "alm/datastore.h"
#include "alm/encoder_lm.h"
#include "alm/error.h"
#include "alm/eval.h"
#include "alm/fixtures.h"
#include "alm/pipeline.h"
#include "alm/rng.h"
#include "alm/simd/kernels.h"
#include "alm/traversal.h"
#include "test_util.h"

#ifndef ALM_SOURCE_DIR
#define ALM_SOURCE_DIR "."
#endif

namespace alm {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few failure messages.
class Checker {
 public:
  void Expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 5) messages_ += (messages_.empty() ? "" : "; ") + what;
  }
  Outcome Done(const std::string& summary) const {
    Outcome o;
    o.pass = failures_ == 0;
    o.detail = summary;
    if (!o.pass) {
      o.detail += " | " + std::to_string(failures_) + " failure(s): " + messages_;
    }
    return o;
  }

 private:
  std::size_t failures_ = 0;
  std::string messages_;
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(double v) { return FormatDouble(v); }

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// The checked-in repetitive experiment, with artifacts kept out of the
// source tree.
RunConfig RepetitiveConfig(const fs::path& artifact_dir) {
  RunConfig cfg = RunConfig::LoadFile(std::string(ALM_SOURCE_DIR) + "/configs/repetitive.json");
  cfg.artifact_dir = artifact_dir.string();
  return cfg;
}

fs::path ScratchDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("alm_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// 1 -----------------------------------------------------------------------
Outcome KnnOracle() {
  const auto start = Clock::now();
  Checker c;
  Rng rng(101);
  std::size_t queries = 0;
  for (int store = 0; store < 50; ++store) {
    const std::size_t n = 1 + rng.UniformBelow(5000);
    const std::size_t dim = 1 + rng.UniformBelow(32);
    const KeyPrecision prec = store % 5 == 4 ? KeyPrecision::kFp16 : KeyPrecision::kFp32;
    const Datastore ds = testing::RandomDatastore(rng, n, dim, 50, prec);
    for (int qi = 0; qi < 4; ++qi) {
      // Some queries sit exactly on a key to exercise zero distances.
      std::vector<float> q = qi == 0 ? ds.Key(static_cast<EntryId>(rng.UniformBelow(n)))
                                     : testing::RandomKeys(rng, 1, dim);
      const std::size_t k = 1 + rng.UniformBelow(std::min<std::size_t>(n + 5, 64));
      std::vector<std::pair<double, EntryId>> all(n);
      for (EntryId e = 0; e < n; ++e) all[e] = {testing::OracleDistance(ds, q, e), e};
      std::sort(all.begin(), all.end());
      const std::size_t want = std::min(k, n);
      const NeighborSet got = KnnSearch(ds, q, k);
      ++queries;
      if (got.entries.size() != want) {
        c.Expect(false, "store " + std::to_string(store) + ": wrong result size");
        continue;
      }
      std::set<EntryId> a, b;
      for (std::size_t r = 0; r < want; ++r) {
        a.insert(got.entries[r].index);
        b.insert(all[r].second);
        const double od = all[r].first;
        c.Expect(std::fabs(got.entries[r].distance - od) <= 1e-6 * std::max(od, 1e-30) ||
                     got.entries[r].distance == od,
                 "store " + std::to_string(store) + ": distance mismatch at rank " +
                     std::to_string(r));
      }
      c.Expect(a == b, "store " + std::to_string(store) + ": index sets differ");
    }
  }
  const double secs = Seconds(start);
  c.Expect(secs < 30.0, "runtime " + Fmt(secs) + " s exceeds 30 s");
  return c.Done("50 stores, " + std::to_string(queries) + " queries, isa=" +
                std::string(simd::IsaName(simd::ActiveIsa())) + ", " + Fmt(secs) + " s");
}

// 2 -----------------------------------------------------------------------
Outcome PKnnBridge() {
  Checker c;
  Rng rng(202);
  const std::size_t vocab = 40;
  const Datastore ds = testing::RandomDatastore(rng, 2000, 16, vocab);
  const Clustering cl = SingletonClustering(ds);
  const Automaton aut = Automaton::Build(ds, cl);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const std::vector<float> q = testing::RandomKeys(rng, 1, 16);
    const NeighborSet ns = KnnSearch(ds, q, 1 + rng.UniformBelow(128));
    StateSet s;
    for (const Neighbor& nb : ns.entries) s.states.push_back(cl.state_of(nb.index));
    std::sort(s.states.begin(), s.states.end());
    const Distribution pa = PAuto(aut, s, q, vocab);
    const Distribution pk = PKnn(ds, ns, vocab);
    // Same check through a traversal session with the cap out of the way.
    TraversalConfig cfg;
    cfg.tau = Tau::Infinite();
    cfg.k_neigh = ns.k;
    cfg.max_knns = ds.size();
    cfg.lambda = 1.0;
    TraversalSession session(aut, cfg);
    session.Start(q);
    const std::vector<TokenId> ctx = {0};
    CountLM lm({{1}}, vocab, 0, {});
    const Distribution ps = session.NextDistribution(lm, ctx, q);
    for (std::size_t w = 0; w < vocab; ++w) {
      worst = std::max({worst, std::fabs(pa[w] - pk[w]), std::fabs(ps[w] - pk[w])});
    }
  }
  c.Expect(worst <= 1e-9, "max |p_auto - p_knn| = " + Fmt(worst));
  return c.Done("100 queries, max abs diff " + Fmt(worst));
}

// 3 -----------------------------------------------------------------------
Outcome KnnLmReduction() {
  Checker c;
  const fs::path scratch = ScratchDir("c3");
  const RunConfig cfg = RepetitiveConfig(scratch);
  const Artifacts a = BuildInMemory(cfg);
  const Model model = a.model();
  const TraversalConfig tcfg = cfg.Traversal(Tau::Infinite());
  c.Expect(tcfg.k_neigh <= tcfg.max_knns, "k_neigh exceeds max_knns in the config");

  // Gold-token probabilities through both evaluation paths.
  std::vector<StepRecord> knn, aut;
  BaselineKnnLm(model, a.valid, 0.0, cfg.eval_seed, cfg.k_neigh, cfg.lambda, &knn);
  RunOptions fresh;
  fresh.fresh_session_each_step = true;
  EvaluateAutomaton(model, a.valid, tcfg, &aut, fresh);
  double worst = 0;
  c.Expect(knn.size() == aut.size(), "record counts differ");
  for (std::size_t i = 0; i < std::min(knn.size(), aut.size()); ++i) {
    worst = std::max(worst, std::fabs(knn[i].prob - aut[i].prob));
  }
  // Whole distributions, position by position.
  std::size_t positions = 0;
  for (std::size_t d = 0; d < a.valid.documents.size(); ++d) {
    std::vector<TokenId> ctx = {a.vocab.bos_id()};
    for (TokenId gold : a.valid.documents[d]) {
      const std::vector<float> q = a.encoder->Encode(ctx);
      TraversalSession session(*a.automaton, tcfg, d);
      session.Start(q);
      const Distribution pa = session.NextDistribution(*a.base_lm, ctx, q);
      const Distribution pk = Interpolate(PKnn(*a.ds, KnnSearch(*a.ds, q, cfg.k_neigh),
                                               a.vocab.size()),
                                          a.base_lm->Prob(ctx), cfg.lambda);
      for (std::size_t w = 0; w < pa.size(); ++w) worst = std::max(worst, std::fabs(pa[w] - pk[w]));
      ctx.push_back(gold);
      ++positions;
    }
  }
  c.Expect(worst <= 1e-9, "max distribution diff " + Fmt(worst));
  fs::remove_all(scratch);
  return c.Done(std::to_string(positions) + " positions, k-means states, max abs diff " +
                Fmt(worst));
}

// 4 -----------------------------------------------------------------------
// Twenty entries in four documents with repeated tokens; several states
// merge entries from different documents.
struct Handcrafted {
  std::unique_ptr<Datastore> ds;
  std::unique_ptr<Clustering> cl;
  std::unique_ptr<Automaton> aut;
};

Handcrafted MakeHandcrafted() {
  // tokens 1..4; documents of lengths 6, 5, 5, 4
  const std::vector<std::vector<TokenId>> docs = {
      {1, 2, 3, 1, 2, 4}, {2, 3, 1, 2, 3}, {1, 1, 2, 4, 3}, {3, 2, 1, 4}};
  std::vector<float> keys;
  std::vector<TokenId> values;
  std::vector<EntryId> pointers;
  EntryId base = 0;
  Rng rng(404);
  for (const auto& doc : docs) {
    for (std::size_t t = 0; t < doc.size(); ++t) {
      keys.push_back(static_cast<float>(rng.UniformDouble()));
      keys.push_back(static_cast<float>(rng.UniformDouble()));
      values.push_back(doc[t]);
      pointers.push_back(t + 1 < doc.size() ? base + static_cast<EntryId>(t + 1) : kNoPointer);
    }
    base += static_cast<EntryId>(doc.size());
  }
  // 9 states: 0 {0,6,11} 1 {1,7} 2 {2,12,16} 3 {3} 4 {4,9,14} 5 {5,10}
  // 6 {8,13} 7 {15,17} 8 {18,19}
  const std::vector<StateId> assignment = {0, 1, 2, 3, 4, 5, 0, 1, 6, 4,
                                           5, 0, 2, 6, 4, 7, 2, 7, 8, 8};
  Handcrafted h;
  h.ds = std::make_unique<Datastore>(2, KeyPrecision::kFp32, keys, values, pointers);
  h.cl = std::make_unique<Clustering>(ClusterAlgo::kGreedy, assignment, 9);
  h.aut = std::make_unique<Automaton>(Automaton::Build(*h.ds, *h.cl));
  return h;
}

Outcome RestartRule() {
  Checker c;
  const Handcrafted h = MakeHandcrafted();
  const Datastore& ds = *h.ds;
  const Clustering& cl = *h.cl;
  const std::size_t n = ds.size();

  auto naive_delta = [&](const std::vector<StateId>& states, TokenId w) {
    std::set<StateId> t;
    std::set<EntryId> pref;
    for (EntryId e = 0; e < n; ++e) {
      if (std::find(states.begin(), states.end(), cl.state_of(e)) == states.end()) continue;
      if (ds.value(e) != w || !ds.has_pointer(e)) continue;
      t.insert(cl.state_of(ds.pointer(e)));
      pref.insert(ds.pointer(e));
    }
    return std::make_pair(t, pref);
  };

  std::size_t steps = 0;
  for (Tau tau : {Tau(1), Tau(2), Tau(3), Tau::Infinite()}) {
    for (std::size_t k_neigh : {1u, 3u}) {
      TraversalConfig cfg;
      cfg.tau = tau;
      cfg.k_neigh = k_neigh;
      cfg.max_knns = 20;
      // Every entry as the starting point, then teacher-forced along its
      // document, with the query at each position taken from the key of the
      // entry at that position.
      for (EntryId start = 0; start < n; ++start) {
        TraversalSession session(*h.aut, cfg, start);
        session.Start(ds.Key(start));
        EntryId pos = start;
        while (ds.has_pointer(pos)) {
          const std::vector<StateId> before = session.current().states;
          const TokenId w = ds.value(pos);
          const EntryId next_pos = ds.pointer(pos);
          const std::vector<float> q = ds.Key(next_pos);
          auto [t, pref] = naive_delta(before, w);
          const bool want_search = !tau.Continues(t.size());
          std::set<StateId> want = t;
          if (want_search) {
            for (const Neighbor& nb : KnnSearch(ds, q, k_neigh).entries) {
              want.insert(cl.state_of(nb.index));
            }
          }
          const bool searched = session.Step(w, q);
          const std::string where = "tau=" + tau.ToString() + " k=" + std::to_string(k_neigh) +
                                    " start=" + std::to_string(start) +
                                    " pos=" + std::to_string(next_pos);
          c.Expect(searched == want_search, where + ": search decision");
          c.Expect(session.current().states == std::vector<StateId>(want.begin(), want.end()),
                   where + ": state set");
          c.Expect(session.current().preferred ==
                       std::vector<EntryId>(pref.begin(), pref.end()),
                   where + ": preferred entries");
          pos = next_pos;
          ++steps;
        }
      }
      // Every single state under every token, including dead ends.
      for (StateId q0 = 0; q0 < cl.num_states(); ++q0) {
        for (TokenId w = 1; w <= 4; ++w) {
          TraversalSession session(*h.aut, cfg);
          // Start from a query on the state's first member with k=1 so the
          // initial state set is exactly {q0}.
          TraversalConfig one = cfg;
          one.k_neigh = 1;
          TraversalSession probe(*h.aut, one);
          probe.Start(ds.Key(cl.members(q0)[0]));
          if (probe.current().states != std::vector<StateId>{q0}) continue;
          const std::vector<float> q = ds.Key(static_cast<EntryId>((q0 * 7 + w) % n));
          auto [t, pref] = naive_delta({q0}, w);
          std::set<StateId> want = t;
          const bool want_search = !tau.Continues(t.size());
          if (want_search) {
            for (const Neighbor& nb : KnnSearch(ds, q, 1).entries) want.insert(cl.state_of(nb.index));
          }
          c.Expect(probe.Step(w, q) == want_search, "single-state search decision");
          c.Expect(probe.current().states == std::vector<StateId>(want.begin(), want.end()),
                   "single-state successor set");
          ++steps;
        }
      }
    }
  }
  return c.Done("20 entries, 9 states, taus {1,2,3,inf}, " + std::to_string(steps) +
                " steps checked");
}

// 5 -----------------------------------------------------------------------
Outcome InfiniteTauAndZeroLambda() {
  Checker c;
  const fs::path scratch = ScratchDir("c5");
  RunConfig cfg = RepetitiveConfig(scratch);
  const Artifacts a = BuildInMemory(cfg);
  const Model model = a.model();
  const EvalResult inf = EvaluateAutomaton(model, a.valid, cfg.Traversal(Tau::Infinite()));
  c.Expect(inf.foss == 0.0, "foss at tau=inf is " + Fmt(inf.foss));

  cfg.lambda = 0.0;
  std::vector<double> ppl;
  for (Tau tau : {Tau(1), Tau(2), Tau(4), Tau(8), Tau(16), Tau::Infinite()}) {
    ppl.push_back(EvaluateAutomaton(model, a.valid, cfg.Traversal(tau)).perplexity);
  }
  for (double r : {0.0, 0.25, 0.5, 1.0}) {
    ppl.push_back(BaselineKnnLm(model, a.valid, r, cfg.eval_seed, cfg.k_neigh, 0.0).perplexity);
  }
  std::vector<StepRecord> base;
  for (const auto& doc : a.valid.documents) {
    std::vector<TokenId> ctx = {a.vocab.bos_id()};
    for (TokenId w : doc) {
      StepRecord r;
      r.prob = a.base_lm->Prob(ctx)[w];
      base.push_back(r);
      ctx.push_back(w);
    }
  }
  ppl.push_back(Perplexity(base));
  for (double p : ppl) c.Expect(p == ppl.front(), "perplexity " + Fmt(p) + " != " + Fmt(ppl.front()));
  fs::remove_all(scratch);
  return c.Done("foss(inf)=" + Fmt(inf.foss) + ", lambda=0 perplexity " + Fmt(ppl.front()) +
                " across " + std::to_string(ppl.size()) + " runs");
}

// 6 -----------------------------------------------------------------------
Outcome VerbatimChain() {
  const auto start = Clock::now();
  Checker c;
  const fs::path scratch = ScratchDir("c6");
  RunConfig cfg = RepetitiveConfig(scratch);
  cfg.cluster_algo = ClusterAlgo::kSingleton;
  const Artifacts a = BuildInMemory(cfg);
  c.Expect(a.valid.TokenCount() >= 200, "validation has fewer than 200 tokens");
  // The fixture promise: every validation document occurs verbatim in train.
  for (const auto& v : a.valid.documents) {
    bool found = false;
    for (const auto& t : a.train.documents) {
      found = found || std::search(t.begin(), t.end(), v.begin(), v.end()) != t.end();
    }
    c.Expect(found, "validation document not a training substring");
  }
  const EvalResult r = EvaluateAutomaton(a.model(), a.valid, cfg.Traversal(Tau(1)));
  std::vector<StepRecord> base;
  for (const auto& doc : a.valid.documents) {
    std::vector<TokenId> ctx = {a.vocab.bos_id()};
    for (TokenId w : doc) {
      StepRecord s;
      s.prob = a.base_lm->Prob(ctx)[w];
      base.push_back(s);
      ctx.push_back(w);
    }
  }
  const double base_ppl = Perplexity(base);
  c.Expect(r.foss >= 0.9, "foss " + Fmt(r.foss) + " < 0.9");
  c.Expect(r.perplexity < base_ppl, "perplexity " + Fmt(r.perplexity) +
                                        " not below base " + Fmt(base_ppl));
  const double secs = Seconds(start);
  c.Expect(secs < 10.0, "runtime " + Fmt(secs) + " s exceeds 10 s");
  fs::remove_all(scratch);
  return c.Done(std::to_string(a.valid.TokenCount()) + " tokens, foss=" + Fmt(r.foss) +
                ", ppl=" + Fmt(r.perplexity) + " vs base " + Fmt(base_ppl) + ", " +
                Fmt(secs) + " s");
}

// 7 -----------------------------------------------------------------------
Outcome CrossSentence() {
  Checker c;
  const auto m = testing::MakeTextModel(
      "the old president is joseph biden of delaware\n\nwe said that is joe biden today", "");
  // Rebuild with the two entries whose context ends in "is" sharing a state.
  const Datastore& ds = *m->ds;
  const TokenId is = m->Id("is");
  std::vector<EntryId> after_is;
  for (EntryId e = 0; e + 1 < ds.size(); ++e) {
    if (ds.value(e) == is && ds.has_pointer(e)) after_is.push_back(ds.pointer(e));
  }
  c.Expect(after_is.size() == 2, "expected two entries after 'is'");
  std::vector<StateId> assignment(ds.size());
  StateId next = 0;
  for (EntryId e = 0; e < ds.size(); ++e) {
    assignment[e] = e == after_is[1] ? assignment[after_is[0]] : next++;
  }
  const Clustering merged(ClusterAlgo::kGreedy, assignment, next);
  const Automaton aut = Automaton::Build(ds, merged);
  const StateId q = merged.state_of(after_is[0]);
  c.Expect(!aut.Successors(q, m->Id("joseph")).empty(), "no arc on joseph");
  c.Expect(!aut.Successors(q, m->Id("joe")).empty(), "no arc on joe");

  // Generation from the "is" prefix of either document.
  std::set<std::string> emitted;
  for (const char* prompt : {"the old president is", "we said that is"}) {
    std::vector<TokenId> ids;
    std::istringstream words(prompt);
    for (std::string w; words >> w;) ids.push_back(m->Id(w));
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      TraversalConfig cfg;
      cfg.tau = Tau(1);
      cfg.k_neigh = 1;
      cfg.max_knns = 8;
      cfg.lambda = 1.0;
      cfg.rng_seed = seed;
      const auto out = Generate(aut, *m->lm, *m->encoder, m->vocab.bos_id(), ids, 2,
                                GenerationMode::kSample, cfg);
      const std::string first = m->vocab.Token(out[0].token);
      c.Expect(!out[0].searched, "search at the merge step");
      c.Expect(first == "joe" || first == "joseph", "unexpected continuation " + first);
      c.Expect(!out[1].searched, "search on the step after the merge");
      c.Expect(m->vocab.Token(out[1].token) == "biden", "continuation did not reach biden");
      emitted.insert(first);
    }
  }
  c.Expect(emitted.count("joe") && emitted.count("joseph"), "only one continuation emitted");
  return c.Done("merged state arcs on joe and joseph; sampled continuations {" +
                [&] {
                  std::string s;
                  for (const auto& e : emitted) s += (s.empty() ? "" : ",") + e;
                  return s;
                }() +
                "} without search");
}

// 8 -----------------------------------------------------------------------
Outcome ClusteringInvariants() {
  Checker c;
  const fs::path scratch = ScratchDir("c8");
  const RunConfig cfg = RepetitiveConfig(scratch);
  Artifacts a = LoadCorpora(cfg);
  const Datastore ds = BuildDatastore(a.train, *a.encoder, a.vocab.bos_id(), KeyPrecision::kFp32);
  const std::size_t n = ds.size();
  for (double ratio : {100.0, 50.0, 10.0}) {
    RunConfig rc = cfg;
    rc.avg_cluster_size = ratio;
    const std::size_t k = rc.ResolveKClust(n);
    KmeansReport report;
    const Clustering cl = Kmeans(ds, {k, 100, cfg.cluster_seed}, &report);
    for (std::size_t i = 1; i < report.sse_history.size(); ++i) {
      c.Expect(report.sse_history[i] <= report.sse_history[i - 1] * (1 + 1e-12),
               "SSE rose at iteration " + std::to_string(i));
    }
    c.Expect(report.converged, "k-means did not converge at ratio " + Fmt(ratio));
    c.Expect(std::fabs(cl.AverageClusterSize() - ratio) <= 1.0,
             "average size " + Fmt(cl.AverageClusterSize()) + " vs " + Fmt(ratio));
    // Nearest centroid by brute force.
    for (EntryId e = 0; e < n; ++e) {
      const std::vector<float> key = ds.Key(e);
      double best = std::numeric_limits<double>::infinity();
      StateId arg = 0;
      for (StateId s = 0; s < cl.num_states(); ++s) {
        double d = 0;
        for (std::size_t j = 0; j < key.size(); ++j) {
          const double diff = static_cast<double>(key[j]) - cl.centroid(s)[j];
          d += diff * diff;
        }
        if (d < best) {
          best = d;
          arg = s;
        }
      }
      c.Expect(cl.state_of(e) == arg ||
                   [&] {
                     double d = 0;
                     for (std::size_t j = 0; j < key.size(); ++j) {
                       const double diff = static_cast<double>(key[j]) - cl.centroid(cl.state_of(e))[j];
                       d += diff * diff;
                     }
                     return d == best;
                   }(),
               "entry " + std::to_string(e) + " not at its nearest centroid");
    }
  }
  Rng rng(808);
  const Datastore small = testing::RandomDatastore(rng, 300, 8, 10);
  const Clustering full = Kmeans(small, {small.size(), 25, 1});
  const Clustering single = SingletonClustering(small);
  c.Expect(std::equal(full.assignment().begin(), full.assignment().end(),
                      single.assignment().begin(), single.assignment().end()),
           "k_clust=N differs from singleton");
  fs::remove_all(scratch);
  return c.Done("N=" + std::to_string(n) + ", ratios {100,50,10}, SSE monotone, nearest-centroid "
                "verified, k_clust=N equals singleton");
}

// 9, 10 ------------------------------------------------------------------
struct SweepData {
  std::map<std::string, EvalResult> points;
  EvalResult knn0;
  std::string config_note;
};

const SweepData& RepetitiveSweep() {
  static const SweepData data = [] {
    SweepData d;
    const fs::path scratch = ScratchDir("c9");
    const RunConfig cfg = RepetitiveConfig(scratch);
    const Artifacts a = BuildInMemory(cfg);
    const Model model = a.model();
    for (Tau tau : {Tau(1), Tau(2), Tau(4), Tau(8), Tau::Infinite()}) {
      d.points[tau.ToString()] = EvaluateAutomaton(model, a.valid, cfg.Traversal(tau));
    }
    d.knn0 = BaselineKnnLm(model, a.valid, 0.0, cfg.eval_seed, cfg.k_neigh, cfg.lambda);
    d.config_note = std::string(ClusterAlgoName(cfg.cluster_algo)) + " k_clust=" +
                    std::to_string(a.clustering->num_states()) + " N=" +
                    std::to_string(a.ds->size());
    fs::remove_all(scratch);
    return d;
  }();
  return data;
}

Outcome FossTrend() {
  Checker c;
  const SweepData& d = RepetitiveSweep();
  const EvalResult& one = d.points.at("1");
  const EvalResult& eight = d.points.at("8");
  const EvalResult& inf = d.points.at("inf");
  c.Expect(one.foss > eight.foss, "FoSS(1)=" + Fmt(one.foss) + " <= FoSS(8)=" + Fmt(eight.foss));
  c.Expect(one.perplexity >= inf.perplexity, "ppl(1)=" + Fmt(one.perplexity) +
                                                 " < ppl(inf)=" + Fmt(inf.perplexity));
  std::string sweep;
  for (const char* t : {"1", "2", "4", "8", "inf"}) {
    sweep += std::string(sweep.empty() ? "" : " ") + "tau=" + t + ":(" +
             Fmt(d.points.at(t).foss) + "," + Fmt(d.points.at(t).perplexity) + ")";
  }
  return c.Done(d.config_note + " " + sweep);
}

Outcome PointerInclusion() {
  Checker c;
  const SweepData& d = RepetitiveSweep();
  const EvalResult& inf = d.points.at("inf");
  c.Expect(inf.foss == 0.0, "FoSS(inf) != 0");
  c.Expect(inf.perplexity <= d.knn0.perplexity,
           "ppl(inf)=" + Fmt(inf.perplexity) + " > knnlm(r=0)=" + Fmt(d.knn0.perplexity));
  return c.Done(d.config_note + " ppl(inf)=" + Fmt(inf.perplexity) +
                " knnlm(r=0)=" + Fmt(d.knn0.perplexity));
}

// 11 ----------------------------------------------------------------------
std::string EvalBytes(const RunConfig& cfg, const Artifacts& a, const fs::path& out) {
  std::ostringstream log;
  const auto files = RunEval(cfg, a, out.string(), EvalSelection{}, log);
  std::string all;
  for (const auto& f : files) all += fs::path(f).filename().string() + "\n" + Slurp(f);
  return all;
}

Outcome Serialization() {
  Checker c;
  const fs::path scratch = ScratchDir("c11");
  RunConfig cfg = RepetitiveConfig(scratch / "art");
  cfg.write_records = true;
  const Artifacts mem = BuildInMemory(cfg);
  const std::string in_memory = EvalBytes(cfg, mem, scratch / "mem");
  BuildArtifacts(cfg);
  const Artifacts loaded = LoadArtifacts(cfg);
  const std::string from_disk = EvalBytes(cfg, loaded, scratch / "disk");
  c.Expect(!in_memory.empty() && in_memory == from_disk, "CSV bytes differ after reload");

  // fp16 store: keys round-trip within half-precision bounds; eval repeats.
  RunConfig half = cfg;
  half.precision = KeyPrecision::kFp16;
  const Artifacts h1 = BuildArtifacts(half);
  const Artifacts h2 = LoadArtifacts(half);
  const Datastore f32 = BuildDatastore(h1.train, *h1.encoder, h1.vocab.bos_id(), KeyPrecision::kFp32);
  double worst_excess = 0;
  for (EntryId e = 0; e < f32.size(); ++e) {
    const auto exact = f32.Key(e);
    const auto stored = h2.ds->Key(e);
    for (std::size_t j = 0; j < exact.size(); ++j) {
      // Half keeps 11 significant bits; subnormal spacing is 2^-24.
      const double bound = std::max(std::ldexp(std::fabs(static_cast<double>(exact[j])), -11),
                                    std::ldexp(1.0, -25));
      worst_excess = std::max(worst_excess, std::fabs(static_cast<double>(stored[j]) - exact[j]) - bound);
    }
  }
  c.Expect(worst_excess <= 0.0, "fp16 key error above the rounding bound");
  const std::string e1 = EvalBytes(half, h1, scratch / "h1");
  const std::string e2 = EvalBytes(half, h2, scratch / "h2");
  const std::string e3 = EvalBytes(half, h2, scratch / "h3");
  c.Expect(e1 == e2 && e2 == e3, "fp16 eval not deterministic");
  fs::remove_all(scratch);
  return c.Done("fp32 in-memory vs reloaded CSVs identical (" + std::to_string(in_memory.size()) +
                " bytes); fp16 keys within bound; fp16 evals identical");
}

// 12 ----------------------------------------------------------------------
using Ngram = std::vector<TokenId>;

OverlapRow OracleOverlap(const Corpus& train, const Corpus& valid, std::size_t n) {
  std::set<Ngram> seen;
  for (const auto& d : train.documents) {
    for (std::size_t i = 0; i + n <= d.size(); ++i) seen.insert(Ngram(d.begin() + i, d.begin() + i + n));
  }
  std::set<Ngram> types;
  std::size_t occ = 0, occ_hit = 0;
  for (const auto& d : valid.documents) {
    for (std::size_t i = 0; i + n <= d.size(); ++i) {
      Ngram g(d.begin() + i, d.begin() + i + n);
      ++occ;
      occ_hit += seen.count(g);
      types.insert(g);
    }
  }
  std::size_t type_hit = 0;
  for (const auto& g : types) type_hit += seen.count(g);
  OverlapRow r;
  r.n = n;
  r.defined = occ > 0;
  r.type_fraction = types.empty() ? 0.0 : static_cast<double>(type_hit) / static_cast<double>(types.size());
  r.occurrence_fraction = occ == 0 ? 0.0 : static_cast<double>(occ_hit) / static_cast<double>(occ);
  return r;
}

Outcome Overlap() {
  Checker c;
  const FixtureText rep = MakeRepetitiveFixture(12);
  Vocabulary v1;
  const Corpus t1 = TokenizeInto(rep.train, TokenizeMode::kWhitespace, v1);
  const Corpus s1 = TokenizeInto(rep.valid, TokenizeMode::kWhitespace, v1);
  for (const OverlapRow& r : NgramOverlap(t1, s1, 6)) {
    c.Expect(r.type_fraction == 1.0 && r.occurrence_fraction == 1.0,
             "subset fixture below 100% at n=" + std::to_string(r.n));
  }
  Vocabulary v2;
  const Corpus t2 = TokenizeInto("a b c a b\n\nc c a", TokenizeMode::kWhitespace, v2);
  const Corpus s2 = TokenizeInto("x y z\n\nz y x y", TokenizeMode::kWhitespace, v2);
  for (const OverlapRow& r : NgramOverlap(t2, s2, 4)) {
    c.Expect(r.type_fraction == 0.0 && r.occurrence_fraction == 0.0,
             "disjoint fixture above 0% at n=" + std::to_string(r.n));
  }
  // Mixed: novel fixture validation plus half of the repetitive one.
  const FixtureText nov = MakeNovelFixture(12);
  Vocabulary v3;
  const Corpus t3 = TokenizeInto(rep.train, TokenizeMode::kWhitespace, v3);
  Corpus s3 = TokenizeInto(nov.valid, TokenizeMode::kWhitespace, v3);
  const Corpus extra = TokenizeInto(rep.valid, TokenizeMode::kWhitespace, v3);
  for (std::size_t i = 0; i < extra.documents.size(); i += 2) s3.documents.push_back(extra.documents[i]);
  std::size_t compared = 0;
  bool partial = false;
  for (const OverlapRow& r : NgramOverlap(t3, s3, 8)) {
    const OverlapRow o = OracleOverlap(t3, s3, r.n);
    c.Expect(r.type_fraction == o.type_fraction && r.occurrence_fraction == o.occurrence_fraction &&
                 r.defined == o.defined,
             "mixed fixture differs from oracle at n=" + std::to_string(r.n));
    partial = partial || (r.type_fraction > 0.0 && r.type_fraction < 1.0);
    ++compared;
  }
  c.Expect(partial, "mixed fixture is not actually mixed");
  return c.Done("subset 100%, disjoint 0%, mixed matches oracle for n=1.." + std::to_string(compared));
}

// 13 ----------------------------------------------------------------------
std::uint64_t TreeHash(const fs::path& root, std::string* listing) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::uint64_t h = Fnv1a("");
  for (const auto& f : files) {
    const std::string rel = fs::relative(f, root).string();
    if (rel.find("timing") != std::string::npos) continue;
    h = Fnv1a(rel, h);
    h = Fnv1a(Slurp(f), h);
    *listing += rel + " ";
  }
  return h;
}

Outcome EndToEnd() {
  Checker c;
  const auto start = Clock::now();
  const fs::path scratch = ScratchDir("c13");
  std::vector<std::uint64_t> hashes;
  std::string listing;
  for (int run = 0; run < 2; ++run) {
    fs::remove_all(scratch / "art");
    fs::remove_all(scratch / "out");
    const RunConfig cfg = RepetitiveConfig(scratch / "art");
    BuildArtifacts(cfg);
    const Artifacts a = LoadArtifacts(cfg);
    std::ostringstream log;
    RunSweep(cfg, a, (scratch / "out" / "sweep").string(), log);
    RunEval(cfg, a, (scratch / "out" / "eval").string(), EvalSelection{}, log);
    listing.clear();
    hashes.push_back(TreeHash(scratch, &listing));
  }
  c.Expect(hashes[0] == hashes[1], "output trees differ between runs");
  fs::remove_all(scratch);
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hashes[0]));
  return c.Done("two build+sweep+eval runs hash to " + std::string(hex) + " (" +
                Fmt(Seconds(start)) + " s)");
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace alm

int main(int argc, char** argv) {
  using alm::Criterion;
  const std::vector<Criterion> criteria = {
      {1, "knn oracle equivalence", alm::KnnOracle},
      {2, "p_knn / p_auto bridge", alm::PKnnBridge},
      {3, "knn-lm reduction", alm::KnnLmReduction},
      {4, "restart rule", alm::RestartRule},
      {5, "tau=inf and lambda=0 identities", alm::InfiniteTauAndZeroLambda},
      {6, "verbatim chain", alm::VerbatimChain},
      {7, "cross-sentence composition", alm::CrossSentence},
      {8, "clustering invariants", alm::ClusteringInvariants},
      {9, "foss/tau trend", alm::FossTrend},
      {10, "pointer inclusion", alm::PointerInclusion},
      {11, "serialization round trips", alm::Serialization},
      {12, "overlap analyzer", alm::Overlap},
      {13, "end-to-end determinism", alm::EndToEnd},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
  }
  int failed = 0;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    alm::Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail
              << std::endl;
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
