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

#ifndef ALM_EVAL_H_
#define ALM_EVAL_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alm/automaton.h"
#include "alm/corpus.h"
#include "alm/datastore.h"
#include "alm/encoder_lm.h"
#include "alm/traversal.h"

namespace alm {

// Everything an evaluation reads. References are non-owning.
struct Model {
  const Datastore& ds;
  const Automaton& automaton;
  const BaseLM& base_lm;
  const ContextEncoder& encoder;
  TokenId bos_id;
};

using RunHistogram = std::map<std::size_t, std::size_t>;

struct EvalResult {
  double perplexity = 0.0;
  double foss = 0.0;
  std::size_t token_count = 0;
  std::size_t search_count = 0;
  RunHistogram run_length_histogram;
  std::optional<double> wall_clock_seconds;
};

// 2^(mean of -log2 p(gold)). Throws a data error naming the first position
// with zero probability.
double Perplexity(std::span<const StepRecord> records);

// 1 - searches / tokens.
double Foss(std::span<const StepRecord> records);

// Maximal stretches of steps without search, each counted together with the
// search step that anchors it. Steps before the first search form a run of
// their own.
RunHistogram ExtractRuns(std::span<const StepRecord> records);

EvalResult Summarize(std::span<const StepRecord> records);

// Traversal over every validation document, each with its own session.
EvalResult EvaluateAutomaton(const Model& model, const Corpus& valid,
                             const TraversalConfig& cfg,
                             std::vector<StepRecord>* records = nullptr,
                             const RunOptions& options = {});

struct SweepPoint {
  Tau tau;
  EvalResult result;
};

std::vector<SweepPoint> SweepTau(const Model& model, const Corpus& valid,
                                 std::span<const Tau> taus,
                                 const TraversalConfig& cfg);

// kNN-LM that skips the search, falling back to the base LM, at a seeded
// uniformly chosen fraction of positions.
EvalResult BaselineKnnLm(const Model& model, const Corpus& valid,
                         double skip_fraction, std::uint64_t seed,
                         std::size_t k_neigh, double lambda,
                         std::vector<StepRecord>* records = nullptr);

struct TimingRow {
  std::string system;
  Tau tau;
  double foss = 0.0;
  double seconds = 0.0;
  // 1 - seconds / seconds of the tau = inf run.
  double saved_fraction = 0.0;
};

// Wall-clock time of a full evaluation per tau. The infinite threshold is
// always run and is the zero-savings reference.
std::vector<TimingRow> TimingHarness(const Model& model, const Corpus& valid,
                                     std::span<const Tau> taus,
                                     const TraversalConfig& cfg);

// CSV writers. Floating-point fields use the shortest round-trip form.
std::string FormatDouble(double value);

struct CurveRow {
  std::string system;
  std::string tau;            // empty for baselines
  std::string skip_fraction;  // empty for automaton rows
  EvalResult result;
};

void WriteCurveCsv(std::ostream& out, std::span<const CurveRow> rows);
void WriteHistogramCsv(std::ostream& out, const RunHistogram& histogram);
void WriteOverlapCsv(std::ostream& out, std::span<const OverlapRow> rows);
void WriteRecordsCsv(std::ostream& out, std::span<const StepRecord> records,
                     const Vocabulary* vocab);
void WriteTimingCsv(std::ostream& out, std::span<const TimingRow> rows);

}  // namespace alm

#endif  // ALM_EVAL_H_
