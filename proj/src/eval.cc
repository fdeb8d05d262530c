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

#include "alm/eval.h"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ostream>
#include <string>

#include "alm/error.h"
#include "alm/rng.h"
#include "csv.h"

namespace alm {

double Perplexity(std::span<const StepRecord> records) {
  if (records.empty()) ThrowUsage("perplexity of an empty record stream");
  double nll = 0.0;
  for (const StepRecord& r : records) {
    if (!(r.prob > 0.0)) {
      ThrowData("zero probability for the gold token at position " +
                std::to_string(r.position));
    }
    nll -= std::log2(r.prob);
  }
  return std::exp2(nll / static_cast<double>(records.size()));
}

double Foss(std::span<const StepRecord> records) {
  if (records.empty()) ThrowUsage("FoSS of an empty record stream");
  std::size_t searches = 0;
  for (const StepRecord& r : records) searches += r.searched ? 1 : 0;
  return 1.0 - static_cast<double>(searches) /
                   static_cast<double>(records.size());
}

RunHistogram ExtractRuns(std::span<const StepRecord> records) {
  RunHistogram histogram;
  std::size_t run = 0;
  for (const StepRecord& r : records) {
    if (r.searched && run > 0) {
      ++histogram[run];
      run = 0;
    }
    ++run;
  }
  if (run > 0) ++histogram[run];
  return histogram;
}

EvalResult Summarize(std::span<const StepRecord> records) {
  EvalResult result;
  result.token_count = records.size();
  for (const StepRecord& r : records) result.search_count += r.searched ? 1 : 0;
  result.perplexity = Perplexity(records);
  result.foss = Foss(records);
  result.run_length_histogram = ExtractRuns(records);
  return result;
}

EvalResult EvaluateAutomaton(const Model& model, const Corpus& valid,
                             const TraversalConfig& cfg,
                             std::vector<StepRecord>* records,
                             const RunOptions& options) {
  std::vector<StepRecord> all;
  for (std::size_t d = 0; d < valid.documents.size(); ++d) {
    std::vector<StepRecord> doc =
        RunSequence(model.automaton, model.base_lm, model.encoder, model.bos_id,
                    valid.documents[d], cfg, d, options);
    all.insert(all.end(), doc.begin(), doc.end());
  }
  EvalResult result = Summarize(all);
  if (records != nullptr) *records = std::move(all);
  return result;
}

std::vector<SweepPoint> SweepTau(const Model& model, const Corpus& valid,
                                 std::span<const Tau> taus,
                                 const TraversalConfig& cfg) {
  std::vector<SweepPoint> points;
  for (Tau tau : taus) {
    TraversalConfig point_cfg = cfg;
    point_cfg.tau = tau;
    points.push_back({tau, EvaluateAutomaton(model, valid, point_cfg)});
  }
  return points;
}

EvalResult BaselineKnnLm(const Model& model, const Corpus& valid,
                         double skip_fraction, std::uint64_t seed,
                         std::size_t k_neigh, double lambda,
                         std::vector<StepRecord>* records) {
  if (!(skip_fraction >= 0.0 && skip_fraction <= 1.0)) {
    ThrowUsage("skip fraction must lie in [0, 1]");
  }
  const std::size_t vocab_size = model.base_lm.vocab_size();
  Rng rng(seed);
  std::vector<StepRecord> all;
  std::vector<TokenId> context;
  for (const auto& doc : valid.documents) {
    context.assign(1, model.bos_id);
    for (std::size_t t = 0; t < doc.size(); ++t) {
      const bool skip = rng.UniformDouble() < skip_fraction;
      Distribution p_lm = model.base_lm.Prob(context);
      StepRecord rec;
      rec.position = t;
      rec.gold = doc[t];
      rec.searched = !skip;
      if (skip) {
        rec.prob = p_lm[doc[t]];
      } else {
        const std::vector<float> query = model.encoder.Encode(context);
        const NeighborSet neighbors = KnnSearch(model.ds, query, k_neigh);
        const Distribution p =
            Interpolate(PKnn(model.ds, neighbors, vocab_size), p_lm, lambda);
        rec.prob = p[doc[t]];
        rec.num_active = neighbors.entries.size();
      }
      all.push_back(rec);
      context.push_back(doc[t]);
    }
  }
  EvalResult result = Summarize(all);
  if (records != nullptr) *records = std::move(all);
  return result;
}

std::vector<TimingRow> TimingHarness(const Model& model, const Corpus& valid,
                                     std::span<const Tau> taus,
                                     const TraversalConfig& cfg) {
  std::vector<Tau> order{Tau::Infinite()};
  for (Tau tau : taus) {
    if (!tau.is_infinite()) order.push_back(tau);
  }
  std::vector<TimingRow> rows;
  for (Tau tau : order) {
    TraversalConfig point_cfg = cfg;
    point_cfg.tau = tau;
    const auto begin = std::chrono::steady_clock::now();
    const EvalResult result = EvaluateAutomaton(model, valid, point_cfg);
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - begin;
    rows.push_back({"automaton", tau, result.foss, elapsed.count(), 0.0});
  }
  const double reference = rows.front().seconds;
  for (TimingRow& row : rows) {
    row.saved_fraction = reference > 0.0 ? 1.0 - row.seconds / reference : 0.0;
  }
  return rows;
}

std::string FormatDouble(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

void WriteCurveCsv(std::ostream& out, std::span<const CurveRow> rows) {
  out << "system,tau,skip_fraction,foss,perplexity,tokens,searches\n";
  for (const CurveRow& row : rows) {
    out << row.system << ',' << row.tau << ',' << row.skip_fraction << ','
        << FormatDouble(row.result.foss) << ','
        << FormatDouble(row.result.perplexity) << ',' << row.result.token_count
        << ',' << row.result.search_count << '\n';
  }
}

void WriteHistogramCsv(std::ostream& out, const RunHistogram& histogram) {
  out << "length,count\n";
  for (const auto& [length, count] : histogram) {
    out << length << ',' << count << '\n';
  }
}

void WriteOverlapCsv(std::ostream& out, std::span<const OverlapRow> rows) {
  out << "n,type_fraction,occ_fraction,defined\n";
  for (const OverlapRow& row : rows) {
    out << row.n << ',' << FormatDouble(row.type_fraction) << ','
        << FormatDouble(row.occurrence_fraction) << ','
        << (row.defined ? 1 : 0) << '\n';
  }
}

void WriteRecordsCsv(std::ostream& out, std::span<const StepRecord> records,
                     const Vocabulary* vocab) {
  out << "position,gold,log2_prob,searched,states,active_entries\n";
  for (const StepRecord& r : records) {
    out << r.position << ','
        << (vocab != nullptr ? CsvField(vocab->Token(r.gold)) : std::to_string(r.gold))
        << ',' << FormatDouble(std::log2(r.prob)) << ',' << (r.searched ? 1 : 0)
        << ',' << r.num_states << ',' << r.num_active << '\n';
  }
}

void WriteTimingCsv(std::ostream& out, std::span<const TimingRow> rows) {
  out << "system,tau,foss,seconds,saved_fraction\n";
  for (const TimingRow& row : rows) {
    out << row.system << ',' << row.tau.ToString() << ','
        << FormatDouble(row.foss) << ',' << FormatDouble(row.seconds) << ','
        << FormatDouble(row.saved_fraction) << '\n';
  }
}

}  // namespace alm
