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

#include "alm/pipeline.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "alm/error.h"
#include "alm/rng.h"

namespace alm {
namespace fs = std::filesystem;

namespace {

std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowData("cannot write " + path);
  return out;
}

std::string Join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

Clustering MakeClustering(const RunConfig& cfg, const Datastore& ds,
                          std::optional<KmeansReport>& report) {
  switch (cfg.cluster_algo) {
    case ClusterAlgo::kKmeans: {
      KmeansOptions opts;
      opts.k_clust = cfg.ResolveKClust(ds.size());
      opts.max_iters = cfg.kmeans_iters;
      opts.seed = cfg.cluster_seed;
      report.emplace();
      return Kmeans(ds, opts, &*report);
    }
    case ClusterAlgo::kGreedy:
      return GreedyCluster(ds, cfg.greedy_neighbor_k, cfg.greedy_merge_threshold);
    case ClusterAlgo::kSingleton:
      return SingletonClustering(ds);
  }
  ThrowUsage("unknown clustering algorithm");
}

std::string TauFileTag(Tau tau) { return tau.ToString(); }

}  // namespace

std::string ReadTextFile(const std::string& path, const char* field) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowData(std::string("config field ") + field + ": cannot read " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::uint64_t Fnv1a(std::string_view bytes, std::uint64_t hash) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string ArtifactKey(const RunConfig& cfg) {
  const nlohmann::json full = cfg.ToJson();
  nlohmann::json build = {
      {"tokenizer", full["tokenizer"]},
      {"encoder", full["encoder"]},
      {"precision", full["datastore"]["precision"]},
      {"clustering", full["clustering"]},
  };
  // Greedy and singleton ignore these; drop them so the key does not change
  // needlessly.
  if (cfg.cluster_algo != ClusterAlgo::kKmeans) {
    build["clustering"].erase("seed");
    build["clustering"].erase("iters");
    build["clustering"].erase("k_clust");
    build["clustering"].erase("avg_cluster_size");
  }
  if (cfg.cluster_algo != ClusterAlgo::kGreedy) {
    build["clustering"].erase("neighbor_k");
    build["clustering"].erase("merge_threshold");
  }
  std::uint64_t h = Fnv1a(build.dump());
  h = Fnv1a(ReadTextFile(cfg.train_path, "paths.train"), h);
  h = Fnv1a("\x1f", h);
  h = Fnv1a(ReadTextFile(cfg.valid_path, "paths.valid"), h);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string ArtifactDir(const RunConfig& cfg) {
  return Join(cfg.artifact_dir, ArtifactKey(cfg));
}

Artifacts LoadCorpora(const RunConfig& cfg) {
  Artifacts a;
  const std::string train_text = ReadTextFile(cfg.train_path, "paths.train");
  const std::string valid_text = ReadTextFile(cfg.valid_path, "paths.valid");
  a.train = TokenizeInto(train_text, cfg.tokenizer, a.vocab, cfg.train_path);
  a.valid = TokenizeInto(valid_text, cfg.tokenizer, a.vocab, cfg.valid_path);
  a.encoder = std::make_unique<DecayEncoder>(a.vocab.size(), cfg.encoder);
  a.base_lm = std::make_unique<CountLM>(a.train.documents, a.vocab.size(),
                                        a.vocab.bos_id(), cfg.base_lm);
  return a;
}

Artifacts BuildInMemory(const RunConfig& cfg) {
  Artifacts a = LoadCorpora(cfg);
  a.ds = std::make_unique<Datastore>(
      BuildDatastore(a.train, *a.encoder, a.vocab.bos_id(), cfg.precision));
  a.clustering = std::make_unique<Clustering>(MakeClustering(cfg, *a.ds, a.kmeans_report));
  a.automaton = std::make_unique<Automaton>(Automaton::Build(*a.ds, *a.clustering));
  return a;
}

Artifacts BuildArtifacts(const RunConfig& cfg) {
  Artifacts a = BuildInMemory(cfg);
  a.dir = ArtifactDir(cfg);
  fs::create_directories(a.dir);
  a.ds->SaveFile(Join(a.dir, kDatastoreFile));
  a.clustering->SaveFile(Join(a.dir, kClusteringFile));
  a.automaton->SaveFile(Join(a.dir, kAutomatonFile));
  {
    std::ofstream out = OpenOut(Join(a.dir, kVocabFile));
    a.vocab.Write(out);
  }
  return a;
}

Artifacts LoadArtifacts(const RunConfig& cfg) {
  const std::string dir = ArtifactDir(cfg);
  if (!fs::exists(Join(dir, kDatastoreFile)) || !fs::exists(Join(dir, kClusteringFile)) ||
      !fs::exists(Join(dir, kAutomatonFile))) {
    return BuildArtifacts(cfg);
  }
  Artifacts a = LoadCorpora(cfg);
  a.dir = dir;
  a.ds = std::make_unique<Datastore>(Datastore::LoadFile(Join(dir, kDatastoreFile)));
  a.clustering = std::make_unique<Clustering>(Clustering::LoadFile(Join(dir, kClusteringFile)));
  a.automaton = std::make_unique<Automaton>(
      Automaton::LoadFile(Join(dir, kAutomatonFile), *a.ds, *a.clustering));
  if (a.ds->dim() != a.encoder->dim()) ThrowData("datastore dimension does not match encoder");
  for (TokenId v : a.ds->values()) {
    if (v >= a.vocab.size()) ThrowData("datastore value outside the vocabulary");
  }
  return a;
}

void WriteEffectiveConfig(const RunConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream out = OpenOut(Join(out_dir, "effective_config.json"));
  out << cfg.ToJson().dump(2) << "\n";
}

std::vector<std::string> RunOverlap(const RunConfig& cfg, const Corpus& train,
                                    const Corpus& valid, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const std::string path = Join(out_dir, "overlap.csv");
  std::ofstream out = OpenOut(path);
  WriteOverlapCsv(out, NgramOverlap(train, valid, cfg.overlap_n_max));
  return {path};
}

std::vector<std::string> RunSweep(const RunConfig& cfg, const Artifacts& artifacts,
                                  const std::string& out_dir, std::ostream& log) {
  fs::create_directories(out_dir);
  const Model model = artifacts.model();
  std::vector<CurveRow> rows;
  std::vector<std::string> written;
  for (Tau tau : cfg.taus) {
    const EvalResult r = EvaluateAutomaton(model, artifacts.valid, cfg.Traversal(tau));
    log << "tau=" << tau.ToString() << " foss=" << FormatDouble(r.foss)
        << " perplexity=" << FormatDouble(r.perplexity) << "\n";
    rows.push_back({"automaton", tau.ToString(), "", r});
  }
  const std::string path = Join(out_dir, "curve.csv");
  std::ofstream out = OpenOut(path);
  WriteCurveCsv(out, rows);
  written.push_back(path);
  WriteEffectiveConfig(cfg, out_dir);
  return written;
}

std::vector<std::string> RunEval(const RunConfig& cfg, const Artifacts& artifacts,
                                 const std::string& out_dir,
                                 const EvalSelection& selection, std::ostream& log) {
  static const char* kNames[] = {"curve", "histogram", "overlap", "records", "timing"};
  if (!selection.only.empty()) {
    bool known = false;
    for (const char* n : kNames) known = known || selection.only == n;
    if (!known) {
      ThrowUsage("--only must be one of curve, histogram, overlap, records, timing");
    }
  }
  fs::create_directories(out_dir);
  std::vector<std::string> written;
  const Model model = artifacts.model();

  const bool want_curve = selection.Wants("curve");
  const bool want_hist = selection.Wants("histogram");
  const bool want_records =
      selection.only == "records" || (selection.only.empty() && cfg.write_records);

  if (want_curve || want_hist || want_records) {
    std::vector<CurveRow> rows;
    for (Tau tau : cfg.taus) {
      std::vector<StepRecord> records;
      const EvalResult r = EvaluateAutomaton(model, artifacts.valid, cfg.Traversal(tau),
                                             want_records ? &records : nullptr);
      log << "automaton tau=" << tau.ToString() << " foss=" << FormatDouble(r.foss)
          << " perplexity=" << FormatDouble(r.perplexity) << "\n";
      rows.push_back({"automaton", tau.ToString(), "", r});
      if (want_hist) {
        const std::string path =
            Join(out_dir, "histogram_tau_" + TauFileTag(tau) + ".csv");
        std::ofstream out = OpenOut(path);
        WriteHistogramCsv(out, r.run_length_histogram);
        written.push_back(path);
      }
      if (want_records) {
        const std::string path = Join(out_dir, "records_tau_" + TauFileTag(tau) + ".csv");
        std::ofstream out = OpenOut(path);
        WriteRecordsCsv(out, records, &artifacts.vocab);
        written.push_back(path);
      }
    }
    if (want_curve && cfg.singleton_ablation &&
        cfg.cluster_algo != ClusterAlgo::kSingleton) {
      const Clustering singleton = SingletonClustering(*artifacts.ds);
      const Automaton aut = Automaton::Build(*artifacts.ds, singleton);
      const Model ablation{*artifacts.ds, aut, *artifacts.base_lm, *artifacts.encoder,
                           artifacts.vocab.bos_id()};
      for (Tau tau : cfg.taus) {
        const EvalResult r = EvaluateAutomaton(ablation, artifacts.valid, cfg.Traversal(tau));
        log << "automaton_singleton tau=" << tau.ToString()
            << " foss=" << FormatDouble(r.foss)
            << " perplexity=" << FormatDouble(r.perplexity) << "\n";
        rows.push_back({"automaton_singleton", tau.ToString(), "", r});
      }
    }
    if (want_curve && cfg.knnlm_baseline) {
      for (double skip : cfg.skip_fractions) {
        const EvalResult r = BaselineKnnLm(model, artifacts.valid, skip, cfg.eval_seed,
                                           cfg.k_neigh, cfg.lambda);
        log << "knnlm r=" << FormatDouble(skip) << " foss=" << FormatDouble(r.foss)
            << " perplexity=" << FormatDouble(r.perplexity) << "\n";
        rows.push_back({"knnlm", "", FormatDouble(skip), r});
      }
    }
    if (want_curve) {
      const std::string path = Join(out_dir, "curve.csv");
      std::ofstream out = OpenOut(path);
      WriteCurveCsv(out, rows);
      written.push_back(path);
    }
  }

  if (selection.Wants("overlap")) {
    for (const std::string& p : RunOverlap(cfg, artifacts.train, artifacts.valid, out_dir)) {
      written.push_back(p);
    }
  }

  if (selection.only == "timing" || (selection.only.empty() && cfg.timing)) {
    const std::string path = Join(out_dir, "timing.csv");
    const std::vector<TimingRow> rows =
        TimingHarness(model, artifacts.valid, cfg.taus, cfg.Traversal(Tau::Infinite()));
    std::ofstream out = OpenOut(path);
    WriteTimingCsv(out, rows);
    written.push_back(path);
  }

  WriteEffectiveConfig(cfg, out_dir);
  return written;
}

void InspectEntry(const Artifacts& artifacts, EntryId i, std::ostream& out) {
  const Datastore& ds = *artifacts.ds;
  if (i >= ds.size()) {
    ThrowUsage("entry id " + std::to_string(i) + " out of range (N=" +
               std::to_string(ds.size()) + ")");
  }
  out << "entry " << i << "\n";
  out << "  value: " << artifacts.vocab.Token(ds.value(i)) << " (" << ds.value(i) << ")\n";
  if (ds.has_pointer(i)) {
    out << "  pointer: " << ds.pointer(i) << "\n";
  } else {
    out << "  pointer: none\n";
  }
  out << "  state: " << artifacts.clustering->state_of(i) << "\n";
  out << "  key:";
  for (float x : ds.Key(i)) out << " " << FormatDouble(x);
  out << "\n";
}

void InspectState(const Artifacts& artifacts, StateId q, std::ostream& out) {
  const Automaton& aut = *artifacts.automaton;
  const Datastore& ds = *artifacts.ds;
  if (q >= aut.num_states()) {
    ThrowUsage("state id " + std::to_string(q) + " out of range (states=" +
               std::to_string(aut.num_states()) + ")");
  }
  const auto members = artifacts.clustering->members(q);
  out << "state " << q << " (" << members.size() << " members)\n";
  for (EntryId e : members) {
    out << "  entry " << e << " value=" << artifacts.vocab.Token(ds.value(e)) << " pointer=";
    if (ds.has_pointer(e)) {
      out << ds.pointer(e);
    } else {
      out << "none";
    }
    out << "\n";
  }
  for (TokenId w : aut.ArcTokens(q)) {
    out << "  on " << artifacts.vocab.Token(w) << " ->";
    for (StateId s : aut.Successors(q, w)) out << " " << s;
    out << "\n";
  }
}

void InspectSample(const Artifacts& artifacts, std::size_t count, std::uint64_t seed,
                   std::ostream& out) {
  const std::size_t n = artifacts.automaton->num_states();
  Rng rng(seed);
  std::vector<StateId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<StateId>(i);
  const std::size_t take = std::min(count, n);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.UniformBelow(n - i);
    std::swap(ids[i], ids[j]);
  }
  for (std::size_t i = 0; i < take; ++i) InspectState(artifacts, ids[i], out);
}

}  // namespace alm
