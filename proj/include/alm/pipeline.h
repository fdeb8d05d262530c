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

#ifndef ALM_PIPELINE_H_
#define ALM_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "alm/automaton.h"
#include "alm/clustering.h"
#include "alm/config.h"
#include "alm/corpus.h"
#include "alm/datastore.h"
#include "alm/encoder_lm.h"
#include "alm/eval.h"

namespace alm {

// Corpora, models and the three binary artifacts for one config. Held behind
// unique_ptrs because the automaton keeps pointers into the datastore and the
// clustering.
struct Artifacts {
  Vocabulary vocab;
  Corpus train;
  Corpus valid;
  std::unique_ptr<DecayEncoder> encoder;
  std::unique_ptr<CountLM> base_lm;
  std::unique_ptr<Datastore> ds;
  std::unique_ptr<Clustering> clustering;
  std::unique_ptr<Automaton> automaton;
  std::optional<KmeansReport> kmeans_report;
  std::string dir;

  Model model() const {
    return Model{*ds, *automaton, *base_lm, *encoder, vocab.bos_id()};
  }
};

std::string ReadTextFile(const std::string& path, const char* field);

// 64-bit FNV-1a.
std::uint64_t Fnv1a(std::string_view bytes,
                    std::uint64_t hash = 0xcbf29ce484222325ULL);

// Hex digest of everything the artifacts depend on: the build-relevant config
// fields and both corpus files (the vocabulary spans both).
std::string ArtifactKey(const RunConfig& cfg);

std::string ArtifactDir(const RunConfig& cfg);

inline constexpr const char* kDatastoreFile = "datastore.rtmd";
inline constexpr const char* kClusteringFile = "clustering.rtmc";
inline constexpr const char* kAutomatonFile = "automaton.rtma";
inline constexpr const char* kVocabFile = "vocab.txt";

// Tokenizes the corpora and fits the encoder and base LM.
Artifacts LoadCorpora(const RunConfig& cfg);

// Builds every model in memory without touching disk.
Artifacts BuildInMemory(const RunConfig& cfg);

// Builds and writes the artifacts into ArtifactDir(cfg). Deterministic: the
// same config produces byte-identical files.
Artifacts BuildArtifacts(const RunConfig& cfg);

// Reads previously written artifacts; builds them first when the directory
// does not exist yet.
Artifacts LoadArtifacts(const RunConfig& cfg);

// Which outputs cmd eval writes. Empty means all.
struct EvalSelection {
  std::string only;
  bool Wants(const std::string& name) const { return only.empty() || only == name; }
};

// Writes curve.csv, histogram_tau_<t>.csv, overlap.csv (and optionally
// records and timing) into out_dir, plus effective_config.json. Returns the
// list of files written.
std::vector<std::string> RunEval(const RunConfig& cfg, const Artifacts& artifacts,
                                 const std::string& out_dir,
                                 const EvalSelection& selection, std::ostream& log);

// Automaton curve only, one row per configured tau.
std::vector<std::string> RunSweep(const RunConfig& cfg, const Artifacts& artifacts,
                                  const std::string& out_dir, std::ostream& log);

std::vector<std::string> RunOverlap(const RunConfig& cfg, const Corpus& train,
                                    const Corpus& valid, const std::string& out_dir);

void WriteEffectiveConfig(const RunConfig& cfg, const std::string& out_dir);

// Human-readable dumps for cmd inspect.
void InspectState(const Artifacts& artifacts, StateId q, std::ostream& out);
void InspectEntry(const Artifacts& artifacts, EntryId i, std::ostream& out);
void InspectSample(const Artifacts& artifacts, std::size_t count,
                   std::uint64_t seed, std::ostream& out);

}  // namespace alm

#endif  // ALM_PIPELINE_H_
