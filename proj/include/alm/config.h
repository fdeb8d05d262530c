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

#ifndef ALM_CONFIG_H_
#define ALM_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "alm/clustering.h"
#include "alm/corpus.h"
#include "alm/datastore.h"
#include "alm/encoder_lm.h"
#include "alm/traversal.h"

#include "json.hpp"

namespace alm {

// Declarative description of one experiment. Every seed must be given
// explicitly; there is no time-based seeding anywhere.
struct RunConfig {
  // paths (relative paths resolve against the config file's directory)
  std::string train_path;
  std::string valid_path;
  std::string artifact_dir;
  TokenizeMode tokenizer = TokenizeMode::kWhitespace;

  DecayEncoderOptions encoder;
  CountLMOptions base_lm;

  KeyPrecision precision = KeyPrecision::kFp32;
  std::size_t k_neigh = 32;

  ClusterAlgo cluster_algo = ClusterAlgo::kKmeans;
  // Either k_clust or avg_cluster_size; k_clust wins when both are set.
  std::optional<std::size_t> k_clust;
  double avg_cluster_size = 100.0;
  std::uint64_t cluster_seed = 0;
  std::size_t kmeans_iters = 25;
  std::size_t greedy_neighbor_k = 8;
  double greedy_merge_threshold = 0.05;

  std::vector<Tau> taus;
  std::size_t max_knns = 32;
  double lambda = 0.25;
  std::uint64_t traversal_seed = 0;

  bool knnlm_baseline = true;
  std::vector<double> skip_fractions;
  bool singleton_ablation = true;
  std::uint64_t eval_seed = 0;
  std::size_t overlap_n_max = 5;
  bool timing = false;
  bool write_records = false;

  // Parses and validates; errors name the offending field.
  static RunConfig FromJson(const nlohmann::json& json,
                            const std::string& base_dir = ".");
  static RunConfig LoadFile(const std::string& path);
  nlohmann::json ToJson() const;

  // Replaces every seed with seed.
  void OverrideSeeds(std::uint64_t seed);

  // Number of states for the configured algorithm given n entries.
  std::size_t ResolveKClust(std::size_t n) const;

  TraversalConfig Traversal(Tau tau) const;

  void Validate() const;
};

}  // namespace alm

#endif  // ALM_CONFIG_H_
