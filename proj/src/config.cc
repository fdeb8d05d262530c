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

#include "alm/config.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "alm/error.h"

namespace alm {
namespace {

using nlohmann::json;

const json& Section(const json& root, const char* name) {
  static const json kEmpty = json::object();
  if (!root.contains(name)) return kEmpty;
  const json& section = root.at(name);
  if (!section.is_object()) ThrowUsage(std::string(name) + " must be an object");
  return section;
}

template <typename T>
T Field(const json& section, const std::string& path, const char* key, T fallback) {
  if (!section.contains(key)) return fallback;
  try {
    return section.at(key).get<T>();
  } catch (const json::exception&) {
    ThrowUsage("config field " + path + "." + key + " has the wrong type");
  }
}

template <typename T>
T RequiredField(const json& section, const std::string& path, const char* key) {
  if (!section.contains(key)) {
    ThrowUsage("config field " + path + "." + key + " is required");
  }
  return Field<T>(section, path, key, T{});
}

std::uint64_t Seed(const json& section, const std::string& path) {
  if (!section.contains("seed")) {
    ThrowUsage("config field " + path + ".seed is required (seeds are never implicit)");
  }
  const json& v = section.at("seed");
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    ThrowUsage("config field " + path + ".seed must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string ResolvePath(const std::string& base, const std::string& path) {
  if (path.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base) / p).lexically_normal().string();
}

Tau TauFromJson(const json& v) {
  if (v.is_string()) return Tau::Parse(v.get<std::string>());
  if (v.is_number_integer() && v.get<std::int64_t>() >= 1) {
    return Tau(v.get<std::uint64_t>());
  }
  ThrowUsage("traversal.taus entries must be positive integers or \"inf\"");
}

}  // namespace

RunConfig RunConfig::FromJson(const json& root, const std::string& base_dir) {
  if (!root.is_object()) ThrowUsage("config must be a JSON object");
  RunConfig cfg;

  const json& paths = Section(root, "paths");
  cfg.train_path = ResolvePath(base_dir, RequiredField<std::string>(paths, "paths", "train"));
  cfg.valid_path = ResolvePath(base_dir, RequiredField<std::string>(paths, "paths", "valid"));
  cfg.artifact_dir = ResolvePath(
      base_dir, Field<std::string>(paths, "paths", "artifact_dir", "artifacts"));
  cfg.tokenizer = ParseTokenizeMode(Field<std::string>(root, "", "tokenizer", "whitespace"));

  const json& enc = Section(root, "encoder");
  if (Field<std::string>(enc, "encoder", "type", "decay") != "decay") {
    ThrowUsage("config field encoder.type must be \"decay\"");
  }
  cfg.encoder.dim = Field<std::size_t>(enc, "encoder", "dim", 16);
  cfg.encoder.decay = Field<double>(enc, "encoder", "decay", 0.5);
  cfg.encoder.window = Field<std::size_t>(enc, "encoder", "window", 8);
  cfg.encoder.seed = Seed(enc, "encoder");

  const json& lm = Section(root, "base_lm");
  if (Field<std::string>(lm, "base_lm", "type", "count") != "count") {
    ThrowUsage("config field base_lm.type must be \"count\"");
  }
  cfg.base_lm.order = Field<std::size_t>(lm, "base_lm", "order", 3);
  cfg.base_lm.alpha = Field<double>(lm, "base_lm", "alpha", 0.1);

  const json& ds = Section(root, "datastore");
  cfg.precision = ParseKeyPrecision(Field<std::string>(ds, "datastore", "precision", "fp32"));
  cfg.k_neigh = Field<std::size_t>(ds, "datastore", "k_neigh", 32);

  const json& cl = Section(root, "clustering");
  cfg.cluster_algo = ParseClusterAlgo(Field<std::string>(cl, "clustering", "algo", "kmeans"));
  if (cl.contains("k_clust")) cfg.k_clust = Field<std::size_t>(cl, "clustering", "k_clust", 1);
  cfg.avg_cluster_size = Field<double>(cl, "clustering", "avg_cluster_size", 100.0);
  cfg.cluster_seed = Seed(cl, "clustering");
  cfg.kmeans_iters = Field<std::size_t>(cl, "clustering", "iters", 25);
  cfg.greedy_neighbor_k = Field<std::size_t>(cl, "clustering", "neighbor_k", 8);
  cfg.greedy_merge_threshold = Field<double>(cl, "clustering", "merge_threshold", 0.05);

  const json& tr = Section(root, "traversal");
  if (tr.contains("taus")) {
    if (!tr.at("taus").is_array() || tr.at("taus").empty()) {
      ThrowUsage("config field traversal.taus must be a non-empty array");
    }
    for (const json& v : tr.at("taus")) cfg.taus.push_back(TauFromJson(v));
  } else {
    cfg.taus = {Tau(1), Tau(2), Tau(4), Tau(8), Tau(16), Tau::Infinite()};
  }
  cfg.max_knns = Field<std::size_t>(tr, "traversal", "max_knns", 32);
  cfg.lambda = Field<double>(tr, "traversal", "lambda", 0.25);
  cfg.traversal_seed = Seed(tr, "traversal");

  const json& ev = Section(root, "eval");
  cfg.knnlm_baseline = Field<bool>(ev, "eval", "knnlm_baseline", true);
  cfg.skip_fractions = Field<std::vector<double>>(
      ev, "eval", "skip_fractions", {0.0, 0.25, 0.5, 0.75, 1.0});
  cfg.singleton_ablation = Field<bool>(ev, "eval", "singleton_ablation", true);
  cfg.eval_seed = Seed(ev, "eval");
  cfg.overlap_n_max = Field<std::size_t>(ev, "eval", "overlap_n_max", 5);
  cfg.timing = Field<bool>(ev, "eval", "timing", false);
  cfg.write_records = Field<bool>(ev, "eval", "write_records", false);

  cfg.Validate();
  return cfg;
}

RunConfig RunConfig::LoadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) ThrowUsage("cannot open config file " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    ThrowUsage("config file " + path + " is not valid JSON: " + e.what());
  }
  const std::string base = std::filesystem::path(path).parent_path().string();
  return FromJson(root, base.empty() ? "." : base);
}

json RunConfig::ToJson() const {
  json taus_json = json::array();
  for (Tau t : taus) {
    if (t.is_infinite()) {
      taus_json.push_back("inf");
    } else {
      taus_json.push_back(t.value());
    }
  }
  json cl = {{"algo", std::string(ClusterAlgoName(cluster_algo))},
             {"avg_cluster_size", avg_cluster_size},
             {"seed", cluster_seed},
             {"iters", kmeans_iters},
             {"neighbor_k", greedy_neighbor_k},
             {"merge_threshold", greedy_merge_threshold}};
  if (k_clust) cl["k_clust"] = *k_clust;
  return {
      {"paths", {{"train", train_path}, {"valid", valid_path}, {"artifact_dir", artifact_dir}}},
      {"tokenizer", tokenizer == TokenizeMode::kChar ? "char" : "whitespace"},
      {"encoder",
       {{"type", "decay"},
        {"dim", encoder.dim},
        {"decay", encoder.decay},
        {"window", encoder.window},
        {"seed", encoder.seed}}},
      {"base_lm", {{"type", "count"}, {"order", base_lm.order}, {"alpha", base_lm.alpha}}},
      {"datastore",
       {{"precision", std::string(KeyPrecisionName(precision))}, {"k_neigh", k_neigh}}},
      {"clustering", cl},
      {"traversal",
       {{"taus", taus_json},
        {"max_knns", max_knns},
        {"lambda", lambda},
        {"seed", traversal_seed}}},
      {"eval",
       {{"knnlm_baseline", knnlm_baseline},
        {"skip_fractions", skip_fractions},
        {"singleton_ablation", singleton_ablation},
        {"seed", eval_seed},
        {"overlap_n_max", overlap_n_max},
        {"timing", timing},
        {"write_records", write_records}}},
  };
}

void RunConfig::OverrideSeeds(std::uint64_t seed) {
  encoder.seed = seed;
  cluster_seed = seed;
  traversal_seed = seed;
  eval_seed = seed;
}

std::size_t RunConfig::ResolveKClust(std::size_t n) const {
  if (cluster_algo == ClusterAlgo::kSingleton) return n;
  if (k_clust) return *k_clust;
  const auto k = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) / avg_cluster_size));
  return std::clamp<std::size_t>(k, 1, n);
}

TraversalConfig RunConfig::Traversal(Tau tau) const {
  TraversalConfig t;
  t.tau = tau;
  t.k_neigh = k_neigh;
  t.max_knns = max_knns;
  t.lambda = lambda;
  t.rng_seed = traversal_seed;
  return t;
}

void RunConfig::Validate() const {
  if (encoder.dim == 0) ThrowUsage("config field encoder.dim must be positive");
  if (!(encoder.decay > 0.0 && encoder.decay < 1.0)) {
    ThrowUsage("config field encoder.decay must lie in (0, 1)");
  }
  if (encoder.window == 0) ThrowUsage("config field encoder.window must be positive");
  if (base_lm.order == 0) ThrowUsage("config field base_lm.order must be at least 1");
  if (!(base_lm.alpha > 0.0)) ThrowUsage("config field base_lm.alpha must be positive");
  if (k_neigh == 0) ThrowUsage("config field datastore.k_neigh must be at least 1");
  if (k_clust && *k_clust == 0) ThrowUsage("config field clustering.k_clust must be at least 1");
  if (!(avg_cluster_size >= 1.0)) {
    ThrowUsage("config field clustering.avg_cluster_size must be at least 1");
  }
  if (greedy_neighbor_k == 0) ThrowUsage("config field clustering.neighbor_k must be at least 1");
  if (!(greedy_merge_threshold >= 0.0)) {
    ThrowUsage("config field clustering.merge_threshold must be non-negative");
  }
  if (taus.empty()) ThrowUsage("config field traversal.taus must be non-empty");
  if (max_knns == 0) ThrowUsage("config field traversal.max_knns must be at least 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    ThrowUsage("config field traversal.lambda must lie in [0, 1]");
  }
  for (double r : skip_fractions) {
    if (!(r >= 0.0 && r <= 1.0)) {
      ThrowUsage("config field eval.skip_fractions entries must lie in [0, 1]");
    }
  }
  if (overlap_n_max == 0) ThrowUsage("config field eval.overlap_n_max must be at least 1");
}

}  // namespace alm
