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

// Command-line driver: build, eval, sweep, generate, inspect, overlap.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "alm/config.h"
#include "alm/error.h"
#include "alm/eval.h"
#include "alm/pipeline.h"
#include "alm/traversal.h"

namespace {

constexpr const char* kFooter = R"(Outputs (written to --out):
  curve.csv               system,tau,skip_fraction,foss,perplexity,tokens,searches
                          system is automaton, automaton_singleton or knnlm
  histogram_tau_<t>.csv   length,count of no-search runs (each run counts the
                          search step that starts it)
  overlap.csv             n,type_fraction,occ_fraction,defined
  records_tau_<t>.csv     position,gold,log2_prob,searched,states,active_entries
  timing.csv              system,tau,foss,seconds,saved_fraction (not deterministic)
  effective_config.json   config after command-line overrides

Exit codes: 0 success, 1 usage error, 2 data or artifact error.)";

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::string cluster_algo;
  std::vector<std::string> taus;
  std::optional<double> lambda;
};

alm::RunConfig LoadConfig(const Common& c) {
  alm::RunConfig cfg = alm::RunConfig::LoadFile(c.config_path);
  if (c.seed) cfg.OverrideSeeds(*c.seed);
  if (!c.cluster_algo.empty()) cfg.cluster_algo = alm::ParseClusterAlgo(c.cluster_algo);
  if (!c.taus.empty()) {
    cfg.taus.clear();
    for (const std::string& t : c.taus) cfg.taus.push_back(alm::Tau::Parse(t));
  }
  if (c.lambda) cfg.lambda = *c.lambda;
  cfg.Validate();
  return cfg;
}

void AddCommon(CLI::App* app, Common& c, bool with_out) {
  app->add_option("--config", c.config_path, "JSON config file")->required();
  app->add_option("--seed", c.seed, "Override every seed in the config");
  if (with_out) app->add_option("--out", c.out_dir, "Output directory")->capture_default_str();
  app->add_option("--cluster-algo", c.cluster_algo, "kmeans, greedy or singleton");
  app->add_option("--tau", c.taus, "Threshold(s): positive integers or inf")
      ->delimiter(',');
  app->add_option("--lambda", c.lambda, "Interpolation weight in [0, 1]");
}

int Run(int argc, char** argv) {
  CLI::App app{"Retrieval language modeling over a clustered datastore automaton"};
  app.footer(kFooter);
  app.require_subcommand(1);

  Common common;
  CLI::App* build = app.add_subcommand("build", "Build datastore, clustering and automaton");
  AddCommon(build, common, false);

  CLI::App* eval = app.add_subcommand("eval", "Evaluate every configured system and write CSVs");
  AddCommon(eval, common, true);
  std::string only;
  eval->add_option("--only", only, "Write one output: curve, histogram, overlap, records, timing");

  CLI::App* sweep = app.add_subcommand("sweep", "Automaton curve over the tau list");
  AddCommon(sweep, common, true);

  CLI::App* generate = app.add_subcommand("generate", "Generate from a prompt");
  AddCommon(generate, common, false);
  std::string prompt;
  std::size_t length = 20;
  std::string mode = "argmax";
  generate->add_option("--prompt", prompt, "Prompt text")->required();
  generate->add_option("--length", length, "Tokens to generate")->capture_default_str();
  generate->add_option("--mode", mode, "argmax or sample")->capture_default_str();

  CLI::App* inspect = app.add_subcommand("inspect", "Dump states or entries");
  AddCommon(inspect, common, false);
  std::optional<std::uint32_t> state_id;
  std::optional<std::uint32_t> entry_id;
  std::optional<std::size_t> sample;
  std::string dot_path;
  inspect->add_option("--state", state_id, "State id");
  inspect->add_option("--entry", entry_id, "Entry id");
  inspect->add_option("--sample", sample, "Dump this many seeded-random states");
  inspect->add_option("--dot", dot_path, "Also write the sampled states as GraphViz");

  CLI::App* overlap = app.add_subcommand("overlap", "Validation n-gram overlap with train");
  AddCommon(overlap, common, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const alm::RunConfig cfg = LoadConfig(common);

  if (*build) {
    const alm::Artifacts a = alm::BuildArtifacts(cfg);
    const double avg = a.clustering->AverageClusterSize();
    std::cout << "artifacts: " << a.dir << "\n"
              << "N=" << a.ds->size() << " k_clust=" << a.clustering->num_states()
              << " avg_cluster_size=" << alm::FormatDouble(avg)
              << " arcs=" << a.automaton->num_arcs() << "\n";
    return 0;
  }
  if (*eval) {
    const alm::Artifacts a = alm::LoadArtifacts(cfg);
    for (const std::string& path :
         alm::RunEval(cfg, a, common.out_dir, alm::EvalSelection{only}, std::cerr)) {
      std::cout << path << "\n";
    }
    return 0;
  }
  if (*sweep) {
    const alm::Artifacts a = alm::LoadArtifacts(cfg);
    for (const std::string& path : alm::RunSweep(cfg, a, common.out_dir, std::cerr)) {
      std::cout << path << "\n";
    }
    return 0;
  }
  if (*overlap) {
    const alm::Artifacts a = alm::LoadCorpora(cfg);
    for (const std::string& path : alm::RunOverlap(cfg, a.train, a.valid, common.out_dir)) {
      std::cout << path << "\n";
    }
    alm::WriteEffectiveConfig(cfg, common.out_dir);
    return 0;
  }
  if (*generate) {
    const alm::GenerationMode gen_mode = alm::ParseGenerationMode(mode);
    const alm::Artifacts a = alm::LoadArtifacts(cfg);
    const std::vector<alm::TokenId> prompt_ids =
        alm::TokenizeKnown(prompt, cfg.tokenizer, a.vocab);
    const std::vector<alm::GeneratedToken> out =
        alm::Generate(*a.automaton, *a.base_lm, *a.encoder, a.vocab.bos_id(), prompt_ids,
                      length, gen_mode, cfg.Traversal(cfg.taus.front()));
    for (const alm::GeneratedToken& g : out) {
      std::cout << a.vocab.Token(g.token) << "\t" << (g.searched ? "searched" : "no-search")
                << "\n";
    }
    return 0;
  }
  if (*inspect) {
    const alm::Artifacts a = alm::LoadArtifacts(cfg);
    if (!state_id && !entry_id && !sample) {
      alm::ThrowUsage("inspect needs --state, --entry or --sample");
    }
    if (state_id) alm::InspectState(a, *state_id, std::cout);
    if (entry_id) alm::InspectEntry(a, *entry_id, std::cout);
    if (sample) {
      alm::InspectSample(a, *sample, cfg.traversal_seed, std::cout);
      if (!dot_path.empty()) {
        std::ofstream dot(dot_path);
        if (!dot) alm::ThrowData("cannot write " + dot_path);
        a.automaton->WriteDot(dot, a.vocab, *sample, cfg.traversal_seed);
      }
    }
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Run(argc, argv);
  } catch (const alm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == alm::ErrorKind::kUsage ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
