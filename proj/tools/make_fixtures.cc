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

// Writes the synthetic corpora under data/ that the checked-in configs use.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "alm/fixtures.h"

namespace {

bool WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Write the synthetic fixture corpora"};
  std::string out_dir = "data";
  std::uint64_t seed = 7;
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--seed", seed, "Fixture seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const std::filesystem::path root(out_dir);
  const alm::FixtureText rep = alm::MakeRepetitiveFixture(seed);
  const alm::FixtureText nov = alm::MakeNovelFixture(seed);
  bool ok = WriteFile(root / "repetitive" / "train.txt", rep.train) &&
            WriteFile(root / "repetitive" / "valid.txt", rep.valid) &&
            WriteFile(root / "novel" / "train.txt", nov.train) &&
            WriteFile(root / "novel" / "valid.txt", nov.valid);
  if (!ok) {
    std::cerr << "error: cannot write under " << out_dir << "\n";
    return 2;
  }
  return 0;
}
