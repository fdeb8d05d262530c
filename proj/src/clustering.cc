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

#include "alm/clustering.h"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "alm/error.h"
#include "alm/rng.h"
#include "alm/simd/kernels.h"
#include "binary_io.h"

namespace alm {
namespace {

constexpr std::string_view kMagic = "RTMC";
constexpr std::uint32_t kVersion = 1;

// Dense fp32 copy of the keys; fp16 stores are upcast once.
std::vector<float> DenseKeys(const Datastore& ds) {
  if (ds.precision() == KeyPrecision::kFp32) {
    return {ds.keys_f32().begin(), ds.keys_f32().end()};
  }
  std::vector<float> keys(ds.keys_f16().size());
  simd::HalfToFloat(ds.keys_f16(), keys);
  return keys;
}

std::span<const float> Row(const std::vector<float>& m, std::size_t i,
                           std::size_t dim) {
  return {m.data() + i * dim, dim};
}

// Nearest centroid per key, ties to the lowest index. Returns the number of
// changed assignments.
std::size_t AssignNearest(const std::vector<float>& keys,
                          const std::vector<float>& centroids, std::size_t n,
                          std::size_t k, std::size_t dim,
                          std::vector<StateId>& assignment) {
  std::size_t changed = 0;
  std::vector<double> dist(k);
  for (std::size_t i = 0; i < n; ++i) {
    simd::SquaredL2Rows(Row(keys, i, dim), centroids.data(), dist);
    const auto best = static_cast<StateId>(
        std::min_element(dist.begin(), dist.end()) - dist.begin());
    if (assignment[i] != best) {
      assignment[i] = best;
      ++changed;
    }
  }
  return changed;
}

// Refills empty clusters. For each empty cluster in index order, the largest
// cluster (lowest index on ties) gives up its member farthest from its
// centroid (lowest entry index on ties), which becomes the new centroid.
bool RepairEmpty(const std::vector<float>& keys, std::vector<float>& centroids,
                 std::size_t n, std::size_t k, std::size_t dim,
                 std::vector<StateId>& assignment) {
  std::vector<std::size_t> sizes(k, 0);
  for (StateId a : assignment) ++sizes[a];
  bool repaired = false;
  for (std::size_t empty = 0; empty < k; ++empty) {
    if (sizes[empty] != 0) continue;
    const auto largest = static_cast<StateId>(
        std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    if (sizes[largest] < 2) ThrowData("k-means cannot fill an empty cluster");
    std::size_t farthest = n;
    double farthest_dist = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (assignment[i] != largest) continue;
      const double d =
          simd::SquaredL2(Row(keys, i, dim), Row(centroids, largest, dim));
      if (d > farthest_dist) {
        farthest_dist = d;
        farthest = i;
      }
    }
    assignment[farthest] = static_cast<StateId>(empty);
    --sizes[largest];
    ++sizes[empty];
    std::copy_n(keys.begin() + farthest * dim, dim,
                centroids.begin() + empty * dim);
    repaired = true;
  }
  return repaired;
}

void UpdateMeans(const std::vector<float>& keys, std::size_t n, std::size_t k,
                 std::size_t dim, const std::vector<StateId>& assignment,
                 std::vector<float>& centroids) {
  std::vector<double> sums(k * dim, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const StateId a = assignment[i];
    ++counts[a];
    for (std::size_t j = 0; j < dim; ++j) sums[a * dim + j] += keys[i * dim + j];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    for (std::size_t j = 0; j < dim; ++j) {
      centroids[c * dim + j] =
          static_cast<float>(sums[c * dim + j] / static_cast<double>(counts[c]));
    }
  }
}

std::vector<float> KmeansPlusPlus(const std::vector<float>& keys, std::size_t n,
                                  std::size_t k, std::size_t dim, Rng& rng) {
  std::vector<float> centroids(k * dim);
  std::vector<bool> chosen(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.UniformBelow(n);
  for (std::size_t c = 0; c < k; ++c) {
    chosen[pick] = true;
    std::copy_n(keys.begin() + pick * dim, dim, centroids.begin() + c * dim);
    if (c + 1 == k) break;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = simd::SquaredL2(Row(keys, i, dim), Row(centroids, c, dim));
      d2[i] = std::min(d2[i], d);
      if (!chosen[i]) total += d2[i];
    }
    if (total > 0.0) {
      double target = rng.UniformDouble() * total;
      pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i] || d2[i] <= 0.0) continue;
        pick = i;
        target -= d2[i];
        if (target < 0.0) break;
      }
    } else {
      // Every remaining key duplicates a centroid; fall back to a uniform
      // draw among the unchosen entries.
      std::size_t nth = rng.UniformBelow(n - c - 1);
      for (pick = 0; pick < n; ++pick) {
        if (!chosen[pick] && nth-- == 0) break;
      }
    }
  }
  return centroids;
}

}  // namespace

ClusterAlgo ParseClusterAlgo(std::string_view name) {
  if (name == "kmeans") return ClusterAlgo::kKmeans;
  if (name == "greedy") return ClusterAlgo::kGreedy;
  if (name == "singleton") return ClusterAlgo::kSingleton;
  ThrowUsage("unknown cluster algorithm '" + std::string(name) +
             "' (expected kmeans, greedy or singleton)");
}

std::string_view ClusterAlgoName(ClusterAlgo algo) {
  switch (algo) {
    case ClusterAlgo::kKmeans:
      return "kmeans";
    case ClusterAlgo::kGreedy:
      return "greedy";
    case ClusterAlgo::kSingleton:
      return "singleton";
  }
  return "unknown";
}

Clustering::Clustering(ClusterAlgo algo, std::vector<StateId> assignment,
                       std::size_t num_states, std::vector<float> centroids,
                       std::size_t dim)
    : algo_(algo),
      assignment_(std::move(assignment)),
      centroids_(std::move(centroids)),
      dim_(dim) {
  if (!centroids_.empty() && centroids_.size() != num_states * dim_) {
    ThrowUsage("centroid matrix has the wrong size");
  }
  offsets_.assign(num_states + 1, 0);
  for (StateId a : assignment_) {
    if (a >= num_states) ThrowData("cluster assignment out of range");
    ++offsets_[a + 1];
  }
  for (std::size_t q = 0; q < num_states; ++q) {
    if (offsets_[q + 1] == 0) ThrowData("clustering has an empty state");
    offsets_[q + 1] += offsets_[q];
  }
  members_.resize(assignment_.size());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (EntryId i = 0; i < assignment_.size(); ++i) {
    members_[cursor[assignment_[i]]++] = i;
  }
}

double Clustering::AverageClusterSize() const {
  return num_states() == 0 ? 0.0
                           : static_cast<double>(size()) /
                                 static_cast<double>(num_states());
}

void Clustering::Save(std::ostream& out) const {
  io::WriteMagic(out, kMagic);
  io::WriteLE<std::uint32_t>(out, kVersion);
  io::WriteLE<std::uint64_t>(out, size());
  io::WriteLE<std::uint64_t>(out, num_states());
  io::WriteLE<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
  io::WriteLE<std::uint8_t>(out, static_cast<std::uint8_t>(algo_));
  io::WriteLE<std::uint8_t>(out, has_centroids() ? 1 : 0);
  for (StateId a : assignment_) io::WriteLE<std::uint32_t>(out, a);
  for (float f : centroids_) io::WriteFloat(out, f);
}

Clustering Clustering::Load(std::istream& in) {
  io::ExpectMagic(in, kMagic);
  if (io::ReadLE<std::uint32_t>(in) != kVersion) {
    ThrowData("unsupported clustering version");
  }
  const auto n = io::ReadLE<std::uint64_t>(in);
  const auto k = io::ReadLE<std::uint64_t>(in);
  const auto dim = io::ReadLE<std::uint32_t>(in);
  const auto algo = io::ReadLE<std::uint8_t>(in);
  const auto has_centroids = io::ReadLE<std::uint8_t>(in);
  if (algo > 2 || has_centroids > 1 || k > n) {
    ThrowData("invalid clustering header");
  }
  std::vector<StateId> assignment(n);
  for (auto& a : assignment) a = io::ReadLE<std::uint32_t>(in);
  std::vector<float> centroids(has_centroids ? k * dim : 0);
  for (auto& f : centroids) f = io::ReadFloat(in);
  io::ExpectEnd(in);
  return Clustering(static_cast<ClusterAlgo>(algo), std::move(assignment), k,
                    std::move(centroids), dim);
}

void Clustering::SaveFile(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowData("cannot write " + path);
  Save(out);
  if (!out) ThrowData("failed writing " + path);
}

Clustering Clustering::LoadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowData("cannot open " + path);
  return Load(in);
}

double WithinClusterSse(const Datastore& ds, std::span<const StateId> assignment,
                        std::span<const float> centroids) {
  const std::size_t dim = ds.dim();
  if (assignment.size() != ds.size()) ThrowUsage("assignment size does not match datastore");
  double sse = 0.0;
  for (EntryId i = 0; i < ds.size(); ++i) {
    if ((static_cast<std::size_t>(assignment[i]) + 1) * dim > centroids.size()) {
      ThrowUsage("assignment refers to a missing centroid");
    }
    sse += ds.SquaredDistance(
        centroids.subspan(static_cast<std::size_t>(assignment[i]) * dim, dim), i);
  }
  return sse;
}

constexpr StateId kNoState = ~StateId{0};

Clustering Kmeans(const Datastore& ds, const KmeansOptions& options,
                  KmeansReport* report) {
  const std::size_t n = ds.size();
  const std::size_t k = options.k_clust;
  const std::size_t dim = ds.dim();
  if (k == 0) ThrowUsage("k_clust must be at least 1");
  if (k > n) {
    ThrowUsage("k_clust (" + std::to_string(k) +
               ") exceeds the number of datastore entries (" +
               std::to_string(n) + ")");
  }
  const std::vector<float> keys = DenseKeys(ds);
  Rng rng(options.seed);
  std::vector<float> centroids = KmeansPlusPlus(keys, n, k, dim, rng);

  KmeansReport local;
  KmeansReport& rep = report != nullptr ? *report : local;
  rep = KmeansReport{};

  std::vector<StateId> assignment(n, 0);
  std::vector<StateId> previous;
  for (std::size_t iter = 0; iter < std::max<std::size_t>(options.max_iters, 1);
       ++iter) {
    if (iter > 0) UpdateMeans(keys, n, k, dim, assignment, centroids);
    previous = assignment;
    AssignNearest(keys, centroids, n, k, dim, assignment);
    RepairEmpty(keys, centroids, n, k, dim, assignment);
    rep.sse_history.push_back(WithinClusterSse(ds, assignment, centroids));
    rep.iterations = iter + 1;
    // A repair that the next pass undoes reproduces the same assignment, so
    // comparing post-repair assignments also terminates that cycle.
    if (iter > 0 && assignment == previous) {
      rep.converged = true;
      break;
    }
  }
  // Number states by their lowest member so that k_clust = N reproduces the
  // singleton numbering.
  std::vector<StateId> relabel(k, kNoState);
  StateId next = 0;
  for (EntryId i = 0; i < n; ++i) {
    if (relabel[assignment[i]] == kNoState) relabel[assignment[i]] = next++;
  }
  std::vector<float> ordered(centroids.size());
  for (std::size_t q = 0; q < k; ++q) {
    std::copy_n(centroids.begin() + static_cast<std::ptrdiff_t>(q * dim), dim,
                ordered.begin() + static_cast<std::ptrdiff_t>(relabel[q] * dim));
  }
  for (StateId& a : assignment) a = relabel[a];
  return Clustering(ClusterAlgo::kKmeans, std::move(assignment), k,
                    std::move(ordered), dim);
}

Clustering GreedyCluster(const Datastore& ds, std::size_t neighbor_k,
                         double merge_threshold) {
  if (neighbor_k == 0) ThrowUsage("neighbor_k must be at least 1");
  const std::size_t n = ds.size();
  constexpr StateId kUnassigned = std::numeric_limits<StateId>::max();
  std::vector<StateId> assignment(n, kUnassigned);
  StateId next_state = 0;
  for (EntryId i = 0; i < n; ++i) {
    if (assignment[i] != kUnassigned) continue;
    const StateId state = next_state++;
    assignment[i] = state;
    const std::vector<float> key = ds.Key(i);
    const NeighborSet neighbors = KnnSearch(ds, key, neighbor_k + 1);
    std::size_t taken = 0;
    for (const Neighbor& nb : neighbors.entries) {
      if (nb.index == i) continue;
      if (taken++ == neighbor_k) break;
      if (nb.distance <= merge_threshold && assignment[nb.index] == kUnassigned) {
        assignment[nb.index] = state;
      }
    }
  }
  return Clustering(ClusterAlgo::kGreedy, std::move(assignment), next_state);
}

Clustering SingletonClustering(const Datastore& ds) {
  std::vector<StateId> assignment(ds.size());
  std::iota(assignment.begin(), assignment.end(), StateId{0});
  return Clustering(ClusterAlgo::kSingleton, std::move(assignment), ds.size());
}

}  // namespace alm
