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

#ifndef ALM_CLUSTERING_H_
#define ALM_CLUSTERING_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alm/datastore.h"
#include "alm/types.h"

namespace alm {

enum class ClusterAlgo : std::uint8_t { kKmeans = 0, kGreedy = 1, kSingleton = 2 };

ClusterAlgo ParseClusterAlgo(std::string_view name);
std::string_view ClusterAlgoName(ClusterAlgo algo);

// Assignment of datastore entries to automaton states and its inverse. Every
// state has at least one member; members are listed in ascending entry order.
class Clustering {
 public:
  Clustering() = default;

  // Builds the inverse index from assignment. Throws if a state in
  // [0, num_states) has no member or an assignment is out of range.
  Clustering(ClusterAlgo algo, std::vector<StateId> assignment,
             std::size_t num_states, std::vector<float> centroids = {},
             std::size_t dim = 0);

  ClusterAlgo algo() const { return algo_; }
  std::size_t size() const { return assignment_.size(); }
  std::size_t num_states() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  StateId state_of(EntryId i) const { return assignment_[i]; }
  std::span<const StateId> assignment() const { return assignment_; }
  std::span<const EntryId> members(StateId q) const {
    return {members_.data() + offsets_[q], offsets_[q + 1] - offsets_[q]};
  }

  bool has_centroids() const { return !centroids_.empty(); }
  std::size_t dim() const { return dim_; }
  std::span<const float> centroid(StateId q) const {
    return {centroids_.data() + static_cast<std::size_t>(q) * dim_, dim_};
  }
  std::span<const float> centroids() const { return centroids_; }

  double AverageClusterSize() const;

  void Save(std::ostream& out) const;
  static Clustering Load(std::istream& in);
  void SaveFile(const std::string& path) const;
  static Clustering LoadFile(const std::string& path);

 private:
  ClusterAlgo algo_ = ClusterAlgo::kSingleton;
  std::vector<StateId> assignment_;
  std::vector<std::size_t> offsets_;
  std::vector<EntryId> members_;
  std::vector<float> centroids_;
  std::size_t dim_ = 0;
};

struct KmeansOptions {
  std::size_t k_clust = 1;
  std::size_t max_iters = 25;
  std::uint64_t seed = 0;
};

struct KmeansReport {
  // Within-cluster squared error after each assignment pass.
  std::vector<double> sse_history;
  std::size_t iterations = 0;
  bool converged = false;
};

// Lloyd's algorithm from a seeded k-means++ start. Assignments go to the
// nearest centroid, ties to the lowest centroid index; a cluster left empty
// takes over the member of the largest cluster farthest from its centroid.
Clustering Kmeans(const Datastore& ds, const KmeansOptions& options,
                  KmeansReport* report = nullptr);

// Single pass over entries in index order: an unassigned entry opens a state
// and absorbs those of its neighbor_k nearest other entries that are still
// unassigned and within squared distance merge_threshold.
Clustering GreedyCluster(const Datastore& ds, std::size_t neighbor_k,
                         double merge_threshold);

// Entry i forms state i.
Clustering SingletonClustering(const Datastore& ds);

// Sum of squared distances from each key to its cluster centroid.
double WithinClusterSse(const Datastore& ds, std::span<const StateId> assignment,
                        std::span<const float> centroids);

}  // namespace alm

#endif  // ALM_CLUSTERING_H_
