#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tgen/graph.hpp"
#include "tgen/walker.hpp"

namespace tgen {

// key: (min(u,v), max(u,v), t)
struct TripleKey {
  int u;
  int v;
  double t;
  bool operator<(const TripleKey& o) const {
    if (u != o.u) return u < o.u;
    if (v != o.v) return v < o.v;
    return t < o.t;
  }
  bool operator==(const TripleKey& o) const {
    return u == o.u && v == o.v && t == o.t;
  }
};

struct AlphaCounts {
  std::map<TripleKey, std::int64_t> counts;
  std::int64_t total() const;
};

struct CountOptions {
  double t_max = 0.0;
  bool truncate = false;  // drop triples past t_max
  // bin generated times onto this grid (nearest source timestamp) when set
  const std::vector<double>* snap_times = nullptr;
};

AlphaCounts count_alpha(const std::vector<Walk>& walks, const CountOptions& opt,
                        int threads = 1);

// normalized occurrence distribution over the pairs present at time t
std::vector<std::pair<std::pair<int, int>, double>> edge_distribution(
    const AlphaCounts& alpha, double t);

// largest-remainder rounding of target * (w_i / sum w) into integer quotas
std::vector<std::int64_t> largest_remainder_quotas(
    const std::vector<double>& weights, std::int64_t target);

struct GeneratedGraph {
  TemporalGraph graph;
  std::string model_hash;
  std::uint64_t seed = 0;
  int gen_len = 0;
};

// density-matched sampling: per-timestamp quotas by alpha mass, weighted
// draws without replacement inside each timestamp, spill to the globally
// most frequent unused triples
GeneratedGraph assemble(const AlphaCounts& alpha, int num_nodes,
                        std::int64_t target_edges, std::uint64_t seed);

void save_provenance(const std::string& path, const GeneratedGraph& g);

}  // namespace tgen
