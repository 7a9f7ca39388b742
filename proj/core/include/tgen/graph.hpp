#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tgen {

struct TemporalEdge {
  int u;
  int v;
  double t;
};

// Static projection: distinct unordered endpoint pairs.
struct StaticGraph {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;  // u < v, sorted, unique

  std::vector<std::vector<int>> adjacency() const;
};

// Immutable after construction; adjacency lists sorted ascending by time.
class TemporalGraph {
 public:
  TemporalGraph() = default;
  TemporalGraph(int num_nodes, std::vector<TemporalEdge> edges);

  int num_nodes() const { return num_nodes_; }
  std::int64_t num_edges() const { return static_cast<std::int64_t>(edges_.size()); }
  double t_max() const { return t_max_; }
  const std::vector<TemporalEdge>& edges() const { return edges_; }
  // incident (neighbor, time) pairs of v, non-decreasing in time
  const std::vector<std::pair<int, double>>& adjacency(int v) const { return adj_[v]; }

  StaticGraph static_projection() const;
  // mode=at: edges with timestamp exactly t (t must occur in the graph);
  // mode=upto: edges with timestamp <= t.
  StaticGraph snapshot(double t, bool upto = false) const;
  std::vector<double> unique_timestamps() const;

 private:
  int num_nodes_ = 0;
  double t_max_ = 0.0;
  std::vector<TemporalEdge> edges_;
  std::vector<std::vector<std::pair<int, double>>> adj_;
};

struct LoadResult {
  TemporalGraph graph;
  std::vector<std::string> labels;    // dense index -> original label
  std::int64_t rejected_self_loops = 0;
  std::int64_t deduped = 0;
};

// One `u,v,t` record per line, `#` comments ignored. Self-loops are rejected
// and counted; duplicate (u,v,t) triples collapse when dedupe is on and are
// an error otherwise. Malformed lines throw with the line number.
LoadResult load_edge_list(const std::string& path, bool dedupe = true);
void save_edge_list(const std::string& path, const TemporalGraph& g,
                    const std::vector<std::string>& labels);
void save_label_map(const std::string& path, const std::vector<std::string>& labels);

}  // namespace tgen
