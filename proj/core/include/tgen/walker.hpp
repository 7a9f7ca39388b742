#pragma once

#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "tgen/alias.hpp"
#include "tgen/graph.hpp"
#include "tgen/rng.hpp"

namespace tgen {

constexpr int kEndSentinel = -1;  // stored as node N in model vocabularies

struct WalkTuple {
  int v;  // node index, or kEndSentinel
  double t;
};

struct Walk {
  std::vector<WalkTuple> steps;  // strictly increasing times; END terminal
};

// Incident edges of v with time strictly greater than t, ascending by time,
// truncated to the first `window` entries (window <= 0 means unbounded).
std::vector<std::pair<int, double>> temporal_neighborhood(
    const TemporalGraph& g, int v, double t, int window = 0);

// Softmax of negative time gaps: p(e) proportional to exp(-(t_e - t)).
std::vector<double> jump_distribution(double current_time,
                                      const std::vector<std::pair<int, double>>& nbrs);

// Alias tables keyed by (node, adjacency offset), built lazily on first
// visit. Safe for concurrent insert-or-get; evicts LRU past the budget.
class AliasCache {
 public:
  explicit AliasCache(size_t budget = 1000000) : budget_(budget) {}
  std::shared_ptr<const AliasTable> get(const TemporalGraph& g, int v,
                                        double t, int window);
  size_t size() const;

 private:
  struct Entry {
    std::shared_ptr<const AliasTable> table;
    std::list<std::uint64_t>::iterator lru_it;
  };
  size_t budget_;
  mutable std::mutex mu_;
  std::unordered_map<std::uint64_t, Entry> map_;
  std::list<std::uint64_t> lru_;
};

struct WalkerConfig {
  int max_len = 20;   // tuples per walk, END excluded
  int window = 500;   // future edges considered per neighborhood
  bool append_end = true;
};

Walk sample_walk(const TemporalGraph& g, const TemporalEdge& start,
                 const WalkerConfig& cfg, Rng& rng, AliasCache* cache = nullptr);

struct WalkSet {
  std::vector<Walk> walks;
  std::vector<WalkTuple> first_tuples;  // S1, retained for generation seeding
};

// count < 0 means epoch mode: exactly one walk per temporal edge. Otherwise
// start edges are drawn uniformly with replacement. Deterministic per seed;
// walks parallelize over derived per-walk seeds.
WalkSet sample_walk_set(const TemporalGraph& g, std::int64_t count,
                        const WalkerConfig& cfg, std::uint64_t seed,
                        int threads = 1);

std::string format_walk(const Walk& w);

}  // namespace tgen
