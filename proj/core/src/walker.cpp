#include "tgen/walker.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tgen {

std::vector<std::pair<int, double>> temporal_neighborhood(
    const TemporalGraph& g, int v, double t, int window) {
  const auto& adj = g.adjacency(v);
  auto it = std::upper_bound(adj.begin(), adj.end(), t,
                             [](double x, const auto& p) { return x < p.second; });
  std::vector<std::pair<int, double>> out(it, adj.end());
  if (window > 0 && static_cast<int>(out.size()) > window) out.resize(window);
  return out;
}

std::vector<double> jump_distribution(double current_time,
                                      const std::vector<std::pair<int, double>>& nbrs) {
  if (nbrs.empty()) throw std::invalid_argument("empty temporal neighborhood");
  double min_gap = nbrs.front().second - current_time;
  for (const auto& [_, tn] : nbrs) min_gap = std::min(min_gap, tn - current_time);
  std::vector<double> p(nbrs.size());
  double sum = 0.0;
  for (size_t i = 0; i < nbrs.size(); ++i) {
    p[i] = std::exp(-(nbrs[i].second - current_time - min_gap));
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

std::shared_ptr<const AliasTable> AliasCache::get(const TemporalGraph& g, int v,
                                                  double t, int window) {
  const auto& adj = g.adjacency(v);
  auto it = std::upper_bound(adj.begin(), adj.end(), t,
                             [](double x, const auto& p) { return x < p.second; });
  const auto offset = static_cast<std::uint64_t>(it - adj.begin());
  const std::uint64_t key = (static_cast<std::uint64_t>(v) << 32) | offset;

  std::lock_guard<std::mutex> lock(mu_);
  auto found = map_.find(key);
  if (found != map_.end()) {
    lru_.splice(lru_.begin(), lru_, found->second.lru_it);
    return found->second.table;
  }
  auto nbrs = temporal_neighborhood(g, v, t, window);
  if (nbrs.empty()) return nullptr;
  auto table = std::make_shared<const AliasTable>(
      jump_distribution(t, nbrs));
  lru_.push_front(key);
  map_[key] = {table, lru_.begin()};
  if (map_.size() > budget_) {
    map_.erase(lru_.back());
    lru_.pop_back();
  }
  return table;
}

size_t AliasCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return map_.size();
}

Walk sample_walk(const TemporalGraph& g, const TemporalEdge& start,
                 const WalkerConfig& cfg, Rng& rng, AliasCache* cache) {
  if (cfg.max_len < 2) throw std::invalid_argument("walk length must be >= 2");
  Walk w;
  // the sequence opens at the edge's later endpoint; the first jump explores
  // that node's temporal neighborhood at the edge time
  w.steps.push_back({start.v, start.t});
  int cur = start.v;
  double t = start.t;
  while (static_cast<int>(w.steps.size()) < cfg.max_len) {
    int pick;
    std::vector<std::pair<int, double>> nbrs;
    if (cache != nullptr) {
      auto table = cache->get(g, cur, t, cfg.window);
      if (!table) break;
      nbrs = temporal_neighborhood(g, cur, t, cfg.window);
      pick = table->draw(rng);
    } else {
      nbrs = temporal_neighborhood(g, cur, t, cfg.window);
      if (nbrs.empty()) break;
      AliasTable table(jump_distribution(t, nbrs));
      pick = table.draw(rng);
    }
    cur = nbrs[pick].first;
    t = nbrs[pick].second;
    w.steps.push_back({cur, t});
  }
  if (cfg.append_end && static_cast<int>(w.steps.size()) < cfg.max_len)
    w.steps.push_back({kEndSentinel, t});
  return w;
}

WalkSet sample_walk_set(const TemporalGraph& g, std::int64_t count,
                        const WalkerConfig& cfg, std::uint64_t seed,
                        int threads) {
  const auto& edges = g.edges();
  if (edges.empty()) throw std::invalid_argument("graph has no edges");
  const bool epoch_mode = count < 0;
  const std::int64_t n = epoch_mode ? g.num_edges() : count;
  if (n < 1) throw std::invalid_argument("walk count must be >= 1");

  WalkSet set;
  set.walks.resize(n);
  AliasCache cache;

  auto worker = [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      Rng rng(split_seed(seed, static_cast<std::uint64_t>(i)));
      const TemporalEdge& start =
          epoch_mode ? edges[i] : edges[rng.index(edges.size())];
      set.walks[i] = sample_walk(g, start, cfg, rng, &cache);
    }
  };
  if (threads <= 1) {
    worker(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::int64_t chunk = (n + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      std::int64_t lo = w * chunk, hi = std::min<std::int64_t>(n, lo + chunk);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  set.first_tuples.reserve(n);
  for (const auto& w : set.walks) set.first_tuples.push_back(w.steps.front());
  return set;
}

std::string format_walk(const Walk& w) {
  std::ostringstream os;
  os.precision(17);
  for (size_t i = 0; i < w.steps.size(); ++i) {
    if (i) os << ' ';
    if (w.steps[i].v == kEndSentinel)
      os << "END";
    else
      os << w.steps[i].v << ':' << w.steps[i].t;
  }
  return os.str();
}

}  // namespace tgen
