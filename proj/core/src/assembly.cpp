#include "tgen/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "tgen/rng.hpp"

namespace tgen {

std::int64_t AlphaCounts::total() const {
  std::int64_t s = 0;
  for (const auto& [k, c] : counts) s += c;
  return s;
}

namespace {
double snap_time(double t, const std::vector<double>& grid) {
  auto it = std::lower_bound(grid.begin(), grid.end(), t);
  if (it == grid.begin()) return *it;
  if (it == grid.end()) return grid.back();
  return (t - *(it - 1)) <= (*it - t) ? *(it - 1) : *it;
}
}  // namespace

AlphaCounts count_alpha(const std::vector<Walk>& walks, const CountOptions& opt,
                        int threads) {
  auto count_range = [&](size_t lo, size_t hi) {
    std::map<TripleKey, std::int64_t> part;
    for (size_t i = lo; i < hi; ++i) {
      const auto& s = walks[i].steps;
      for (size_t j = 1; j < s.size(); ++j) {
        if (s[j].v == kEndSentinel || s[j - 1].v == kEndSentinel) continue;
        double t = s[j].t;
        if (opt.truncate && t > opt.t_max) break;  // times only grow onward
        if (opt.snap_times && !opt.snap_times->empty())
          t = snap_time(t, *opt.snap_times);
        int a = s[j - 1].v, b = s[j].v;
        if (a == b) continue;  // self-transition carries no edge
        if (a > b) std::swap(a, b);
        ++part[{a, b, t}];
      }
    }
    return part;
  };

  AlphaCounts out;
  if (threads <= 1 || walks.size() < 64) {
    out.counts = count_range(0, walks.size());
    return out;
  }
  std::vector<std::map<TripleKey, std::int64_t>> parts(threads);
  std::vector<std::thread> pool;
  const size_t chunk = (walks.size() + threads - 1) / threads;
  for (int w = 0; w < threads; ++w) {
    size_t lo = w * chunk, hi = std::min(walks.size(), lo + chunk);
    if (lo < hi)
      pool.emplace_back([&, w, lo, hi] { parts[w] = count_range(lo, hi); });
  }
  for (auto& th : pool) th.join();
  for (auto& p : parts)
    for (const auto& [k, c] : p) out.counts[k] += c;
  return out;
}

std::vector<std::pair<std::pair<int, int>, double>> edge_distribution(
    const AlphaCounts& alpha, double t) {
  std::vector<std::pair<std::pair<int, int>, double>> out;
  double total = 0.0;
  for (const auto& [k, c] : alpha.counts)
    if (k.t == t) {
      out.push_back({{k.u, k.v}, static_cast<double>(c)});
      total += static_cast<double>(c);
    }
  if (out.empty()) throw std::invalid_argument("no pairs at requested timestamp");
  for (auto& e : out) e.second /= total;
  return out;
}

std::vector<std::int64_t> largest_remainder_quotas(
    const std::vector<double>& weights, std::int64_t target) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (total <= 0.0) throw std::invalid_argument("nonpositive weight total");
  std::vector<std::int64_t> q(weights.size());
  std::vector<std::pair<double, size_t>> rem(weights.size());
  std::int64_t assigned = 0;
  for (size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(target) * weights[i] / total;
    q[i] = static_cast<std::int64_t>(std::floor(exact));
    assigned += q[i];
    rem[i] = {exact - std::floor(exact), i};
  }
  // ties broken toward the lower index for determinism
  std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::int64_t i = 0; i < target - assigned; ++i)
    ++q[rem[static_cast<size_t>(i)].second];
  return q;
}

GeneratedGraph assemble(const AlphaCounts& alpha, int num_nodes,
                        std::int64_t target_edges, std::uint64_t seed) {
  if (alpha.counts.empty()) throw std::invalid_argument("empty alpha counts");
  if (target_edges < 1) throw std::invalid_argument("target_edges must be >= 1");

  // group triples by timestamp (map keys are already sorted)
  std::vector<double> times;
  std::vector<std::vector<std::pair<TripleKey, std::int64_t>>> by_t;
  {
    std::map<double, std::vector<std::pair<TripleKey, std::int64_t>>> groups;
    for (const auto& [k, c] : alpha.counts) groups[k.t].push_back({k, c});
    for (auto& [t, v] : groups) {
      times.push_back(t);
      by_t.push_back(std::move(v));
    }
  }

  const std::int64_t distinct = static_cast<std::int64_t>(alpha.counts.size());
  const std::int64_t want = std::min(target_edges, distinct);

  std::vector<double> mass(times.size());
  for (size_t i = 0; i < times.size(); ++i)
    for (const auto& [k, c] : by_t[i]) mass[i] += static_cast<double>(c);
  std::vector<std::int64_t> quota = largest_remainder_quotas(mass, want);

  Rng rng(seed);
  std::vector<TemporalEdge> picked;
  std::map<TripleKey, bool> used;

  for (size_t i = 0; i < times.size(); ++i) {
    auto pool = by_t[i];
    std::int64_t take = std::min<std::int64_t>(
        quota[i], static_cast<std::int64_t>(pool.size()));
    // Efraimidis–Spirakis keys give a weighted sample without replacement
    std::vector<std::pair<double, size_t>> keys(pool.size());
    for (size_t j = 0; j < pool.size(); ++j) {
      const double u = std::max(rng.uniform(), 1e-300);
      keys[j] = {std::log(u) / static_cast<double>(pool[j].second), j};
    }
    std::partial_sort(keys.begin(), keys.begin() + take, keys.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::int64_t j = 0; j < take; ++j) {
      const TripleKey& k = pool[keys[static_cast<size_t>(j)].second].first;
      picked.push_back({k.u, k.v, k.t});
      used[k] = true;
    }
  }

  // unmet quota spills to the globally most-frequent unused triples
  if (static_cast<std::int64_t>(picked.size()) < want) {
    std::vector<std::pair<TripleKey, std::int64_t>> rest;
    for (const auto& [k, c] : alpha.counts)
      if (!used.count(k)) rest.push_back({k, c});
    std::stable_sort(rest.begin(), rest.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& [k, c] : rest) {
      if (static_cast<std::int64_t>(picked.size()) >= want) break;
      picked.push_back({k.u, k.v, k.t});
    }
  }

  GeneratedGraph out;
  out.seed = seed;
  out.graph = TemporalGraph(num_nodes, std::move(picked));
  return out;
}

void save_provenance(const std::string& path, const GeneratedGraph& g) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "model_hash=" << g.model_hash << "\n";
  f << "seed=" << g.seed << "\n";
  f << "gen_len=" << g.gen_len << "\n";
  f << "num_edges=" << g.graph.num_edges() << "\n";
  f << "num_nodes=" << g.graph.num_nodes() << "\n";
}

}  // namespace tgen
