#pragma once

// Shared fixtures: random graph builders, brute-force statistic oracles and
// distribution-test utilities used across the test binaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <tuple>
#include <vector>

#include "tgen/graph.hpp"
#include "tgen/metrics.hpp"
#include "tgen/rng.hpp"

namespace tgen::testutil {

inline TemporalGraph random_temporal_graph(int n, int m, double t_span,
                                           std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TemporalEdge> edges;
  std::set<std::tuple<int, int, double>> seen;
  int guard = 0;
  while (static_cast<int>(edges.size()) < m && guard++ < 100 * m) {
    int u = static_cast<int>(rng.index(n));
    int v = static_cast<int>(rng.index(n));
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    double t = 1.0 + std::floor(rng.uniform() * t_span);
    if (!seen.insert({u, v, t}).second) continue;
    edges.push_back({u, v, t});
  }
  return TemporalGraph(n, std::move(edges));
}

// Two hub-skewed communities bridged by a few edges, log-normal-ish gaps
// quantized to integer timestamps. The node marginal is strongly nonuniform,
// which a learned generator can exploit and a uniform null generator cannot.
inline TemporalGraph two_community_graph(int n, int m, double t_span,
                                         std::uint64_t seed) {
  Rng rng(seed);
  const int half = n / 2;
  auto pick = [&](int lo, int hi) {
    // Zipf-like: low offsets much more likely
    const double u = rng.uniform();
    const int span = hi - lo;
    int off = static_cast<int>(std::floor(span * std::pow(u, 2.5)));
    return lo + std::min(off, span - 1);
  };
  // the event clock first: cumulative log-normal gaps rescaled onto
  // [1, t_span] so the edges spread over the whole window regardless of m
  std::vector<double> clock(m);
  double t = 0.0;
  for (int k = 0; k < m; ++k) {
    t += std::exp(0.4 * rng.normal() - 2.0);
    clock[k] = t;
  }
  std::set<std::tuple<int, int, double>> seen;
  std::vector<TemporalEdge> edges;
  for (int k = 0; k < m; ++k) {
    const double ts =
        std::max(1.0, std::round(clock[k] / clock[m - 1] * t_span));
    for (int attempt = 0; attempt < 500; ++attempt) {
      const bool cross = rng.uniform() < 0.05;
      int u, v;
      if (cross) {
        u = pick(0, half);
        v = pick(half, n);
      } else if (rng.uniform() < 0.5) {
        u = pick(0, half);
        v = pick(0, half);
      } else {
        u = pick(half, n);
        v = pick(half, n);
      }
      if (u == v) continue;
      if (u > v) std::swap(u, v);
      if (!seen.insert({u, v, ts}).second) continue;
      edges.push_back({u, v, ts});
      break;
    }
  }
  return TemporalGraph(n, std::move(edges));
}

// uniform random pairs at uniform source timestamps, the fidelity baseline
inline TemporalGraph null_generator(const TemporalGraph& src, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<double> times = src.unique_timestamps();
  std::set<std::tuple<int, int, double>> seen;
  std::vector<TemporalEdge> edges;
  int guard = 0;
  while (edges.size() < static_cast<size_t>(src.num_edges()) &&
         guard++ < 100 * src.num_edges()) {
    int u = static_cast<int>(rng.index(src.num_nodes()));
    int v = static_cast<int>(rng.index(src.num_nodes()));
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    double t = times[rng.index(times.size())];
    if (!seen.insert({u, v, t}).second) continue;
    edges.push_back({u, v, t});
  }
  return TemporalGraph(src.num_nodes(), std::move(edges));
}

// ---- brute-force statistic oracles (tiny graphs only) ----

struct BruteStats {
  double mean_degree, wedges, triangles, ple, red, lcc, nc, cf, betw, close;
};

inline BruteStats brute_stats(const StaticGraph& g) {
  std::vector<int> nodes;
  for (const auto& [u, v] : g.edges) {
    nodes.push_back(u);
    nodes.push_back(v);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  const int n = static_cast<int>(nodes.size());
  auto id = [&](int v) {
    return static_cast<int>(std::lower_bound(nodes.begin(), nodes.end(), v) -
                            nodes.begin());
  };
  std::vector<std::vector<bool>> a(n, std::vector<bool>(n, false));
  for (const auto& [u, v] : g.edges) a[id(u)][id(v)] = a[id(v)][id(u)] = true;
  std::vector<int> deg(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (a[i][j]) ++deg[i];
  const double m = static_cast<double>(g.edges.size());

  BruteStats s{};
  s.mean_degree = 2.0 * m / n;
  // exhaustive ordered two-hop paths / 2 and triangle triplets
  double wedges = 0.0, tri = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        if (j != i && k != i && a[i][j] && a[i][k]) {
          wedges += 1.0;
          if (a[j][k]) tri += 1.0;
        }
  s.wedges = wedges;
  s.triangles = tri / 3.0;
  s.cf = wedges > 0 ? tri / wedges : 0.0;  // 3*tri/wedges with tri/3 triangles

  double den = 0.0, red = 0.0;
  for (int i = 0; i < n; ++i) {
    den += std::log(deg[i] / 0.5);
    const double p = deg[i] / (2.0 * m);
    red -= p * std::log(p);
  }
  s.ple = 1.0 + n / den;
  s.red = n > 1 ? red / std::log(static_cast<double>(n)) : 0.0;

  // components by DFS
  std::vector<int> comp(n, -1);
  int nc = 0;
  for (int i = 0; i < n; ++i) {
    if (comp[i] >= 0) continue;
    std::vector<int> stack = {i};
    comp[i] = nc;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w = 0; w < n; ++w)
        if (a[v][w] && comp[w] < 0) {
          comp[w] = nc;
          stack.push_back(w);
        }
    }
    ++nc;
  }
  s.nc = nc;
  std::vector<int> sizes(nc, 0);
  for (int i = 0; i < n; ++i) ++sizes[comp[i]];
  s.lcc = *std::max_element(sizes.begin(), sizes.end());

  // Floyd-Warshall distances
  const int inf = 1 << 20;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (int i = 0; i < n; ++i) d[i][i] = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (a[i][j]) d[i][j] = 1;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);

  // closeness over nodes with reachable peers
  double csum = 0.0;
  int cn = 0;
  for (int i = 0; i < n; ++i) {
    int reach = 0, dist = 0;
    for (int j = 0; j < n; ++j)
      if (j != i && d[i][j] < inf) {
        ++reach;
        dist += d[i][j];
      }
    if (reach > 0) {
      csum += static_cast<double>(reach) / dist;
      ++cn;
    }
  }
  s.close = cn > 0 ? csum / cn : 0.0;

  // betweenness by explicit shortest-path enumeration (DFS over all paths)
  std::vector<double> bc(n, 0.0);
  for (int src = 0; src < n; ++src)
    for (int dst = src + 1; dst < n; ++dst) {
      if (d[src][dst] >= inf) continue;
      // count shortest paths through each vertex
      std::vector<double> through(n, 0.0);
      double total = 0.0;
      std::vector<int> path = {src};
      std::function<void(int)> dfs = [&](int v) {
        if (v == dst) {
          total += 1.0;
          for (size_t i = 1; i + 1 < path.size(); ++i) through[path[i]] += 1.0;
          return;
        }
        for (int w = 0; w < n; ++w)
          if (a[v][w] && d[src][v] + 1 + d[w][dst] == d[src][dst] &&
              d[src][w] == d[src][v] + 1) {
            path.push_back(w);
            dfs(w);
            path.pop_back();
          }
      };
      dfs(src);
      if (total > 0)
        for (int v = 0; v < n; ++v) bc[v] += through[v] / total;
    }
  double bsum = 0.0;
  if (n > 2) {
    const double norm = (n - 1.0) * (n - 2.0) / 2.0;
    for (double b : bc) bsum += b / norm;
  }
  s.betw = bsum / n;
  return s;
}

// ---- distribution test utilities ----

// chi-square upper tail via the regularized incomplete gamma (series/CF)
inline double chi2_sf(double x, int dof) {
  const double a = dof / 2.0, half_x = x / 2.0;
  if (half_x <= 0.0) return 1.0;
  auto gammainc_lower = [](double a, double x) {
    // regularized lower incomplete gamma P(a,x)
    if (x < a + 1.0) {
      double sum = 1.0 / a, term = sum;
      for (int k = 1; k < 500; ++k) {
        term *= x / (a + k);
        sum += term;
        if (term < sum * 1e-15) break;
      }
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    // continued fraction for Q(a,x)
    double b = x + 1.0 - a, c = 1e300, dd = 1.0 / b, h = dd;
    for (int k = 1; k < 500; ++k) {
      double an = -k * (k - a);
      b += 2.0;
      dd = an * dd + b;
      if (std::fabs(dd) < 1e-300) dd = 1e-300;
      c = b + an / c;
      if (std::fabs(c) < 1e-300) c = 1e-300;
      dd = 1.0 / dd;
      double del = dd * c;
      h *= del;
      if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return 1.0 - std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
  };
  return 1.0 - gammainc_lower(a, half_x);
}

// two-sided KS p-value approximation (asymptotic Kolmogorov distribution)
inline double ks_pvalue(double d, int n) {
  const double lambda = (std::sqrt(static_cast<double>(n)) + 0.12 +
                         0.11 / std::sqrt(static_cast<double>(n))) *
                        d;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k)
    sum += 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace tgen::testutil
