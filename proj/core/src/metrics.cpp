#include "tgen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <stack>
#include <stdexcept>
#include <thread>

namespace tgen {

const std::vector<std::string>& SnapshotStats::names() {
  static const std::vector<std::string> n = {
      "mean_degree",   "wedge_count",      "triangle_count", "ple",
      "red_entropy",   "lcc_size",         "num_components", "global_cf",
      "mean_betweenness", "mean_closeness"};
  return n;
}

std::vector<double> SnapshotStats::values() const {
  return {mean_degree,   wedge_count,      triangle_count, ple,
          red_entropy,   lcc_size,         num_components, global_cf,
          mean_betweenness, mean_closeness};
}

namespace {

struct UnionFind {
  std::vector<int> parent, rank_;
  explicit UnionFind(int n) : parent(n), rank_(n, 0) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }
};

}  // namespace

SnapshotStats stats(const StaticGraph& g) {
  SnapshotStats s;
  if (g.edges.empty()) {
    s.empty = true;
    return s;
  }

  // compact to the incident-node set
  std::vector<int> nodes;
  for (const auto& [u, v] : g.edges) {
    nodes.push_back(u);
    nodes.push_back(v);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  const int n = static_cast<int>(nodes.size());
  std::map<int, int> idx;
  for (int i = 0; i < n; ++i) idx[nodes[i]] = i;

  std::vector<std::vector<int>> adj(n);
  for (const auto& [u, v] : g.edges) {
    adj[idx[u]].push_back(idx[v]);
    adj[idx[v]].push_back(idx[u]);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  const std::int64_t m = static_cast<std::int64_t>(g.edges.size());

  s.mean_degree = 2.0 * static_cast<double>(m) / n;

  // wedges and degree-derived statistics
  double wedges = 0.0, ple_den = 0.0, red = 0.0;
  for (int v = 0; v < n; ++v) {
    const double d = static_cast<double>(adj[v].size());
    wedges += d * (d - 1.0) / 2.0;
    ple_den += std::log(d / 0.5);  // d_min = 1, continuity correction 1/2
    const double p = d / (2.0 * static_cast<double>(m));
    red -= p * std::log(p);
  }
  s.wedge_count = wedges;
  s.ple = 1.0 + static_cast<double>(n) / ple_den;
  s.red_entropy = n > 1 ? red / std::log(static_cast<double>(n)) : 0.0;

  // triangles by sorted-neighbor intersection on u < v edges
  std::int64_t tri = 0;
  for (const auto& [gu, gv] : g.edges) {
    const auto& a = adj[idx.at(gu)];
    const auto& b = adj[idx.at(gv)];
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i] == b[j]) {
        ++tri;
        ++i;
        ++j;
      } else if (a[i] < b[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }
  tri /= 3;  // each triangle found once per edge
  s.triangle_count = static_cast<double>(tri);
  s.global_cf = wedges > 0.0 ? 3.0 * static_cast<double>(tri) / wedges : 0.0;

  UnionFind uf(n);
  for (const auto& [u, v] : g.edges) uf.unite(idx[u], idx[v]);
  std::map<int, int> comp_size;
  for (int v = 0; v < n; ++v) ++comp_size[uf.find(v)];
  s.num_components = static_cast<double>(comp_size.size());
  int lcc = 0;
  for (const auto& [root, sz] : comp_size) lcc = std::max(lcc, sz);
  s.lcc_size = static_cast<double>(lcc);

  // Brandes betweenness (unweighted) plus closeness from the same BFS
  std::vector<double> bc(n, 0.0);
  double closeness_sum = 0.0;
  int closeness_nodes = 0;
  for (int src = 0; src < n; ++src) {
    std::vector<int> dist(n, -1), sigma(n, 0);
    std::vector<std::vector<int>> preds(n);
    std::vector<int> order;
    std::queue<int> q;
    dist[src] = 0;
    sigma[src] = 1;
    q.push(src);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      order.push_back(v);
      for (int w : adj[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    std::vector<double> delta(n, 0.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      int w = *it;
      for (int v : preds[w])
        delta[v] += (static_cast<double>(sigma[v]) / sigma[w]) * (1.0 + delta[w]);
      if (w != src) bc[w] += delta[w];
    }
    std::int64_t dsum = 0;
    int reach = 0;
    for (int v = 0; v < n; ++v)
      if (v != src && dist[v] > 0) {
        dsum += dist[v];
        ++reach;
      }
    if (reach > 0) {
      closeness_sum += static_cast<double>(reach) / static_cast<double>(dsum);
      ++closeness_nodes;
    }
  }
  // undirected: halve pair-double-counting, normalize by (n-1)(n-2)/2
  double bsum = 0.0;
  if (n > 2) {
    const double norm = (static_cast<double>(n) - 1.0) * (static_cast<double>(n) - 2.0);
    for (double b : bc) bsum += b / norm;  // b/2 / (norm/2)
  }
  s.mean_betweenness = n > 0 ? bsum / n : 0.0;
  s.mean_closeness = closeness_nodes > 0 ? closeness_sum / closeness_nodes : 0.0;
  return s;
}

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ErrorReport error_report(const TemporalGraph& src, const TemporalGraph& gen,
                         const ReportOptions& opt) {
  if (src.num_edges() == 0 || gen.num_edges() == 0)
    throw std::invalid_argument("both graphs must be nonempty");

  const std::vector<double> times = src.unique_timestamps();
  const size_t nstat = SnapshotStats::names().size();
  std::vector<std::vector<double>> errs(nstat);

  // generated edges bucketed by nearest source timestamp for alignment
  std::map<double, std::vector<TemporalEdge>> gen_at;
  for (const auto& e : gen.edges()) {
    auto it = std::lower_bound(times.begin(), times.end(), e.t);
    double snapped;
    if (it == times.begin())
      snapped = *it;
    else if (it == times.end())
      snapped = times.back();
    else
      snapped = (e.t - *(it - 1)) <= (*it - e.t) ? *(it - 1) : *it;
    gen_at[snapped].push_back(e);
  }

  std::vector<std::vector<double>> per_time(times.size());
  auto eval_time = [&](size_t i) {
    const double t = times[i];
    SnapshotStats ss;
    if (opt.upto) {
      ss = stats(src.snapshot(t, true));
    } else {
      ss = stats(src.snapshot(t, false));
    }
    SnapshotStats gs;
    bool have_gen = false;
    if (opt.upto) {
      std::vector<TemporalEdge> cum;
      for (const auto& [gt, es] : gen_at) {
        if (gt > t) break;
        cum.insert(cum.end(), es.begin(), es.end());
      }
      if (!cum.empty()) {
        std::set<std::pair<int, int>> pairs;
        for (const auto& e : cum)
          pairs.insert({std::min(e.u, e.v), std::max(e.u, e.v)});
        StaticGraph sg;
        sg.num_nodes = gen.num_nodes();
        sg.edges = {pairs.begin(), pairs.end()};
        gs = stats(sg);
        have_gen = true;
      }
    } else if (auto it = gen_at.find(t); it != gen_at.end()) {
      std::set<std::pair<int, int>> pairs;
      for (const auto& e : it->second)
        pairs.insert({std::min(e.u, e.v), std::max(e.u, e.v)});
      StaticGraph sg;
      sg.num_nodes = gen.num_nodes();
      sg.edges = {pairs.begin(), pairs.end()};
      gs = stats(sg);
      have_gen = true;
    }
    const std::vector<double> a = ss.values();
    const std::vector<double> b =
        have_gen ? gs.values() : std::vector<double>(nstat, 0.0);
    per_time[i].resize(nstat);
    for (size_t k = 0; k < nstat; ++k) per_time[i][k] = std::fabs(a[k] - b[k]);
  };

  if (opt.threads <= 1) {
    for (size_t i = 0; i < times.size(); ++i) eval_time(i);
  } else {
    std::vector<std::thread> pool;
    const size_t chunk = (times.size() + opt.threads - 1) / opt.threads;
    for (int w = 0; w < opt.threads; ++w) {
      size_t lo = w * chunk, hi = std::min(times.size(), lo + chunk);
      if (lo < hi)
        pool.emplace_back([&, lo, hi] {
          for (size_t i = lo; i < hi; ++i) eval_time(i);
        });
    }
    for (auto& th : pool) th.join();
  }
  for (size_t i = 0; i < times.size(); ++i)
    for (size_t k = 0; k < nstat; ++k) errs[k].push_back(per_time[i][k]);

  ErrorReport rep;
  rep.snapshots = static_cast<int>(times.size());
  for (size_t k = 0; k < nstat; ++k) {
    rep.median_abs_err.push_back(median_of(errs[k]));
    const double mean =
        std::accumulate(errs[k].begin(), errs[k].end(), 0.0) / errs[k].size();
    double var = 0.0;
    for (double e : errs[k]) var += (e - mean) * (e - mean);
    rep.mean_abs_err.push_back(mean);
    rep.std_abs_err.push_back(std::sqrt(var / errs[k].size()));
  }

  // overlap over unordered label pairs with a time tolerance
  auto label_of = [](const std::vector<std::string>* labels, int v) {
    return labels ? (*labels)[static_cast<size_t>(v)] : std::to_string(v);
  };
  std::map<std::pair<std::string, std::string>, std::vector<double>> gen_pairs;
  for (const auto& e : gen.edges()) {
    std::string a = label_of(opt.gen_labels, e.u), b = label_of(opt.gen_labels, e.v);
    if (b < a) std::swap(a, b);
    gen_pairs[{a, b}].push_back(e.t);
  }
  for (auto& [k, v] : gen_pairs) std::sort(v.begin(), v.end());
  std::int64_t matched = 0;
  for (const auto& e : src.edges()) {
    std::string a = label_of(opt.src_labels, e.u), b = label_of(opt.src_labels, e.v);
    if (b < a) std::swap(a, b);
    auto it = gen_pairs.find({a, b});
    if (it == gen_pairs.end()) continue;
    auto lo = std::upper_bound(it->second.begin(), it->second.end(),
                               e.t - opt.time_tol);
    if (lo != it->second.end() && *lo < e.t + opt.time_tol) ++matched;
  }
  rep.overlap_percent =
      100.0 * static_cast<double>(matched) / static_cast<double>(src.num_edges());
  return rep;
}

void save_report_csv(const std::string& path, const ErrorReport& r) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "statistic,median_abs_err,mean_abs_err,std\n";
  f.precision(17);
  const auto& names = SnapshotStats::names();
  for (size_t k = 0; k < names.size(); ++k)
    f << names[k] << "," << r.median_abs_err[k] << "," << r.mean_abs_err[k] << ","
      << r.std_abs_err[k] << "\n";
  f << "edge_overlap_percent," << r.overlap_percent << ",,\n";
}

void save_report_json(const std::string& path, const ErrorReport& r) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f.precision(17);
  f << "{\n  \"snapshots\": " << r.snapshots << ",\n";
  f << "  \"edge_overlap_percent\": " << r.overlap_percent << ",\n";
  f << "  \"wall_time_sec\": " << r.wall_time_sec << ",\n";
  f << "  \"statistics\": {\n";
  const auto& names = SnapshotStats::names();
  for (size_t k = 0; k < names.size(); ++k) {
    f << "    \"" << names[k] << "\": {\"median_abs_err\": " << r.median_abs_err[k]
      << ", \"mean_abs_err\": " << r.mean_abs_err[k]
      << ", \"std\": " << r.std_abs_err[k] << "}";
    f << (k + 1 < names.size() ? ",\n" : "\n");
  }
  f << "  }\n}\n";
}

}  // namespace tgen
