#include "tgen/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>
#include <stdexcept>
#include <unordered_map>

namespace tgen {

std::vector<std::vector<int>> StaticGraph::adjacency() const {
  std::vector<std::vector<int>> adj(num_nodes);
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  return adj;
}

TemporalGraph::TemporalGraph(int num_nodes, std::vector<TemporalEdge> edges)
    : num_nodes_(num_nodes), edges_(std::move(edges)) {
  adj_.resize(num_nodes_);
  std::set<std::tuple<int, int, double>> seen;
  for (const auto& e : edges_) {
    if (e.u < 0 || e.u >= num_nodes_ || e.v < 0 || e.v >= num_nodes_)
      throw std::invalid_argument("edge endpoint out of range");
    if (e.u == e.v) throw std::invalid_argument("self-loop edge");
    if (e.t < 0.0) throw std::invalid_argument("negative timestamp");
    if (!seen.insert({std::min(e.u, e.v), std::max(e.u, e.v), e.t}).second)
      throw std::invalid_argument("duplicate edge");
    t_max_ = std::max(t_max_, e.t);
    adj_[e.u].push_back({e.v, e.t});
    adj_[e.v].push_back({e.u, e.t});
  }
  for (auto& a : adj_)
    std::sort(a.begin(), a.end(),
              [](const auto& x, const auto& y) { return x.second < y.second; });
}

StaticGraph TemporalGraph::static_projection() const {
  std::set<std::pair<int, int>> pairs;
  for (const auto& e : edges_)
    pairs.insert({std::min(e.u, e.v), std::max(e.u, e.v)});
  StaticGraph s;
  s.num_nodes = num_nodes_;
  s.edges.assign(pairs.begin(), pairs.end());
  return s;
}

StaticGraph TemporalGraph::snapshot(double t, bool upto) const {
  std::set<std::pair<int, int>> pairs;
  bool found = false;
  for (const auto& e : edges_) {
    if (upto ? (e.t <= t) : (e.t == t)) {
      pairs.insert({std::min(e.u, e.v), std::max(e.u, e.v)});
      found = true;
    }
  }
  if (!upto && !found) throw std::invalid_argument("timestamp absent");
  StaticGraph s;
  s.num_nodes = num_nodes_;
  s.edges.assign(pairs.begin(), pairs.end());
  return s;
}

std::vector<double> TemporalGraph::unique_timestamps() const {
  std::set<double> ts;
  for (const auto& e : edges_) ts.insert(e.t);
  return {ts.begin(), ts.end()};
}

LoadResult load_edge_list(const std::string& path, bool dedupe) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);

  LoadResult res;
  std::unordered_map<std::string, int> index;
  std::vector<std::string> labels;
  std::vector<TemporalEdge> edges;
  std::set<std::tuple<int, int, double>> seen;

  auto intern = [&](const std::string& label) {
    auto it = index.find(label);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(labels.size());
    index.emplace(label, id);
    labels.push_back(label);
    return id;
  };

  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
      throw std::runtime_error("malformed line " + std::to_string(lineno) + ": " + line);
    double t;
    try {
      size_t pos = 0;
      t = std::stod(c, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error("malformed timestamp at line " + std::to_string(lineno));
    }
    if (t < 0.0 || !std::isfinite(t))
      throw std::runtime_error("bad timestamp at line " + std::to_string(lineno));
    if (a == b) {
      ++res.rejected_self_loops;
      continue;
    }
    int u = intern(a), v = intern(b);
    auto key = std::make_tuple(std::min(u, v), std::max(u, v), t);
    if (seen.count(key)) {
      if (dedupe) {
        ++res.deduped;
        continue;
      }
      throw std::runtime_error("duplicate edge at line " + std::to_string(lineno));
    }
    seen.insert(key);
    edges.push_back({u, v, t});
  }
  if (edges.empty()) throw std::runtime_error("empty edge list: " + path);
  res.graph = TemporalGraph(static_cast<int>(labels.size()), std::move(edges));
  res.labels = std::move(labels);
  return res;
}

void save_edge_list(const std::string& path, const TemporalGraph& g,
                    const std::vector<std::string>& labels) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write edge list: " + path);
  out.precision(17);
  for (const auto& e : g.edges())
    out << labels[e.u] << ',' << labels[e.v] << ',' << e.t << '\n';
}

void save_label_map(const std::string& path, const std::vector<std::string>& labels) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write label map: " + path);
  for (size_t i = 0; i < labels.size(); ++i) out << labels[i] << ',' << i << '\n';
}

}  // namespace tgen
