#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "tgen/walker.hpp"

using namespace tgen;

TEST_CASE("temporal neighborhood filters, sorts, windows") {
  TemporalGraph g(4, {{0, 1, 1.0}, {0, 2, 4.0}, {0, 3, 7.0}});
  auto n1 = temporal_neighborhood(g, 0, 1.0);
  REQUIRE(n1.size() == 2);
  CHECK(n1[0].second == 4.0);
  CHECK(n1[1].second == 7.0);
  CHECK(temporal_neighborhood(g, 0, 7.0).empty());
  auto w1 = temporal_neighborhood(g, 0, 1.0, 1);
  REQUIRE(w1.size() == 1);
  CHECK(w1[0].second == 4.0);
}

TEST_CASE("jump distribution oracle values") {
  std::vector<std::pair<int, double>> nbrs = {{1, 1.0}, {2, 1.0}};
  auto p = jump_distribution(0.0, nbrs);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));

  nbrs = {{1, 1.0}, {2, 2.0}};
  p = jump_distribution(0.0, nbrs);
  CHECK(p[0] == doctest::Approx(0.7310585786300049).epsilon(1e-10));
  CHECK(p[1] == doctest::Approx(0.2689414213699951).epsilon(1e-10));

  nbrs = {{5, 9.0}};
  p = jump_distribution(3.0, nbrs);
  REQUIRE(p.size() == 1);
  CHECK(p[0] == doctest::Approx(1.0));

  CHECK_THROWS(jump_distribution(0.0, {}));
}

TEST_CASE("jump distribution equals brute-force softmax within 1e-12") {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.index(64));
    const double t = rng.uniform() * 100.0;
    std::vector<std::pair<int, double>> nbrs(n);
    for (auto& [v, tt] : nbrs) {
      v = 0;
      tt = t + 1e-3 + rng.uniform() * 50.0;
    }
    auto p = jump_distribution(t, nbrs);
    double total = 0.0, norm = 0.0;
    for (const auto& [v, tt] : nbrs) norm += std::exp(-(tt - t));
    for (int i = 0; i < n; ++i) {
      const double ref = std::exp(-(nbrs[i].second - t)) / norm;
      CHECK(std::fabs(p[i] - ref) < 1e-12);
      total += p[i];
    }
    CHECK(std::fabs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("sample_walk on deterministic chain") {
  // path 0-1 at t=1, 1-2 at t=2: the single continuation is forced
  TemporalGraph g(3, {{0, 1, 1.0}, {1, 2, 2.0}});
  WalkerConfig cfg;
  Rng rng(1);
  Walk w = sample_walk(g, {0, 1, 1.0}, cfg, rng);
  REQUIRE(w.steps.size() == 3);
  CHECK(w.steps[0].v == 1);
  CHECK(w.steps[0].t == 1.0);
  CHECK(w.steps[1].v == 2);
  CHECK(w.steps[1].t == 2.0);
  CHECK(w.steps.back().v == kEndSentinel);
}

TEST_CASE("isolated-future start yields length 1 plus END") {
  TemporalGraph g(3, {{0, 1, 5.0}, {1, 2, 1.0}});
  WalkerConfig cfg;
  Rng rng(2);
  Walk w = sample_walk(g, {0, 1, 5.0}, cfg, rng);
  REQUIRE(w.steps.size() == 2);
  CHECK(w.steps[0].v == 1);
  CHECK(w.steps[1].v == kEndSentinel);
}

TEST_CASE("max_len caps non-sentinel tuples") {
  TemporalGraph g = testutil::random_temporal_graph(10, 60, 30.0, 7);
  WalkerConfig cfg;
  cfg.max_len = 2;
  Rng rng(3);
  for (const auto& e : g.edges()) {
    Walk w = sample_walk(g, e, cfg, rng);
    int real = 0;
    for (const auto& s : w.steps)
      if (s.v != kEndSentinel) ++real;
    CHECK(real <= 2);
  }
}

TEST_CASE("walks have strictly increasing times; END only terminal") {
  TemporalGraph g = testutil::random_temporal_graph(20, 120, 40.0, 13);
  WalkerConfig cfg;
  WalkSet ws = sample_walk_set(g, 10000, cfg, 17);
  REQUIRE(ws.walks.size() == 10000);
  for (const auto& w : ws.walks) {
    for (size_t i = 1; i < w.steps.size(); ++i) {
      if (w.steps[i].v == kEndSentinel) {
        CHECK(i + 1 == w.steps.size());
      } else {
        CHECK(w.steps[i].t > w.steps[i - 1].t);
      }
    }
  }
}

TEST_CASE("training walk transitions are edges of the source graph") {
  TemporalGraph g = testutil::random_temporal_graph(15, 80, 25.0, 23);
  std::set<std::tuple<int, int, double>> edges;
  for (const auto& e : g.edges()) {
    edges.insert({e.u, e.v, e.t});
    edges.insert({e.v, e.u, e.t});
  }
  WalkerConfig cfg;
  WalkSet ws = sample_walk_set(g, -1, cfg, 29);
  for (const auto& w : ws.walks)
    for (size_t i = 1; i < w.steps.size(); ++i) {
      if (w.steps[i].v == kEndSentinel) break;
      CHECK(edges.count({w.steps[i - 1].v, w.steps[i].v, w.steps[i].t}) == 1);
    }
}

TEST_CASE("epoch mode yields one walk per temporal edge") {
  TemporalGraph g = testutil::random_temporal_graph(10, 40, 20.0, 31);
  WalkerConfig cfg;
  WalkSet ws = sample_walk_set(g, -1, cfg, 37);
  CHECK(static_cast<std::int64_t>(ws.walks.size()) == g.num_edges());
  CHECK(ws.first_tuples.size() == ws.walks.size());
}

TEST_CASE("walk set deterministic per seed and across thread counts") {
  TemporalGraph g = testutil::random_temporal_graph(12, 50, 15.0, 41);
  WalkerConfig cfg;
  WalkSet a = sample_walk_set(g, 200, cfg, 43, 1);
  WalkSet b = sample_walk_set(g, 200, cfg, 43, 1);
  WalkSet c = sample_walk_set(g, 200, cfg, 43, 4);
  REQUIRE(a.walks.size() == b.walks.size());
  for (size_t i = 0; i < a.walks.size(); ++i) {
    CHECK(format_walk(a.walks[i]) == format_walk(b.walks[i]));
    CHECK(format_walk(a.walks[i]) == format_walk(c.walks[i]));
  }
}

TEST_CASE("alias cache returns consistent tables") {
  TemporalGraph g = testutil::random_temporal_graph(10, 50, 20.0, 47);
  AliasCache cache;
  auto t1 = cache.get(g, 3, 0.0, 0);
  auto t2 = cache.get(g, 3, 0.0, 0);
  CHECK(t1.get() == t2.get());
  auto nbrs = temporal_neighborhood(g, 3, 0.0, 0);
  if (t1) {
    auto ref = jump_distribution(0.0, nbrs);
    auto rec = t1->reconstruct();
    REQUIRE(rec.size() == ref.size());
    for (size_t i = 0; i < ref.size(); ++i) CHECK(std::fabs(rec[i] - ref[i]) < 1e-9);
  }
}

TEST_CASE("format_walk dumps v:t tuples with END literal") {
  Walk w;
  w.steps = {{0, 1.0}, {2, 3.5}, {kEndSentinel, 3.5}};
  std::string s = format_walk(w);
  CHECK(s.find("0:1") != std::string::npos);
  CHECK(s.find("2:3.5") != std::string::npos);
  CHECK(s.find("END") != std::string::npos);
}
