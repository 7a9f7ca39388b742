#include "tgen/inductive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

#include "model_ops.hpp"

namespace tgen {

namespace {
using detail::lstm_layer;
using detail::mixture_nll;
constexpr double kLog2Pi = 1.8378770664093453;

Eigen::MatrixXd glorot(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = (2.0 * rng.uniform() - 1.0) * s;
  return m;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

// ---------------------------------------------------------------- GraphSAGE

Eigen::MatrixXd sage_embed(const StaticGraph& gs, const SageConfig& cfg,
                           const Eigen::VectorXd* neg_weights) {
  if (cfg.dim % 2 != 0) throw std::invalid_argument("embedding dim must be even");
  const int n = gs.num_nodes;
  const int half = cfg.dim / 2;
  auto adj = gs.adjacency();
  std::vector<std::set<int>> nbr_set(n);
  for (int v = 0; v < n; ++v) nbr_set[v] = {adj[v].begin(), adj[v].end()};

  Rng rng(cfg.seed);
  Eigen::MatrixXd x(n, half);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < half; ++c) x(r, c) = (2.0 * rng.uniform() - 1.0) * 0.5;

  Eigen::VectorXd w = neg_weights ? *neg_weights : Eigen::VectorXd::Ones(n);
  std::discrete_distribution<int> neg_dist(w.data(), w.data() + n);

  auto zvec = [&](int v) {
    Eigen::VectorXd z(cfg.dim);
    z.head(half) = x.row(v).transpose();
    if (adj[v].empty()) {
      z.tail(half).setZero();
    } else {
      Eigen::VectorXd m = Eigen::VectorXd::Zero(half);
      for (int u : adj[v]) m += x.row(u).transpose();
      z.tail(half) = m / static_cast<double>(adj[v].size());
    }
    return z;
  };
  auto apply = [&](int v, const Eigen::VectorXd& gz, double lr) {
    x.row(v) -= lr * gz.head(half).transpose();
    if (!adj[v].empty()) {
      const double inv = 1.0 / static_cast<double>(adj[v].size());
      for (int u : adj[v]) x.row(u) -= lr * inv * gz.tail(half).transpose();
    }
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& [a, b] : gs.edges) {
      for (auto [center, pos] : {std::pair{a, b}, std::pair{b, a}}) {
        Eigen::VectorXd zc = zvec(center), zp = zvec(pos);
        const double s = sigmoid(zc.dot(zp));
        Eigen::VectorXd gc = (s - 1.0) * zp;
        Eigen::VectorXd gp = (s - 1.0) * zc;
        apply(pos, gp, cfg.lr);
        for (int q = 0; q < cfg.negatives; ++q) {
          int k = -1;
          for (int tries = 0; tries < 32; ++tries) {
            int cand = neg_dist(rng.engine());
            if (cand != center && !nbr_set[center].count(cand)) {
              k = cand;
              break;
            }
          }
          if (k < 0) continue;
          Eigen::VectorXd zk = zvec(k);
          const double sk = sigmoid(zc.dot(zk));
          gc += sk * zk;
          apply(k, Eigen::VectorXd(sk * zc), cfg.lr);
        }
        apply(center, gc, cfg.lr);
      }
    }
  }

  Eigen::MatrixXd out(n, cfg.dim);
  for (int v = 0; v < n; ++v) out.row(v) = zvec(v).transpose();
  return out;
}

BoostResult boost_negatives(const Eigen::MatrixXd& emb, const StaticGraph& gs,
                            double sim_threshold, Eigen::VectorXd weights) {
  const int n = gs.num_nodes;
  std::set<std::pair<int, int>> edges(gs.edges.begin(), gs.edges.end());
  BoostResult res;
  res.weights = std::move(weights);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      if (edges.count({u, v})) continue;
      if (sigmoid(emb.row(u).dot(emb.row(v))) > sim_threshold) {
        ++res.false_positives;
        res.weights[u] *= 2.0;
        res.weights[v] *= 2.0;
      }
    }
  return res;
}

Eigen::MatrixXd sage_embed_boosted(const StaticGraph& gs, const SageConfig& cfg,
                                   double sim_threshold, std::int64_t fp_threshold,
                                   int max_rounds) {
  Eigen::VectorXd weights = Eigen::VectorXd::Ones(gs.num_nodes);
  Eigen::MatrixXd emb;
  for (int round = 0; round < std::max(1, max_rounds); ++round) {
    SageConfig c = cfg;
    c.seed = split_seed(cfg.seed, static_cast<std::uint64_t>(round));
    emb = sage_embed(gs, c, &weights);
    BoostResult br = boost_negatives(emb, gs, sim_threshold, weights);
    if (br.false_positives <= fp_threshold) break;
    weights = br.weights;
  }
  return emb;
}

// ------------------------------------------------------------------ k-means

ClusterModel kmeans_fit(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                        int max_iter) {
  const Eigen::Index n = points.rows();
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  std::set<std::vector<double>> distinct;
  for (Eigen::Index r = 0; r < n; ++r)
    distinct.insert({points.row(r).begin(), points.row(r).end()});
  if (static_cast<size_t>(k) > distinct.size())
    throw std::invalid_argument("k exceeds number of distinct points");

  Rng rng(seed);
  Eigen::MatrixXd cent(k, points.cols());
  // k-means++ seeding
  cent.row(0) = points.row(rng.index(n));
  Eigen::VectorXd d2 = (points.rowwise() - cent.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    double total = d2.sum();
    double u = rng.uniform() * total;
    Eigen::Index pick = n - 1;
    double acc = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      acc += d2[r];
      if (u <= acc) {
        pick = r;
        break;
      }
    }
    cent.row(c) = points.row(pick);
    d2 = d2.cwiseMin((points.rowwise() - cent.row(c)).rowwise().squaredNorm());
  }

  std::vector<int> assign(n, -1);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (Eigen::Index r = 0; r < n; ++r) {
      int best = 0;
      double bd = (points.row(r) - cent.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        double d = (points.row(r) - cent.row(c)).squaredNorm();
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (assign[r] != best) {
        assign[r] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
    // recompute centroids; empty clusters re-seed from the farthest point
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<int> counts(k, 0);
    for (Eigen::Index r = 0; r < n; ++r) {
      sums.row(assign[r]) += points.row(r);
      ++counts[assign[r]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        cent.row(c) = sums.row(c) / counts[c];
      } else {
        Eigen::Index far = 0;
        double fd = -1.0;
        for (Eigen::Index r = 0; r < n; ++r) {
          double d = (points.row(r) - cent.row(assign[r])).squaredNorm();
          if (d > fd) {
            fd = d;
            far = r;
          }
        }
        cent.row(c) = points.row(far);
      }
    }
  }

  ClusterModel m;
  m.centroids = cent;
  m.assignment = assign;
  for (Eigen::Index r = 0; r < n; ++r)
    m.objective += (points.row(r) - cent.row(assign[r])).squaredNorm();
  return m;
}

// --------------------------------------------------------------------- WGAN

namespace {

struct MlpLeaves {
  Tape::Var w1, b1, w2, b2, w3, b3;
};

Tape::Var mlp_forward(Tape& t, const MlpLeaves& m, Tape::Var x, Eigen::Index batch) {
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(1, batch);
  Tape::Var o = t.constant(ones);
  auto aff = [&](Tape::Var w, Tape::Var b, Tape::Var in) {
    return t.add(t.matmul(w, in), t.matmul(b, o));
  };
  Tape::Var h1 = t.relu(aff(m.w1, m.b1, x));
  Tape::Var h2 = t.relu(aff(m.w2, m.b2, h1));
  return aff(m.w3, m.b3, h2);
}

class RmsProp {
 public:
  explicit RmsProp(double lr) : lr_(lr) {}
  void step(std::vector<Eigen::MatrixXd*> params,
            const std::vector<Eigen::MatrixXd>& grads) {
    if (cache_.empty())
      for (auto* p : params) cache_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    for (size_t i = 0; i < params.size(); ++i) {
      cache_[i] = 0.9 * cache_[i] + 0.1 * grads[i].cwiseProduct(grads[i]);
      params[i]->array() -= lr_ * grads[i].array() / (cache_[i].array().sqrt() + 1e-8);
    }
  }

 private:
  double lr_;
  std::vector<Eigen::MatrixXd> cache_;
};

}  // namespace

WganPair wgan_train(const Eigen::MatrixXd& embeddings, const WganConfig& cfg) {
  // duplicate rows removed before training
  std::set<std::vector<double>> seen;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index r = 0; r < embeddings.rows(); ++r) {
    std::vector<double> row(embeddings.row(r).begin(), embeddings.row(r).end());
    if (seen.insert(row).second) keep.push_back(r);
  }
  if (keep.size() < 2) throw std::invalid_argument("need >= 2 distinct embeddings");
  Eigen::MatrixXd data(static_cast<Eigen::Index>(keep.size()), embeddings.cols());
  for (size_t i = 0; i < keep.size(); ++i) data.row(i) = embeddings.row(keep[i]);

  const int d = static_cast<int>(embeddings.cols());
  Rng rng(cfg.seed);
  WganPair p;
  p.cfg = cfg;
  p.g_w1 = glorot(cfg.hidden, cfg.noise_dim, rng);
  p.g_b1 = Eigen::MatrixXd::Zero(cfg.hidden, 1);
  p.g_w2 = glorot(cfg.hidden, cfg.hidden, rng);
  p.g_b2 = Eigen::MatrixXd::Zero(cfg.hidden, 1);
  p.g_w3 = glorot(d, cfg.hidden, rng);
  p.g_b3 = Eigen::MatrixXd::Zero(d, 1);
  p.d_w1 = glorot(cfg.hidden, d, rng) * cfg.clip;
  p.d_b1 = Eigen::MatrixXd::Zero(cfg.hidden, 1);
  p.d_w2 = glorot(cfg.hidden, cfg.hidden, rng) * cfg.clip;
  p.d_b2 = Eigen::MatrixXd::Zero(cfg.hidden, 1);
  p.d_w3 = glorot(1, cfg.hidden, rng) * cfg.clip;
  p.d_b3 = Eigen::MatrixXd::Zero(1, 1);

  RmsProp opt_d(cfg.lr), opt_g(cfg.lr);
  std::vector<Eigen::MatrixXd*> dp = {&p.d_w1, &p.d_b1, &p.d_w2,
                                      &p.d_b2, &p.d_w3, &p.d_b3};
  std::vector<Eigen::MatrixXd*> gp = {&p.g_w1, &p.g_b1, &p.g_w2,
                                      &p.g_b2, &p.g_w3, &p.g_b3};

  auto draw_real = [&](Eigen::Index b) {
    Eigen::MatrixXd x(d, b);
    for (Eigen::Index i = 0; i < b; ++i)
      x.col(i) = data.row(rng.index(static_cast<std::uint64_t>(data.rows()))).transpose();
    return x;
  };
  auto draw_noise = [&](Eigen::Index b) {
    Eigen::MatrixXd z(cfg.noise_dim, b);
    for (Eigen::Index c = 0; c < b; ++c)
      for (int r = 0; r < cfg.noise_dim; ++r) z(r, c) = rng.normal();
    return z;
  };
  const Eigen::Index batch =
      std::min<Eigen::Index>(cfg.batch, data.rows());
  const int batches_per_epoch =
      std::max<int>(1, static_cast<int>(data.rows() / batch));

  for (int round = 0; round < cfg.rounds; ++round) {
    double last_critic = 0.0;
    for (int ce = 0; ce < 4; ++ce) {
      for (int bidx = 0; bidx < batches_per_epoch; ++bidx) {
        Tape t;
        MlpLeaves D{t.leaf(p.d_w1), t.leaf(p.d_b1), t.leaf(p.d_w2),
                    t.leaf(p.d_b2), t.leaf(p.d_w3), t.leaf(p.d_b3)};
        MlpLeaves G{t.constant(p.g_w1), t.constant(p.g_b1), t.constant(p.g_w2),
                    t.constant(p.g_b2), t.constant(p.g_w3), t.constant(p.g_b3)};
        Tape::Var fake = mlp_forward(t, G, t.constant(draw_noise(batch)), batch);
        Tape::Var d_fake = mlp_forward(t, D, fake, batch);
        Tape::Var d_real = mlp_forward(t, D, t.constant(draw_real(batch)), batch);
        // critic maximizes E[D(real)] - E[D(fake)]
        Tape::Var loss = t.scale(t.sub(t.sum(d_fake), t.sum(d_real)),
                                 1.0 / static_cast<double>(batch));
        t.backward(loss);
        last_critic = t.value(loss)(0, 0);
        if (!std::isfinite(last_critic))
          throw std::runtime_error("wgan critic diverged (NaN loss)");
        std::vector<Eigen::MatrixXd> grads = {t.grad(D.w1), t.grad(D.b1),
                                              t.grad(D.w2), t.grad(D.b2),
                                              t.grad(D.w3), t.grad(D.b3)};
        opt_d.step(dp, grads);
        for (auto* wp : dp)
          *wp = wp->cwiseMax(-cfg.clip).cwiseMin(cfg.clip);
      }
    }
    p.critic_loss.push_back(last_critic);
    for (int bidx = 0; bidx < batches_per_epoch; ++bidx) {
      Tape t;
      MlpLeaves G{t.leaf(p.g_w1), t.leaf(p.g_b1), t.leaf(p.g_w2),
                  t.leaf(p.g_b2), t.leaf(p.g_w3), t.leaf(p.g_b3)};
      MlpLeaves D{t.constant(p.d_w1), t.constant(p.d_b1), t.constant(p.d_w2),
                  t.constant(p.d_b2), t.constant(p.d_w3), t.constant(p.d_b3)};
      Tape::Var fake = mlp_forward(t, G, t.constant(draw_noise(batch)), batch);
      Tape::Var loss = t.scale(t.neg(t.sum(mlp_forward(t, D, fake, batch))),
                               1.0 / static_cast<double>(batch));
      t.backward(loss);
      if (!std::isfinite(t.value(loss)(0, 0)))
        throw std::runtime_error("wgan generator diverged (NaN loss)");
      std::vector<Eigen::MatrixXd> grads = {t.grad(G.w1), t.grad(G.b1),
                                            t.grad(G.w2), t.grad(G.b2),
                                            t.grad(G.w3), t.grad(G.b3)};
      opt_g.step(gp, grads);
    }
  }
  return p;
}

Eigen::MatrixXd wgan_sample(const WganPair& p, int count, std::uint64_t seed) {
  Rng rng(seed);
  const int d = static_cast<int>(p.g_w3.rows());
  Eigen::MatrixXd out(count, d);
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd z(p.cfg.noise_dim);
    for (int r = 0; r < p.cfg.noise_dim; ++r) z[r] = rng.normal();
    Eigen::VectorXd h1 = ((p.g_w1 * z + p.g_b1.col(0)).cwiseMax(0.0));
    Eigen::VectorXd h2 = ((p.g_w2 * h1 + p.g_b2.col(0)).cwiseMax(0.0));
    out.row(i) = (p.g_w3 * h2 + p.g_b3.col(0)).transpose();
  }
  return out;
}

int nearest_node(const Eigen::VectorXd& query, const Eigen::MatrixXd& table) {
  if (table.rows() == 0) throw std::invalid_argument("empty node table");
  const double qn = query.norm();
  if (qn == 0.0) throw std::invalid_argument("zero-norm query");
  int best = 0;
  double best_sim = -2.0;
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    const double rn = table.row(r).norm();
    const double sim = rn == 0.0 ? -1.0 : table.row(r).dot(query) / (rn * qn);
    if (sim > best_sim) {
      best_sim = sim;
      best = static_cast<int>(r);
    }
  }
  return best;
}

// --------------------------------------------------------- inductive model

InductiveModel::InductiveModel(const InductiveConfig& cfg, Rng& rng) : cfg_(cfg) {
  const int H = cfg.d_h;
  embed_w = glorot(cfg.d_emb, cfg.d_emb, rng);
  t2v_omega = glorot(cfg.d_t, 1, rng);
  t2v_zeta = glorot(cfg.d_t, 1, rng);
  lstm0_w = glorot(4 * H, cfg.d_emb + cfg.d_t + H, rng);
  lstm0_b = Eigen::MatrixXd::Zero(4 * H, 1);
  lstm1_w = glorot(4 * H, 2 * H, rng);
  lstm1_b = Eigen::MatrixXd::Zero(4 * H, 1);
  cluster_head = glorot(cfg.clusters, H, rng);
  w_mu_k = glorot(cfg.clusters * cfg.d_z, H, rng);
  w_sig_k = glorot(cfg.clusters * cfg.d_z, H, rng);
  w_mu_z = glorot(cfg.d_emb, cfg.d_z, rng);
  w_sig_z = glorot(cfg.d_emb, cfg.d_z, rng);
  mix_mu = glorot(cfg.components, cfg.d_emb + H, rng);
  mix_sigma = glorot(cfg.components, cfg.d_emb + H, rng);
  mix_phi = glorot(cfg.components, cfg.d_emb + H, rng);
}

std::vector<ParamRef> InductiveModel::params() {
  return {
      {"embed_w", &embed_w},         {"t2v_omega", &t2v_omega},
      {"t2v_zeta", &t2v_zeta},       {"lstm0_w", &lstm0_w},
      {"lstm0_b", &lstm0_b},         {"lstm1_w", &lstm1_w},
      {"lstm1_b", &lstm1_b},         {"cluster_head", &cluster_head},
      {"w_mu_k", &w_mu_k},           {"w_sig_k", &w_sig_k},
      {"w_mu_z", &w_mu_z},           {"w_sig_z", &w_sig_z},
      {"mix_mu", &mix_mu},           {"mix_sigma", &mix_sigma},
      {"mix_phi", &mix_phi},
  };
}

struct InductiveModel::Leaves {
  Tape::Var embed_w, omega, zeta, l0w, l0b, l1w, l1b, chead, muk, sigk, muz,
      sigz, mu, sigma, phi;
  static Leaves make(Tape& t, const InductiveModel& m) {
    return {t.leaf(m.embed_w),  t.leaf(m.t2v_omega), t.leaf(m.t2v_zeta),
            t.leaf(m.lstm0_w),  t.leaf(m.lstm0_b),   t.leaf(m.lstm1_w),
            t.leaf(m.lstm1_b),  t.leaf(m.cluster_head), t.leaf(m.w_mu_k),
            t.leaf(m.w_sig_k),  t.leaf(m.w_mu_z),    t.leaf(m.w_sig_z),
            t.leaf(m.mix_mu),   t.leaf(m.mix_sigma), t.leaf(m.mix_phi)};
  }
};

Tape::Var InductiveModel::build_walk_loss(Tape& tape, const Leaves& p, const Walk& w,
                                          const Eigen::MatrixXd& emb,
                                          const std::vector<int>& assign,
                                          const Eigen::MatrixXd& eps) const {
  if (w.steps.size() < 2) throw std::invalid_argument("walk too short");
  if (eps.cols() < static_cast<Eigen::Index>(w.steps.size()) - 1)
    throw std::invalid_argument("eps column per predicted position required");
  const int H = cfg_.d_h;
  const int dz = cfg_.d_z;
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(H, 1);
  Tape::Var h0 = tape.constant(zero), c0 = tape.constant(zero);
  Tape::Var h1 = tape.constant(zero), c1 = tape.constant(zero);
  Tape::Var loss = tape.scalar(0.0);
  for (size_t i = 1; i < w.steps.size(); ++i) {
    const WalkTuple& prev = w.steps[i - 1];
    const WalkTuple& cur = w.steps[i];
    if (prev.v == kEndSentinel || cur.v == kEndSentinel)
      throw std::invalid_argument("END tuples must be stripped for inductive training");
    Tape::Var prev_emb = tape.constant(emb.row(prev.v).transpose());
    Tape::Var x = tape.vcat(tape.matmul(p.embed_w, prev_emb),
                            tape.time2vec(p.omega, p.zeta, prev.t));
    Tape::Var l0 = lstm_layer(tape, p.l0w, p.l0b, x, h0, c0, H);
    Tape::Var o = lstm_layer(tape, p.l1w, p.l1b, l0, h1, c1, H);
    const int k = assign[cur.v];
    // cluster posterior term, trained against the k-means label of the
    // true next node
    Tape::Var clogits = tape.matmul(p.chead, o);
    loss = tape.add(loss, tape.sub(tape.logsumexp(clogits), tape.pick(clogits, k)));
    // latent draw with the frozen per-position noise
    Tape::Var mu_k = tape.matmul(tape.rows(p.muk, k * dz, dz), o);
    Tape::Var sraw_k = tape.clamp(tape.matmul(tape.rows(p.sigk, k * dz, dz), o),
                                  -kSigmaRawClamp, kSigmaRawClamp);
    Tape::Var sig_k = tape.exp_(sraw_k);
    Tape::Var z = tape.add(mu_k, tape.cmul(tape.constant(eps.col(i - 1)), sig_k));
    // Gaussian embedding decoder
    Tape::Var mu_z = tape.matmul(p.muz, z);
    Tape::Var sraw_z = tape.clamp(tape.matmul(p.sigz, z), -kSigmaRawClamp,
                                  kSigmaRawClamp);
    Tape::Var diff = tape.sub(tape.constant(emb.row(cur.v).transpose()), mu_z);
    Tape::Var quad = tape.scale(
        tape.cmul(tape.cmul(diff, diff), tape.exp_(tape.scale(sraw_z, -2.0))), 0.5);
    Tape::Var gauss = tape.add(
        tape.add(tape.sum(sraw_z), tape.sum(quad)),
        tape.scalar(0.5 * kLog2Pi * static_cast<double>(cfg_.d_emb)));
    loss = tape.add(loss, gauss);
    // KL(N(mu, sigma^2) || N(0, I)), weighted by beta
    Tape::Var kl = tape.scale(
        tape.add(tape.sub(tape.sum(tape.cmul(mu_k, mu_k)),
                          tape.adds(tape.scale(tape.sum(sraw_k), 2.0),
                                    static_cast<double>(dz))),
                 tape.sum(tape.exp_(tape.scale(sraw_k, 2.0)))),
        0.5);
    loss = tape.add(loss, tape.scale(kl, cfg_.beta));
    // inter-event gap term
    if (cur.t <= prev.t) throw std::invalid_argument("non-increasing walk timestamps");
    const double dt = std::max(cur.t - prev.t, kMinDt);
    Tape::Var feat = tape.vcat(
        tape.matmul(p.embed_w, tape.constant(emb.row(cur.v).transpose())), o);
    loss = tape.add(loss, mixture_nll(tape, p.mu, p.sigma, p.phi, feat, dt));
  }
  return loss;
}

double InductiveModel::walk_nll(const Walk& w, const Eigen::MatrixXd& emb,
                                const std::vector<int>& assign,
                                const Eigen::MatrixXd& eps) const {
  Tape tape;
  Leaves p = Leaves::make(tape, *this);
  return tape.value(build_walk_loss(tape, p, w, emb, assign, eps))(0, 0);
}

double InductiveModel::walk_nll_grad(const std::vector<Walk>& batch,
                                     const Eigen::MatrixXd& emb,
                                     const std::vector<int>& assign,
                                     const std::vector<Eigen::MatrixXd>& eps,
                                     std::vector<Eigen::MatrixXd>& grads) const {
  Tape tape;
  Leaves p = Leaves::make(tape, *this);
  Tape::Var loss = tape.scalar(0.0);
  for (size_t i = 0; i < batch.size(); ++i)
    loss = tape.add(loss, build_walk_loss(tape, p, batch[i], emb, assign, eps[i]));
  tape.backward(loss);
  const Tape::Var ids[] = {p.embed_w, p.omega, p.zeta, p.l0w, p.l0b, p.l1w,
                           p.l1b,     p.chead, p.muk,  p.sigk, p.muz, p.sigz,
                           p.mu,      p.sigma, p.phi};
  grads.clear();
  for (Tape::Var v : ids) grads.push_back(tape.grad(v));
  return tape.value(loss)(0, 0);
}

TrainReportI InductiveModel::train(std::vector<Walk> walks, const Eigen::MatrixXd& emb,
                                   const std::vector<int>& assign) {
  if (walks.empty()) throw std::invalid_argument("empty walk set");
  TrainReportI report;
  Adam opt(cfg_.lr);
  auto prefs = params();
  Rng rng(split_seed(cfg_.seed, 0x1d2c));
  std::int64_t predicted = 0;
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    std::vector<size_t> order(walks.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng.engine());
    double total = 0.0;
    for (size_t b = 0; b < order.size(); b += cfg_.batch_size) {
      std::vector<Walk> batch;
      std::vector<Eigen::MatrixXd> eps;
      for (size_t i = b; i < std::min(order.size(), b + cfg_.batch_size); ++i) {
        const Walk& w = walks[order[i]];
        batch.push_back(w);
        Eigen::MatrixXd e(cfg_.d_z, w.steps.size() - 1);
        for (Eigen::Index c = 0; c < e.cols(); ++c)
          for (int r = 0; r < cfg_.d_z; ++r) e(r, c) = rng.normal();
        eps.push_back(std::move(e));
      }
      std::vector<Eigen::MatrixXd> grads;
      double loss = walk_nll_grad(batch, emb, assign, eps, grads);
      if (!std::isfinite(loss))
        throw std::runtime_error("NaN loss at epoch " + std::to_string(epoch));
      for (auto& g : grads) g /= static_cast<double>(batch.size());
      opt.step(prefs, grads, cfg_.clip_norm);
      total += loss;
    }
    report.epoch_loss.push_back(total / static_cast<double>(walks.size()));
    (void)predicted;
  }
  return report;
}

Eigen::VectorXd InductiveModel::time2vec_eval(double t) const {
  Eigen::VectorXd y(cfg_.d_t);
  y[0] = t2v_omega(0, 0) * t + t2v_zeta(0, 0);
  for (int r = 1; r < cfg_.d_t; ++r)
    y[r] = std::sin(t2v_omega(r, 0) * t + t2v_zeta(r, 0));
  return y;
}

void InductiveModel::lstm_forward(const Eigen::VectorXd& x, Eigen::VectorXd& h0,
                                  Eigen::VectorXd& c0, Eigen::VectorXd& h1,
                                  Eigen::VectorXd& c1) const {
  const int H = cfg_.d_h;
  auto layer = [H](const Eigen::MatrixXd& w, const Eigen::MatrixXd& b,
                   const Eigen::VectorXd& x, Eigen::VectorXd& h, Eigen::VectorXd& c) {
    Eigen::VectorXd xh(x.size() + h.size());
    xh << x, h;
    Eigen::VectorXd z = w * xh + b.col(0);
    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    Eigen::VectorXd i = z.segment(0, H).unaryExpr(sig);
    Eigen::VectorXd f = z.segment(H, H).unaryExpr(sig);
    Eigen::VectorXd g = z.segment(2 * H, H).array().tanh();
    Eigen::VectorXd o = z.segment(3 * H, H).unaryExpr(sig);
    c = f.cwiseProduct(c) + i.cwiseProduct(g);
    h = o.cwiseProduct(c.array().tanh().matrix());
  };
  layer(lstm0_w, lstm0_b, x, h0, c0);
  layer(lstm1_w, lstm1_b, h0, h1, c1);
}

Eigen::VectorXd InductiveModel::cluster_log_posterior(const Eigen::VectorXd& o) const {
  Eigen::VectorXd logits = cluster_head * o;
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return logits.array() - lse;
}

Eigen::VectorXd InductiveModel::sample_z(const Eigen::VectorXd& o, int k,
                                         const Eigen::VectorXd& eps) const {
  if (k < 0 || k >= cfg_.clusters) throw std::out_of_range("cluster index");
  Eigen::VectorXd mu = w_mu_k.middleRows(k * cfg_.d_z, cfg_.d_z) * o;
  Eigen::VectorXd sraw = (w_sig_k.middleRows(k * cfg_.d_z, cfg_.d_z) * o)
                             .cwiseMax(-kSigmaRawClamp)
                             .cwiseMin(kSigmaRawClamp);
  return mu + eps.cwiseProduct(sraw.array().exp().matrix());
}

double InductiveModel::kl_term(const Eigen::VectorXd& o, int k) const {
  Eigen::VectorXd mu = w_mu_k.middleRows(k * cfg_.d_z, cfg_.d_z) * o;
  Eigen::VectorXd sraw = (w_sig_k.middleRows(k * cfg_.d_z, cfg_.d_z) * o)
                             .cwiseMax(-kSigmaRawClamp)
                             .cwiseMin(kSigmaRawClamp);
  double kl = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double s2 = std::exp(2.0 * sraw[i]);
    kl += 0.5 * (mu[i] * mu[i] + s2 - 1.0 - 2.0 * sraw[i]);
  }
  return kl;
}

Walk InductiveModel::generate_walk(const Eigen::VectorXd& seed_emb, double seed_t,
                                   int gen_len, const Eigen::MatrixXd& gen_table,
                                   Rng& rng) const {
  std::vector<Eigen::VectorXd> embs = {seed_emb};
  std::vector<double> times = {seed_t};
  Eigen::VectorXd h0 = Eigen::VectorXd::Zero(cfg_.d_h), c0 = h0, h1 = h0, c1 = h0;
  Eigen::VectorXd cur = seed_emb;
  double t = seed_t;
  while (static_cast<int>(embs.size()) < gen_len) {
    Eigen::VectorXd x(cfg_.d_emb + cfg_.d_t);
    x << embed_w * cur, time2vec_eval(t);
    lstm_forward(x, h0, c0, h1, c1);
    Eigen::VectorXd logp = cluster_log_posterior(h1);
    double u = rng.uniform(), acc = 0.0;
    int k = cfg_.clusters - 1;
    for (int i = 0; i < cfg_.clusters; ++i) {
      acc += std::exp(logp[i]);
      if (u <= acc) {
        k = i;
        break;
      }
    }
    Eigen::VectorXd eps(cfg_.d_z);
    for (int r = 0; r < cfg_.d_z; ++r) eps[r] = rng.normal();
    Eigen::VectorXd z = sample_z(h1, k, eps);
    Eigen::VectorXd mu = w_mu_z * z;
    Eigen::VectorXd sraw =
        (w_sig_z * z).cwiseMax(-kSigmaRawClamp).cwiseMin(kSigmaRawClamp);
    Eigen::VectorXd next(cfg_.d_emb);
    for (int r = 0; r < cfg_.d_emb; ++r)
      next[r] = mu[r] + rng.normal() * std::exp(sraw[r]);
    Eigen::VectorXd feat(cfg_.d_emb + cfg_.d_h);
    feat << embed_w * next, h1;
    MixtureParams mp = mixture_params({mix_mu, mix_sigma, mix_phi}, feat);
    t += sample_dt(mp, rng);
    embs.push_back(next);
    times.push_back(t);
    cur = next;
  }
  Walk w;
  for (size_t i = 0; i < embs.size(); ++i)
    w.steps.push_back({nearest_node(embs[i], gen_table), times[i]});
  return w;
}

std::vector<Walk> InductiveModel::generate_walks(
    const Eigen::MatrixXd& seed_embs, const std::vector<double>& seed_times,
    int gen_len, const Eigen::MatrixXd& gen_table, std::uint64_t seed,
    int threads) const {
  const size_t n = seed_times.size();
  std::vector<Walk> out(n);
  auto worker = [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      Rng rng(split_seed(seed, i));
      out[i] = generate_walk(seed_embs.row(static_cast<Eigen::Index>(i)).transpose(),
                             seed_times[i], gen_len, gen_table, rng);
    }
  };
  if (threads <= 1) {
    worker(0, n);
  } else {
    std::vector<std::thread> pool;
    const size_t chunk = (n + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      size_t lo = w * chunk, hi = std::min(n, lo + chunk);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

Checkpoint InductiveModel::to_checkpoint() const {
  Checkpoint ck;
  auto self = const_cast<InductiveModel*>(this);
  for (const auto& p : self->params()) ck.tensors[p.name] = *p.value;
  ck.meta["mode"] = "inductive";
  ck.meta["walk_len"] = std::to_string(cfg_.walk_len);
  ck.meta["d_emb"] = std::to_string(cfg_.d_emb);
  ck.meta["d_z"] = std::to_string(cfg_.d_z);
  ck.meta["d_t"] = std::to_string(cfg_.d_t);
  ck.meta["d_h"] = std::to_string(cfg_.d_h);
  ck.meta["clusters"] = std::to_string(cfg_.clusters);
  ck.meta["components"] = std::to_string(cfg_.components);
  ck.meta["beta"] = std::to_string(cfg_.beta);
  ck.meta["seed"] = std::to_string(cfg_.seed);
  return ck;
}

InductiveModel InductiveModel::from_checkpoint(const Checkpoint& ck) {
  InductiveConfig cfg;
  cfg.walk_len = std::stoi(ck.meta.at("walk_len"));
  cfg.d_emb = std::stoi(ck.meta.at("d_emb"));
  cfg.d_z = std::stoi(ck.meta.at("d_z"));
  cfg.d_t = std::stoi(ck.meta.at("d_t"));
  cfg.d_h = std::stoi(ck.meta.at("d_h"));
  cfg.clusters = std::stoi(ck.meta.at("clusters"));
  cfg.components = std::stoi(ck.meta.at("components"));
  cfg.beta = std::stod(ck.meta.at("beta"));
  cfg.seed = std::stoull(ck.meta.at("seed"));
  Rng rng(0);
  InductiveModel m(cfg, rng);
  for (const auto& p : m.params()) *p.value = ck.at(p.name);
  return m;
}

double grad_check(InductiveModel& model, const Walk& walk, const Eigen::MatrixXd& emb,
                  const std::vector<int>& assign, const Eigen::MatrixXd& eps,
                  double step) {
  std::vector<Eigen::MatrixXd> grads;
  model.walk_nll_grad({walk}, emb, assign, {eps}, grads);
  auto prefs = model.params();
  double max_err = 0.0;
  for (size_t p = 0; p < prefs.size(); ++p) {
    Eigen::MatrixXd& w = *prefs[p].value;
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        const double orig = w(r, c);
        w(r, c) = orig + step;
        const double up = model.walk_nll(walk, emb, assign, eps);
        w(r, c) = orig - step;
        const double dn = model.walk_nll(walk, emb, assign, eps);
        w(r, c) = orig;
        const double fd = (up - dn) / (2.0 * step);
        const double an = grads[p](r, c);
        // absolute comparison near zero: relative error is meaningless once
        // the true gradient sits at the finite-difference noise floor
        const double denom = std::max(std::fabs(fd), std::fabs(an));
        const double err =
            denom < 1e-3 ? std::fabs(fd - an) : std::fabs(fd - an) / denom;
        max_err = std::max(max_err, err);
      }
  }
  return max_err;
}

}  // namespace tgen
