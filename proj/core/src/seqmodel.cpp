#include "tgen/seqmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "model_ops.hpp"

namespace tgen {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;

Eigen::MatrixXd glorot(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = (2.0 * rng.uniform() - 1.0) * s;
  return m;
}
}  // namespace

TransductiveModel::TransductiveModel(int num_nodes, const TrainConfig& cfg, Rng& rng)
    : n_(num_nodes), cfg_(cfg) {
  const int H = cfg.d_h;
  node_table = glorot(n_ + 1, cfg.d_v, rng);
  t2v_omega = glorot(cfg.d_t, 1, rng);
  t2v_zeta = glorot(cfg.d_t, 1, rng);
  lstm0_w = glorot(4 * H, cfg.d_v + cfg.d_t + H, rng);
  lstm0_b = Eigen::MatrixXd::Zero(4 * H, 1);
  lstm1_w = glorot(4 * H, 2 * H, rng);
  lstm1_b = Eigen::MatrixXd::Zero(4 * H, 1);
  node_head = glorot(n_ + 1, H, rng);
  mix_mu = glorot(cfg.components, cfg.d_v + H, rng);
  mix_sigma = glorot(cfg.components, cfg.d_v + H, rng);
  mix_phi = glorot(cfg.components, cfg.d_v + H, rng);
}

std::vector<ParamRef> TransductiveModel::params() {
  return {
      {"node_table", &node_table}, {"t2v_omega", &t2v_omega},
      {"t2v_zeta", &t2v_zeta},     {"lstm0_w", &lstm0_w},
      {"lstm0_b", &lstm0_b},       {"lstm1_w", &lstm1_w},
      {"lstm1_b", &lstm1_b},       {"node_head", &node_head},
      {"mix_mu", &mix_mu},         {"mix_sigma", &mix_sigma},
      {"mix_phi", &mix_phi},
  };
}

struct TransductiveModel::Leaves {
  Tape::Var node_table, omega, zeta, l0w, l0b, l1w, l1b, head, mu, sigma, phi;
  static Leaves make(Tape& t, const TransductiveModel& m) {
    return {t.leaf(m.node_table), t.leaf(m.t2v_omega), t.leaf(m.t2v_zeta),
            t.leaf(m.lstm0_w),    t.leaf(m.lstm0_b),   t.leaf(m.lstm1_w),
            t.leaf(m.lstm1_b),    t.leaf(m.node_head), t.leaf(m.mix_mu),
            t.leaf(m.mix_sigma),  t.leaf(m.mix_phi)};
  }
};

namespace {
using detail::lstm_layer;
using detail::mixture_nll;

struct LstmVars {
  Tape::Var h0, c0, h1, c1;
};

}  // namespace

Tape::Var TransductiveModel::build_walk_loss(Tape& tape, const Leaves& p,
                                             const Walk& w) const {
  if (w.steps.size() < 2) throw std::invalid_argument("walk too short");
  const int H = cfg_.d_h;
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(H, 1);
  LstmVars s{tape.constant(zero), tape.constant(zero), tape.constant(zero),
             tape.constant(zero)};
  Tape::Var loss = tape.scalar(0.0);
  for (size_t i = 1; i < w.steps.size(); ++i) {
    const WalkTuple& prev = w.steps[i - 1];
    const WalkTuple& cur = w.steps[i];
    if (prev.v == kEndSentinel)
      throw std::invalid_argument("END sentinel must be terminal");
    if (prev.v < 0 || prev.v >= n_) throw std::out_of_range("node index out of range");
    Tape::Var x = tape.vcat(tape.row_vec(p.node_table, prev.v),
                            tape.time2vec(p.omega, p.zeta, prev.t));
    Tape::Var h0 = lstm_layer(tape, p.l0w, p.l0b, x, s.h0, s.c0, H);
    Tape::Var o = lstm_layer(tape, p.l1w, p.l1b, h0, s.h1, s.c1, H);
    if (cur.v != kEndSentinel && (cur.v < 0 || cur.v >= n_))
      throw std::out_of_range("node index out of range");
    // node term
    const int target = cur.v == kEndSentinel ? n_ : cur.v;
    Tape::Var logits = tape.matmul(p.head, o);
    loss = tape.add(loss, tape.sub(tape.logsumexp(logits), tape.pick(logits, target)));
    // time term (END carries node NLL only)
    if (cur.v != kEndSentinel) {
      if (cur.t <= prev.t) throw std::invalid_argument("non-increasing walk timestamps");
      const double dt = std::max(cur.t - prev.t, kMinDt);
      Tape::Var feat = tape.vcat(tape.row_vec(p.node_table, cur.v), o);
      loss = tape.add(loss, mixture_nll(tape, p.mu, p.sigma, p.phi, feat, dt));
    }
  }
  return loss;
}

double TransductiveModel::walk_nll(const Walk& w) const {
  Tape tape;
  Leaves p = Leaves::make(tape, *this);
  return tape.value(build_walk_loss(tape, p, w))(0, 0);
}

double TransductiveModel::walk_nll_grad(const std::vector<Walk>& batch,
                                        std::vector<Eigen::MatrixXd>& grads) const {
  Tape tape;
  Leaves p = Leaves::make(tape, *this);
  Tape::Var loss = tape.scalar(0.0);
  for (const auto& w : batch) loss = tape.add(loss, build_walk_loss(tape, p, w));
  tape.backward(loss);
  const Tape::Var leaf_ids[] = {p.node_table, p.omega, p.zeta, p.l0w, p.l0b,
                                p.l1w,        p.l1b,   p.head, p.mu,  p.sigma,
                                p.phi};
  grads.clear();
  for (Tape::Var v : leaf_ids) grads.push_back(tape.grad(v));
  return tape.value(loss)(0, 0);
}

TrainReport TransductiveModel::train(std::vector<Walk> walks,
                                     const ResampleHook& resample) {
  if (walks.empty()) throw std::invalid_argument("empty walk set");
  TrainReport report;
  Adam opt(cfg_.lr);
  auto prefs = params();
  Rng rng(split_seed(cfg_.seed, 0x7ea1));
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    if (resample && epoch > 0) {
      auto fresh = resample(epoch);
      if (!fresh.empty()) walks = std::move(fresh);
    }
    std::vector<size_t> order(walks.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng.engine());
    double total = 0.0;
    for (size_t b = 0; b < order.size(); b += cfg_.batch_size) {
      std::vector<Walk> batch;
      for (size_t i = b; i < std::min(order.size(), b + cfg_.batch_size); ++i)
        batch.push_back(walks[order[i]]);
      std::vector<Eigen::MatrixXd> grads;
      double loss = walk_nll_grad(batch, grads);
      if (!std::isfinite(loss))
        throw std::runtime_error("NaN loss at epoch " + std::to_string(epoch));
      for (auto& g : grads) g /= static_cast<double>(batch.size());
      opt.step(prefs, grads, cfg_.clip_norm);
      total += loss;
    }
    report.epoch_loss.push_back(total / static_cast<double>(walks.size()));
  }
  return report;
}

Eigen::VectorXd TransductiveModel::time2vec_eval(double t) const {
  Eigen::VectorXd y(cfg_.d_t);
  y[0] = t2v_omega(0, 0) * t + t2v_zeta(0, 0);
  for (int r = 1; r < cfg_.d_t; ++r)
    y[r] = std::sin(t2v_omega(r, 0) * t + t2v_zeta(r, 0));
  return y;
}

void TransductiveModel::lstm_step(const Eigen::VectorXd& x, Eigen::VectorXd& h0,
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

Eigen::VectorXd TransductiveModel::node_log_probs(const Eigen::VectorXd& o) const {
  Eigen::VectorXd logits = node_head * o;
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return logits.array() - lse;
}

MixtureParams TransductiveModel::mixture_at(int next_node,
                                            const Eigen::VectorXd& o) const {
  Eigen::VectorXd feat(cfg_.d_v + cfg_.d_h);
  feat << node_table.row(next_node).transpose(), o;
  return mixture_params({mix_mu, mix_sigma, mix_phi}, feat);
}

Walk TransductiveModel::generate_walk(const WalkTuple& seed, int gen_len,
                                      Rng& rng) const {
  Walk w;
  w.steps.push_back(seed);
  Eigen::VectorXd h0 = Eigen::VectorXd::Zero(cfg_.d_h), c0 = h0, h1 = h0, c1 = h0;
  int v = seed.v;
  double t = seed.t;
  while (static_cast<int>(w.steps.size()) < gen_len) {
    Eigen::VectorXd x(cfg_.d_v + cfg_.d_t);
    x << node_table.row(v).transpose(), time2vec_eval(t);
    lstm_step(x, h0, c0, h1, c1);
    Eigen::VectorXd logp = node_log_probs(h1);
    // multinomial draw over the node vocabulary (END included)
    double u = rng.uniform(), acc = 0.0;
    int next = vocab() - 1;
    for (int i = 0; i < vocab(); ++i) {
      acc += std::exp(logp[i]);
      if (u <= acc) {
        next = i;
        break;
      }
    }
    if (next == end_index()) break;
    MixtureParams mp = mixture_at(next, h1);
    const double dt = sample_dt(mp, rng);
    v = next;
    t = t + dt;
    w.steps.push_back({v, t});
  }
  return w;
}

std::vector<Walk> TransductiveModel::generate_walks(
    const std::vector<WalkTuple>& seeds, int gen_len, std::uint64_t seed,
    int threads) const {
  std::vector<Walk> out(seeds.size());
  auto worker = [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      Rng rng(split_seed(seed, i));
      out[i] = generate_walk(seeds[i], gen_len, rng);
    }
  };
  if (threads <= 1) {
    worker(0, seeds.size());
  } else {
    std::vector<std::thread> pool;
    const size_t chunk = (seeds.size() + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      size_t lo = w * chunk, hi = std::min(seeds.size(), lo + chunk);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

Checkpoint TransductiveModel::to_checkpoint() const {
  Checkpoint ck;
  auto self = const_cast<TransductiveModel*>(this);
  for (const auto& p : self->params()) ck.tensors[p.name] = *p.value;
  ck.meta["mode"] = "transductive";
  ck.meta["num_nodes"] = std::to_string(n_);
  ck.meta["walk_len"] = std::to_string(cfg_.walk_len);
  ck.meta["d_v"] = std::to_string(cfg_.d_v);
  ck.meta["d_t"] = std::to_string(cfg_.d_t);
  ck.meta["d_h"] = std::to_string(cfg_.d_h);
  ck.meta["components"] = std::to_string(cfg_.components);
  ck.meta["seed"] = std::to_string(cfg_.seed);
  return ck;
}

TransductiveModel TransductiveModel::from_checkpoint(const Checkpoint& ck) {
  TrainConfig cfg;
  cfg.walk_len = std::stoi(ck.meta.at("walk_len"));
  cfg.d_v = std::stoi(ck.meta.at("d_v"));
  cfg.d_t = std::stoi(ck.meta.at("d_t"));
  cfg.d_h = std::stoi(ck.meta.at("d_h"));
  cfg.components = std::stoi(ck.meta.at("components"));
  cfg.seed = std::stoull(ck.meta.at("seed"));
  const int n = std::stoi(ck.meta.at("num_nodes"));
  Rng rng(0);
  TransductiveModel m(n, cfg, rng);
  for (const auto& p : m.params()) *p.value = ck.at(p.name);
  return m;
}

double grad_check(TransductiveModel& model, const Walk& walk, double step) {
  std::vector<Eigen::MatrixXd> grads;
  model.walk_nll_grad({walk}, grads);
  auto prefs = model.params();
  double max_err = 0.0;
  for (size_t p = 0; p < prefs.size(); ++p) {
    Eigen::MatrixXd& w = *prefs[p].value;
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        const double orig = w(r, c);
        w(r, c) = orig + step;
        const double up = model.walk_nll(walk);
        w(r, c) = orig - step;
        const double dn = model.walk_nll(walk);
        w(r, c) = orig;
        const double fd = (up - dn) / (2.0 * step);
        const double an = grads[p](r, c);
        // absolute comparison near zero: relative error is meaningless once
        // the true gradient sits at the finite-difference noise floor
        const double denom = std::max(std::fabs(fd), std::fabs(an));
        const double err = denom < 1e-3 ? std::fabs(fd - an)
                                        : std::fabs(fd - an) / denom;
        max_err = std::max(max_err, err);
      }
  }
  return max_err;
}

}  // namespace tgen
