#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "tgen/autodiff.hpp"
#include "tgen/checkpoint.hpp"
#include "tgen/rng.hpp"
#include "tgen/tpp.hpp"
#include "tgen/walker.hpp"

namespace tgen {

struct TrainConfig {
  int walk_len = 20;
  int d_v = 100;
  int d_t = 64;
  int d_h = 200;  // hidden size; the rnn output o_i is the top hidden state
  int components = 128;
  double lr = 1e-3;
  int batch_size = 128;
  int epochs = 10;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
};

struct TrainReport {
  std::vector<double> epoch_loss;  // mean per-walk NLL
};

// walks resampled between epochs; return empty to keep the current set
using ResampleHook = std::function<std::vector<Walk>(int epoch)>;

// Node-ID generator: embedding table, Time2Vec, 2-layer LSTM, per-node
// softmax head and a log-normal mixture head over inter-event gaps.
class TransductiveModel {
 public:
  TransductiveModel(int num_nodes, const TrainConfig& cfg, Rng& rng);

  int num_nodes() const { return n_; }
  int vocab() const { return n_ + 1; }  // row n_ is the END sentinel
  int end_index() const { return n_; }
  const TrainConfig& config() const { return cfg_; }

  std::vector<ParamRef> params();

  // teacher-forced negative log-likelihood of one walk (END row included
  // as a node target; END positions carry no time term)
  double walk_nll(const Walk& w) const;
  // same, accumulating parameter gradients aligned with params()
  double walk_nll_grad(const std::vector<Walk>& batch,
                       std::vector<Eigen::MatrixXd>& grads) const;

  TrainReport train(std::vector<Walk> walks, const ResampleHook& resample = nullptr);

  // synthetic walk from one seed tuple; stops at END or gen_len tuples
  Walk generate_walk(const WalkTuple& seed, int gen_len, Rng& rng) const;
  std::vector<Walk> generate_walks(const std::vector<WalkTuple>& seeds,
                                   int gen_len, std::uint64_t seed,
                                   int threads = 1) const;

  Checkpoint to_checkpoint() const;
  static TransductiveModel from_checkpoint(const Checkpoint& ck);

  // forward pieces, exposed for tests
  Eigen::VectorXd time2vec_eval(double t) const;
  Eigen::VectorXd node_log_probs(const Eigen::VectorXd& o) const;
  void lstm_step(const Eigen::VectorXd& x, Eigen::VectorXd& h0, Eigen::VectorXd& c0,
                 Eigen::VectorXd& h1, Eigen::VectorXd& c1) const;
  MixtureParams mixture_at(int next_node, const Eigen::VectorXd& o) const;

  // parameter storage, public for checkpointing and gradient checks
  Eigen::MatrixXd node_table;  // (N+1) x d_v
  Eigen::MatrixXd t2v_omega;   // d_t x 1
  Eigen::MatrixXd t2v_zeta;    // d_t x 1
  Eigen::MatrixXd lstm0_w, lstm0_b;  // 4H x (d_v+d_t+H), 4H x 1
  Eigen::MatrixXd lstm1_w, lstm1_b;  // 4H x (H+H), 4H x 1
  Eigen::MatrixXd node_head;   // (N+1) x H
  Eigen::MatrixXd mix_mu, mix_sigma, mix_phi;  // C x (d_v+H)

 private:
  struct Leaves;
  Tape::Var build_walk_loss(Tape& tape, const Leaves& p, const Walk& w) const;

  int n_;
  TrainConfig cfg_;
};

// Max relative error between analytic gradients and central finite
// differences over every parameter entry. Small configs only.
double grad_check(TransductiveModel& model, const Walk& walk, double step = 1e-5);

}  // namespace tgen
