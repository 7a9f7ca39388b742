#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tgen/autodiff.hpp"
#include "tgen/checkpoint.hpp"
#include "tgen/graph.hpp"
#include "tgen/rng.hpp"
#include "tgen/tpp.hpp"
#include "tgen/walker.hpp"

namespace tgen {

// ---- unsupervised structural node embeddings ----

struct SageConfig {
  int dim = 128;       // embedding dimension (self half + neighborhood half)
  int negatives = 5;   // Q
  int epochs = 50;
  double lr = 0.05;
  std::uint64_t seed = 1;
};

// Representation: self vector stacked on the 1-hop mean of neighbor vectors,
// trained with the sigmoid edge loss and weighted negative sampling.
// neg_weights, when given, is the unnormalized negative distribution P_n.
Eigen::MatrixXd sage_embed(const StaticGraph& gs, const SageConfig& cfg,
                           const Eigen::VectorXd* neg_weights = nullptr);

struct BoostResult {
  Eigen::VectorXd weights;
  std::int64_t false_positives = 0;
};

// One boosting round: non-adjacent pairs whose edge score exceeds
// sim_threshold double both endpoints' negative-sampling weight.
BoostResult boost_negatives(const Eigen::MatrixXd& emb, const StaticGraph& gs,
                            double sim_threshold, Eigen::VectorXd weights);

// Train-and-boost loop: retrains embeddings with the reweighted negatives
// until false positives drop below fp_threshold or max_rounds runs out.
Eigen::MatrixXd sage_embed_boosted(const StaticGraph& gs, const SageConfig& cfg,
                                   double sim_threshold, std::int64_t fp_threshold,
                                   int max_rounds);

// ---- k-means over embeddings ----

struct ClusterModel {
  Eigen::MatrixXd centroids;    // K x d
  std::vector<int> assignment;  // row -> cluster
  double objective = 0.0;       // within-cluster sum of squares
};

ClusterModel kmeans_fit(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                        int max_iter = 100);

// ---- WGAN over the (deduplicated) embedding table ----

struct WganConfig {
  int noise_dim = 64;
  int hidden = 128;
  double clip = 0.01;  // critic weight bound
  double lr = 5e-4;
  int rounds = 50;  // each round: 4 critic epochs then 1 generator epoch
  int batch = 64;
  std::uint64_t seed = 1;
};

struct WganPair {
  // 3-layer MLPs
  Eigen::MatrixXd g_w1, g_b1, g_w2, g_b2, g_w3, g_b3;
  Eigen::MatrixXd d_w1, d_b1, d_w2, d_b2, d_w3, d_b3;
  WganConfig cfg;
  std::vector<double> critic_loss;
};

WganPair wgan_train(const Eigen::MatrixXd& embeddings, const WganConfig& cfg);
Eigen::MatrixXd wgan_sample(const WganPair& pair, int count, std::uint64_t seed);

// exact cosine nearest neighbor, ties to the lowest index
int nearest_node(const Eigen::VectorXd& query, const Eigen::MatrixXd& table);

// ---- the inductive recurrent generative model ----

struct InductiveConfig {
  int walk_len = 20;
  int d_emb = 128;  // node embedding dimension
  int d_z = 128;
  int d_t = 64;
  int d_h = 200;
  int clusters = 300;
  int components = 128;
  double beta = 1e-5;  // KL weight
  double lr = 1e-3;
  int batch_size = 128;
  int epochs = 10;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
};

struct TrainReportI {
  std::vector<double> epoch_loss;
};

class InductiveModel {
 public:
  InductiveModel(const InductiveConfig& cfg, Rng& rng);

  const InductiveConfig& config() const { return cfg_; }
  std::vector<ParamRef> params();

  // NLL of one walk over real node indices; emb rows are node embeddings,
  // assign the k-means labels. eps has one d_z column per predicted
  // position (walk length - 1). END tuples must be stripped beforehand.
  double walk_nll(const Walk& w, const Eigen::MatrixXd& emb,
                  const std::vector<int>& assign, const Eigen::MatrixXd& eps) const;
  double walk_nll_grad(const std::vector<Walk>& batch, const Eigen::MatrixXd& emb,
                       const std::vector<int>& assign,
                       const std::vector<Eigen::MatrixXd>& eps,
                       std::vector<Eigen::MatrixXd>& grads) const;

  TrainReportI train(std::vector<Walk> walks, const Eigen::MatrixXd& emb,
                     const std::vector<int>& assign);

  // closed-form pieces, exposed for tests
  Eigen::VectorXd cluster_log_posterior(const Eigen::VectorXd& o) const;
  Eigen::VectorXd sample_z(const Eigen::VectorXd& o, int k,
                           const Eigen::VectorXd& eps) const;
  double kl_term(const Eigen::VectorXd& o, int k) const;

  // one synthetic walk over generated-node indices: clusters and embeddings
  // are sampled forward, every embedding then matched into gen_table
  Walk generate_walk(const Eigen::VectorXd& seed_emb, double seed_t, int gen_len,
                     const Eigen::MatrixXd& gen_table, Rng& rng) const;
  std::vector<Walk> generate_walks(const Eigen::MatrixXd& seed_embs,
                                   const std::vector<double>& seed_times,
                                   int gen_len, const Eigen::MatrixXd& gen_table,
                                   std::uint64_t seed, int threads = 1) const;

  Checkpoint to_checkpoint() const;
  static InductiveModel from_checkpoint(const Checkpoint& ck);

  Eigen::MatrixXd embed_w;            // d_emb x d_emb
  Eigen::MatrixXd t2v_omega, t2v_zeta;
  Eigen::MatrixXd lstm0_w, lstm0_b, lstm1_w, lstm1_b;
  Eigen::MatrixXd cluster_head;       // K x H
  Eigen::MatrixXd w_mu_k, w_sig_k;    // (K*d_z) x H, per-cluster blocks
  Eigen::MatrixXd w_mu_z, w_sig_z;    // d_emb x d_z
  Eigen::MatrixXd mix_mu, mix_sigma, mix_phi;  // C x (d_emb+H)

 private:
  struct Leaves;
  Tape::Var build_walk_loss(Tape& tape, const Leaves& p, const Walk& w,
                            const Eigen::MatrixXd& emb, const std::vector<int>& assign,
                            const Eigen::MatrixXd& eps) const;
  void lstm_forward(const Eigen::VectorXd& x, Eigen::VectorXd& h0, Eigen::VectorXd& c0,
                    Eigen::VectorXd& h1, Eigen::VectorXd& c1) const;
  Eigen::VectorXd time2vec_eval(double t) const;

  InductiveConfig cfg_;
};

double grad_check(InductiveModel& model, const Walk& walk, const Eigen::MatrixXd& emb,
                  const std::vector<int>& assign, const Eigen::MatrixXd& eps,
                  double step = 1e-5);

}  // namespace tgen
