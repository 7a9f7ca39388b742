#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace tgen {

// Reverse-mode tape over Eigen matrices. Build the graph forward with the
// op methods, call backward() on a 1x1 loss node, then read grad().
class Tape {
 public:
  using Var = int;

  Var leaf(const Eigen::MatrixXd& value);
  Var constant(const Eigen::MatrixXd& value);
  Var scalar(double value);

  const Eigen::MatrixXd& value(Var v) const { return nodes_[v].val; }
  const Eigen::MatrixXd& grad(Var v) const { return nodes_[v].grad; }

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var cmul(Var a, Var b);
  Var scale(Var a, double s);
  Var adds(Var a, double s);  // elementwise a + s
  Var neg(Var a) { return scale(a, -1.0); }
  Var sigmoid(Var a);
  Var tanh_(Var a);
  Var exp_(Var a);
  Var relu(Var a);
  Var clamp(Var a, double lo, double hi);  // gradient passes inside the range
  Var vcat(Var a, Var b);                  // stack column vectors
  Var rows(Var a, Eigen::Index start, Eigen::Index n);
  Var row_vec(Var a, Eigen::Index r);      // row r as a column vector
  Var sum(Var a);                          // 1x1
  Var mean_cols(Var a);
  Var logsumexp(Var a);                    // over a column vector, 1x1
  Var pick(Var a, Eigen::Index r);         // element (r, 0) as 1x1
  // one linear component then sinusoids: [w0 t + z0, sin(w_r t + z_r)...]
  Var time2vec(Var omega, Var zeta, double t);

  void backward(Var loss);
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Eigen::MatrixXd val;
    Eigen::MatrixXd grad;
    std::function<void(Tape&)> back;
    bool needs_grad = true;
  };
  Var push(Eigen::MatrixXd val, std::function<void(Tape&)> back, bool needs_grad = true);
  std::vector<Node> nodes_;

  friend struct TapeAccess;
  Eigen::MatrixXd& grad_mut(Var v) { return nodes_[v].grad; }
};

// Named parameter registry shared by the models and the optimizer.
struct ParamRef {
  std::string name;
  Eigen::MatrixXd* value;
};

class Adam {
 public:
  Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}
  // grads aligned with params; applies one step with global norm clipping
  void step(const std::vector<ParamRef>& params,
            const std::vector<Eigen::MatrixXd>& grads, double clip_norm = 5.0);

 private:
  double lr_, b1_, b2_, eps_;
  int t_ = 0;
  std::vector<Eigen::MatrixXd> m_, v_;
};

}  // namespace tgen
