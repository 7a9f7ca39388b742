#include "tgen/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace tgen {

Tape::Var Tape::push(Eigen::MatrixXd val, std::function<void(Tape&)> back,
                     bool needs_grad) {
  Node n;
  n.grad = Eigen::MatrixXd::Zero(val.rows(), val.cols());
  n.val = std::move(val);
  n.back = std::move(back);
  n.needs_grad = needs_grad;
  nodes_.push_back(std::move(n));
  return static_cast<Var>(nodes_.size()) - 1;
}

Tape::Var Tape::leaf(const Eigen::MatrixXd& value) { return push(value, nullptr); }

Tape::Var Tape::constant(const Eigen::MatrixXd& value) {
  return push(value, nullptr, false);
}

Tape::Var Tape::scalar(double value) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = value;
  return constant(m);
}

Tape::Var Tape::matmul(Var a, Var b) {
  Var out = push(nodes_[a].val * nodes_[b].val, nullptr);
  nodes_[out].back = [a, b, out](Tape& t) {
    t.grad_mut(a) += t.grad(out) * t.value(b).transpose();
    t.grad_mut(b) += t.value(a).transpose() * t.grad(out);
  };
  return out;
}

Tape::Var Tape::add(Var a, Var b) {
  Var out = push(nodes_[a].val + nodes_[b].val, nullptr);
  nodes_[out].back = [a, b, out](Tape& t) {
    t.grad_mut(a) += t.grad(out);
    t.grad_mut(b) += t.grad(out);
  };
  return out;
}

Tape::Var Tape::sub(Var a, Var b) {
  Var out = push(nodes_[a].val - nodes_[b].val, nullptr);
  nodes_[out].back = [a, b, out](Tape& t) {
    t.grad_mut(a) += t.grad(out);
    t.grad_mut(b) -= t.grad(out);
  };
  return out;
}

Tape::Var Tape::cmul(Var a, Var b) {
  Var out = push(nodes_[a].val.cwiseProduct(nodes_[b].val), nullptr);
  nodes_[out].back = [a, b, out](Tape& t) {
    t.grad_mut(a) += t.grad(out).cwiseProduct(t.value(b));
    t.grad_mut(b) += t.grad(out).cwiseProduct(t.value(a));
  };
  return out;
}

Tape::Var Tape::scale(Var a, double s) {
  Var out = push(nodes_[a].val * s, nullptr);
  nodes_[out].back = [a, s, out](Tape& t) { t.grad_mut(a) += t.grad(out) * s; };
  return out;
}

Tape::Var Tape::adds(Var a, double s) {
  Var out = push(nodes_[a].val.array() + s, nullptr);
  nodes_[out].back = [a, out](Tape& t) { t.grad_mut(a) += t.grad(out); };
  return out;
}

Tape::Var Tape::sigmoid(Var a) {
  Eigen::MatrixXd y =
      nodes_[a].val.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  Var out = push(std::move(y), nullptr);
  nodes_[out].back = [a, out](Tape& t) {
    const auto& y = t.value(out).array();
    t.grad_mut(a).array() += t.grad(out).array() * y * (1.0 - y);
  };
  return out;
}

Tape::Var Tape::tanh_(Var a) {
  Var out = push(nodes_[a].val.array().tanh(), nullptr);
  nodes_[out].back = [a, out](Tape& t) {
    const auto& y = t.value(out).array();
    t.grad_mut(a).array() += t.grad(out).array() * (1.0 - y * y);
  };
  return out;
}

Tape::Var Tape::exp_(Var a) {
  Var out = push(nodes_[a].val.array().exp(), nullptr);
  nodes_[out].back = [a, out](Tape& t) {
    t.grad_mut(a).array() += t.grad(out).array() * t.value(out).array();
  };
  return out;
}

Tape::Var Tape::relu(Var a) {
  Var out = push(nodes_[a].val.cwiseMax(0.0), nullptr);
  nodes_[out].back = [a, out](Tape& t) {
    t.grad_mut(a).array() +=
        t.grad(out).array() * (t.value(a).array() > 0.0).cast<double>();
  };
  return out;
}

Tape::Var Tape::clamp(Var a, double lo, double hi) {
  Var out = push(nodes_[a].val.cwiseMax(lo).cwiseMin(hi), nullptr);
  nodes_[out].back = [a, lo, hi, out](Tape& t) {
    const auto& x = t.value(a).array();
    t.grad_mut(a).array() +=
        t.grad(out).array() * ((x > lo) && (x < hi)).cast<double>();
  };
  return out;
}

Tape::Var Tape::vcat(Var a, Var b) {
  const auto& va = nodes_[a].val;
  const auto& vb = nodes_[b].val;
  Eigen::MatrixXd y(va.rows() + vb.rows(), va.cols());
  y << va, vb;
  Var out = push(std::move(y), nullptr);
  nodes_[out].back = [a, b, out](Tape& t) {
    const auto ra = t.value(a).rows();
    const auto rb = t.value(b).rows();
    t.grad_mut(a) += t.grad(out).topRows(ra);
    t.grad_mut(b) += t.grad(out).bottomRows(rb);
  };
  return out;
}

Tape::Var Tape::rows(Var a, Eigen::Index start, Eigen::Index n) {
  Var out = push(nodes_[a].val.middleRows(start, n), nullptr);
  nodes_[out].back = [a, start, n, out](Tape& t) {
    t.grad_mut(a).middleRows(start, n) += t.grad(out);
  };
  return out;
}

Tape::Var Tape::row_vec(Var a, Eigen::Index r) {
  Var out = push(nodes_[a].val.row(r).transpose(), nullptr);
  nodes_[out].back = [a, r, out](Tape& t) {
    t.grad_mut(a).row(r) += t.grad(out).transpose();
  };
  return out;
}

Tape::Var Tape::sum(Var a) {
  Eigen::MatrixXd y(1, 1);
  y(0, 0) = nodes_[a].val.sum();
  Var out = push(std::move(y), nullptr);
  nodes_[out].back = [a, out](Tape& t) {
    t.grad_mut(a).array() += t.grad(out)(0, 0);
  };
  return out;
}

Tape::Var Tape::mean_cols(Var a) {
  const double n = static_cast<double>(nodes_[a].val.cols());
  Var out = push(nodes_[a].val.rowwise().mean(), nullptr);
  nodes_[out].back = [a, n, out](Tape& t) {
    t.grad_mut(a).colwise() += Eigen::VectorXd(t.grad(out).col(0) / n);
  };
  return out;
}

Tape::Var Tape::logsumexp(Var a) {
  const auto& x = nodes_[a].val;
  if (x.cols() != 1) throw std::invalid_argument("logsumexp expects a column vector");
  const double m = x.maxCoeff();
  Eigen::MatrixXd y(1, 1);
  y(0, 0) = m + std::log((x.array() - m).exp().sum());
  Var out = push(std::move(y), nullptr);
  nodes_[out].back = [a, out](Tape& t) {
    const double lse = t.value(out)(0, 0);
    t.grad_mut(a).array() +=
        t.grad(out)(0, 0) * (t.value(a).array() - lse).exp();
  };
  return out;
}

Tape::Var Tape::pick(Var a, Eigen::Index r) {
  Eigen::MatrixXd y(1, 1);
  y(0, 0) = nodes_[a].val(r, 0);
  Var out = push(std::move(y), nullptr);
  nodes_[out].back = [a, r, out](Tape& t) {
    t.grad_mut(a)(r, 0) += t.grad(out)(0, 0);
  };
  return out;
}

Tape::Var Tape::time2vec(Var omega, Var zeta, double t) {
  const auto& w = nodes_[omega].val;
  const auto& z = nodes_[zeta].val;
  const Eigen::Index d = w.rows();
  Eigen::MatrixXd y(d, 1);
  y(0, 0) = w(0, 0) * t + z(0, 0);
  for (Eigen::Index r = 1; r < d; ++r) y(r, 0) = std::sin(w(r, 0) * t + z(r, 0));
  Var out = push(std::move(y), nullptr);
  nodes_[out].back = [omega, zeta, t, out](Tape& tp) {
    const auto& w = tp.value(omega);
    const auto& z = tp.value(zeta);
    const auto& g = tp.grad(out);
    auto& gw = tp.grad_mut(omega);
    auto& gz = tp.grad_mut(zeta);
    gw(0, 0) += g(0, 0) * t;
    gz(0, 0) += g(0, 0);
    for (Eigen::Index r = 1; r < w.rows(); ++r) {
      const double c = std::cos(w(r, 0) * t + z(r, 0));
      gw(r, 0) += g(r, 0) * c * t;
      gz(r, 0) += g(r, 0) * c;
    }
  };
  return out;
}

void Tape::backward(Var loss) {
  if (nodes_[loss].val.size() != 1)
    throw std::invalid_argument("backward expects a scalar loss");
  nodes_[loss].grad(0, 0) = 1.0;
  for (Var v = loss; v >= 0; --v)
    if (nodes_[v].back && nodes_[v].needs_grad) nodes_[v].back(*this);
}

void Adam::step(const std::vector<ParamRef>& params,
                const std::vector<Eigen::MatrixXd>& grads, double clip_norm) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.push_back(Eigen::MatrixXd::Zero(p.value->rows(), p.value->cols()));
      v_.push_back(Eigen::MatrixXd::Zero(p.value->rows(), p.value->cols()));
    }
  }
  double norm2 = 0.0;
  for (const auto& g : grads) norm2 += g.squaredNorm();
  const double norm = std::sqrt(norm2);
  const double scale = (clip_norm > 0.0 && norm > clip_norm) ? clip_norm / norm : 1.0;

  ++t_;
  const double bc1 = 1.0 - std::pow(b1_, t_);
  const double bc2 = 1.0 - std::pow(b2_, t_);
  for (size_t i = 0; i < params.size(); ++i) {
    Eigen::MatrixXd g = grads[i] * scale;
    m_[i] = b1_ * m_[i] + (1.0 - b1_) * g;
    v_[i] = b2_ * v_[i] + (1.0 - b2_) * g.cwiseProduct(g);
    Eigen::MatrixXd mhat = m_[i] / bc1;
    Eigen::MatrixXd vhat = v_[i] / bc2;
    params[i].value->array() -=
        lr_ * mhat.array() / (vhat.array().sqrt() + eps_);
  }
}

}  // namespace tgen
