#include "tgen/tpp.hpp"

#include <cmath>
#include <stdexcept>

namespace tgen {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;
}

MixtureParams mixture_params(const MixtureHead& head, const Eigen::VectorXd& feat) {
  if (head.w_mu.cols() != feat.size() || head.w_sigma.cols() != feat.size() ||
      head.w_phi.cols() != feat.size())
    throw std::invalid_argument("mixture head feature dimension mismatch");
  MixtureParams p;
  p.mu = head.w_mu * feat;
  Eigen::VectorXd raw = (head.w_sigma * feat)
                            .cwiseMax(-kSigmaRawClamp)
                            .cwiseMin(kSigmaRawClamp);
  p.sigma = raw.array().exp();
  Eigen::VectorXd logits = head.w_phi * feat;
  const double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).exp();
  p.phi = e / e.sum();
  return p;
}

double mixture_log_prob(const MixtureParams& p, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("gap must be positive");
  const double ldt = std::log(dt);
  const Eigen::Index c = p.mu.size();
  Eigen::VectorXd terms(c);
  for (Eigen::Index i = 0; i < c; ++i) {
    const double s = p.sigma[i];
    const double z = (ldt - p.mu[i]) / s;
    terms[i] = std::log(p.phi[i]) - ldt - std::log(s) - 0.5 * kLog2Pi - 0.5 * z * z;
  }
  const double m = terms.maxCoeff();
  return m + std::log((terms.array() - m).exp().sum());
}

double sample_dt(const MixtureParams& p, Rng& rng) {
  const Eigen::Index c = p.mu.size();
  double u = rng.uniform();
  Eigen::Index k = c - 1;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < c; ++i) {
    acc += p.phi[i];
    if (u <= acc) {
      k = i;
      break;
    }
  }
  const double eps = rng.normal();
  return std::exp(p.sigma[k] * eps + p.mu[k]);
}

double mixture_cdf(const MixtureParams& p, double dt) {
  if (dt <= 0.0) return 0.0;
  const double ldt = std::log(dt);
  double f = 0.0;
  for (Eigen::Index i = 0; i < p.mu.size(); ++i) {
    const double z = (ldt - p.mu[i]) / (p.sigma[i] * std::sqrt(2.0));
    f += p.phi[i] * 0.5 * std::erfc(-z);
  }
  return f;
}

}  // namespace tgen
