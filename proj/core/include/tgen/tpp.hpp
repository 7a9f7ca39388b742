#pragma once

#include <Eigen/Dense>

#include "tgen/rng.hpp"

namespace tgen {

// Conditional log-normal mixture over inter-event gaps.
struct MixtureParams {
  Eigen::VectorXd mu;      // log-space means
  Eigen::VectorXd sigma;   // strictly positive
  Eigen::VectorXd phi;     // weights, sum to 1
};

// Three affine maps from the concatenated (node feature, rnn output) vector.
struct MixtureHead {
  Eigen::MatrixXd w_mu;     // C x (d_feat)
  Eigen::MatrixXd w_sigma;  // C x (d_feat)
  Eigen::MatrixXd w_phi;    // C x (d_feat)
};

constexpr double kSigmaRawClamp = 10.0;  // raw log-sigma bound before exp
constexpr double kMinDt = 1e-6;          // observed gaps clamp, keeps log finite

MixtureParams mixture_params(const MixtureHead& head, const Eigen::VectorXd& feat);

// log of the mixture density at dt > 0, via log-sum-exp over components
double mixture_log_prob(const MixtureParams& p, double dt);

// component c ~ Categorical(phi), eps ~ N(0,1), dt = exp(sigma_c eps + mu_c)
double sample_dt(const MixtureParams& p, Rng& rng);

// analytic mixture CDF, used by distribution tests
double mixture_cdf(const MixtureParams& p, double dt);

}  // namespace tgen
