#pragma once

// Internal tape-building helpers shared by the transductive and inductive
// model translation units.

#include <cmath>

#include "tgen/autodiff.hpp"
#include "tgen/tpp.hpp"

namespace tgen::detail {

constexpr double kLog2PiC = 1.8378770664093453;

inline Tape::Var lstm_layer(Tape& t, Tape::Var w, Tape::Var b, Tape::Var x,
                            Tape::Var& h, Tape::Var& c, int H) {
  Tape::Var z = t.add(t.matmul(w, t.vcat(x, h)), b);
  Tape::Var i = t.sigmoid(t.rows(z, 0, H));
  Tape::Var f = t.sigmoid(t.rows(z, H, H));
  Tape::Var g = t.tanh_(t.rows(z, 2 * H, H));
  Tape::Var o = t.sigmoid(t.rows(z, 3 * H, H));
  c = t.add(t.cmul(f, c), t.cmul(i, g));
  h = t.cmul(o, t.tanh_(c));
  return h;
}

// -log of the log-normal mixture density at dt, parameterized by the three
// affine maps applied to feat
inline Tape::Var mixture_nll(Tape& t, Tape::Var w_mu, Tape::Var w_sigma,
                             Tape::Var w_phi, Tape::Var feat, double dt) {
  Tape::Var mu = t.matmul(w_mu, feat);
  Tape::Var sraw = t.clamp(t.matmul(w_sigma, feat), -kSigmaRawClamp, kSigmaRawClamp);
  Tape::Var plogits = t.matmul(w_phi, feat);
  Tape::Var logphi =
      t.sub(plogits,
            t.matmul(t.constant(Eigen::MatrixXd::Ones(t.value(plogits).rows(), 1)),
                     t.logsumexp(plogits)));
  const double ldt = std::log(dt);
  Tape::Var d = t.adds(t.neg(mu), ldt);  // log dt - mu
  Tape::Var q = t.scale(t.cmul(t.cmul(d, d), t.exp_(t.scale(sraw, -2.0))), 0.5);
  Tape::Var logpdf = t.adds(t.sub(t.neg(sraw), q), -ldt - 0.5 * kLog2PiC);
  return t.neg(t.logsumexp(t.add(logphi, logpdf)));
}

}  // namespace tgen::detail
