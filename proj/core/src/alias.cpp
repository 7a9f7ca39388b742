#include "tgen/alias.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace tgen {

AliasTable::AliasTable(const std::vector<double>& probs) {
  const size_t n = probs.size();
  if (n == 0) throw std::invalid_argument("alias table over empty distribution");
  double sum = 0.0;
  for (double p : probs) {
    if (p < 0.0 || !std::isfinite(p)) throw std::invalid_argument("negative probability");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw std::invalid_argument("probabilities must sum to 1");

  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<int> small, large;
  for (size_t i = 0; i < n; ++i) {
    scaled[i] = probs[i] * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<int>(i));
  }
  while (!small.empty() && !large.empty()) {
    int s = small.back(), l = large.back();
    small.pop_back();
    large.pop_back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    (scaled[l] < 1.0 ? small : large).push_back(l);
  }
  for (int i : large) prob_[i] = 1.0, alias_[i] = i;
  for (int i : small) prob_[i] = 1.0, alias_[i] = i;
}

int AliasTable::draw(Rng& rng) const {
  const int n = size();
  const int i = static_cast<int>(rng.index(static_cast<std::uint64_t>(n)));
  return rng.uniform() < prob_[i] ? i : alias_[i];
}

std::vector<double> AliasTable::reconstruct() const {
  const size_t n = prob_.size();
  std::vector<double> p(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    p[i] += prob_[i] / static_cast<double>(n);
    p[alias_[i]] += (1.0 - prob_[i]) / static_cast<double>(n);
  }
  return p;
}

}  // namespace tgen
