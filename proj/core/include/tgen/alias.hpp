#pragma once

#include <vector>

#include "tgen/rng.hpp"

namespace tgen {

// Vose alias table over a fixed discrete distribution; draws are O(1).
class AliasTable {
 public:
  explicit AliasTable(const std::vector<double>& probs);

  int draw(Rng& rng) const;
  int size() const { return static_cast<int>(prob_.size()); }

  // per-outcome probability implied by the table, for verification
  std::vector<double> reconstruct() const;

 private:
  std::vector<double> prob_;
  std::vector<int> alias_;
};

}  // namespace tgen
