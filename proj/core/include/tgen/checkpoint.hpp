#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>

namespace tgen {

// Versioned binary container: named row-major float64 tensors plus a
// free-form key=value metadata block.
struct Checkpoint {
  std::map<std::string, Eigen::MatrixXd> tensors;
  std::map<std::string, std::string> meta;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

  const Eigen::MatrixXd& at(const std::string& name) const;
};

}  // namespace tgen
