#pragma once

#include <Eigen/Dense>

#include <vector>

#include "polyact/netmodel.hpp"

namespace oracle {

// Plain loop forward pass. Unpacks c from the documented layout on its own:
// (c_{1,1..d_1}, ..., c_{D-1,1..}, c_{D,0}, c_{D,1..d_D}), constants 1 before the last layer.
inline Eigen::VectorXd forward(const polyact::NetworkSpec& net, const Eigen::VectorXd& c, const Eigen::VectorXd& x) {
  const auto& degs = net.act_degrees();
  const int D = static_cast<int>(degs.size());
  Eigen::VectorXd h = x;
  Eigen::Index pos = 0;
  for (int l = 0; l < D; ++l) {
    std::vector<double> coef(static_cast<std::size_t>(degs[l]) + 1, 1.0);
    if (l == D - 1) coef[0] = c[pos++];
    for (int j = 1; j <= degs[l]; ++j) coef[static_cast<std::size_t>(j)] = c[pos++];
    const Eigen::VectorXd v = net.weights()[static_cast<std::size_t>(l)] * h;
    h.resize(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      double acc = 0.0;
      for (auto it = coef.rbegin(); it != coef.rend(); ++it) acc = acc * v[i] + *it;
      h[i] = acc;
    }
  }
  return net.weights().back() * h;
}

}  // namespace oracle
