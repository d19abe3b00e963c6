#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace condef {

// u_t = D u_xx + f(u) with diagonal positive D. Complex models are carried in
// real component pairs so the spatial-dynamics reversers act by sign flips and
// half-period shifts only.
struct ReactionDiffusionSystem {
  int dimension = 2;
  Eigen::VectorXd D;  // diagonal of the diffusion matrix
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> df;
  std::string name;
};

// Checks D > 0 and that df matches a central finite difference of f at a few
// seeded random points (tolerance 1e-6).
void validate_system(const ReactionDiffusionSystem& sys, unsigned seed = 7);

}  // namespace condef
