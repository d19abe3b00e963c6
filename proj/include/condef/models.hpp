#pragma once

#include <complex>

#include "condef/rd_system.hpp"

namespace condef {

// A_t = D A_xx + (1 + i omega0) A - (1 + i gamma) |A|^2 A in real components.
struct LambdaOmegaParams {
  double omega0 = 1.0;
  double gamma = 0.5;
  Eigen::Vector2d D = Eigen::Vector2d::Ones();
};

// A_t = D A_xx + c1 A + c3 |A|^2 A + c5 |A|^4 A; Re(c5) < 0 keeps the dynamics
// bounded (or c5 = 0 for the cubic limit).
struct CGLQuinticParams {
  std::complex<double> c1{1.0, 1.0};
  std::complex<double> c3{-1.0, -0.5};
  std::complex<double> c5{0.0, 0.0};
  Eigen::Vector2d D = Eigen::Vector2d::Ones();
};

ReactionDiffusionSystem lambda_omega(const LambdaOmegaParams& params);
ReactionDiffusionSystem cgl_quintic(const CGLQuinticParams& params);

// Rotating-wave data of the spatially homogeneous oscillation, available in
// closed form for both built-in models: amplitude r0 and frequency omega_d of
// A = r0 exp(i omega_d t).
struct HomogeneousOscillation {
  double amplitude = 0.0;
  double omega_d = 0.0;
};
HomogeneousOscillation homogeneous_oscillation(const LambdaOmegaParams& params);
HomogeneousOscillation homogeneous_oscillation(const CGLQuinticParams& params);

}  // namespace condef
