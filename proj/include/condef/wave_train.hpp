#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "condef/rd_system.hpp"

namespace condef {

// Spatially homogeneous oscillation P(tau), 2*pi-periodic, solving
// omega_d P_tau = f(P) by Fourier collocation on M = 2*N_tau points.
struct WaveTrain {
  Eigen::MatrixXd samples;   // d x M grid values
  Eigen::MatrixXcd coeffs;   // d x M spectral coefficients, mode n at column n + M/2
  double omega_d = 0.0;
  double residual = 0.0;     // collocation residual, inf norm
  double phase_value = 0.0;  // phase condition at the solution
  int N_tau = 0;
  std::vector<double> newton_residuals;

  int M() const { return static_cast<int>(samples.cols()); }
  Eigen::VectorXd at(double tau) const;          // trigonometric interpolation
  Eigen::VectorXd dtau_at(double tau) const;     // derivative interpolation
  WaveTrain translated(double alpha) const;      // samples of P(tau + alpha)
};

struct DispersionData {
  std::vector<std::pair<double, double>> omega_nl_samples;  // (k, omega_nl(k))
  double omega_nl_pp0 = 0.0;
  std::vector<std::pair<double, std::complex<double>>> lambda_lin_samples;  // (l, lambda)
  double lambda_lin_pp0 = 0.0;
  bool has_omega = false;
  bool has_lambda = false;
};

struct HypothesisReport {
  int zero_multiplicity = 0;     // algebraic multiplicity of the zero spatial eigenvalue
  double spectral_gap = 0.0;     // distance of the remaining spectrum to the imaginary axis
  bool omega_nl_pp0_nonzero = false;
  bool lambda_lin_pp0_nonzero = false;
  bool reversers_verified = false;
  bool h2_pass = false;
  bool h5_pass = false;
  double omega_nl_pp0 = 0.0;
  double lambda_lin_pp0 = 0.0;
};

WaveTrain find_wave_train(const ReactionDiffusionSystem& system,
                          const std::function<Eigen::VectorXd(double)>& guess, int N_tau);
WaveTrain find_wave_train(const ReactionDiffusionSystem& system, const Eigen::MatrixXd& guess,
                          double omega_guess);

// Wave-train family u = P(omega t - k x): solves omega P' = k^2 D P'' + f(P)
// along the (symmetric) k grid by continuation from the k = 0 train.
DispersionData nonlinear_dispersion(const ReactionDiffusionSystem& system, const WaveTrain& wt,
                                    const std::vector<double>& k_grid);

// Floquet exponents of v_tau = (1/omega_d)(-l^2 D + f'(P(tau))) v, branch through
// lambda(0) = 0, reported per unit t.
DispersionData linear_dispersion(const ReactionDiffusionSystem& system, const WaveTrain& wt,
                                 const std::vector<double>& l_grid);

HypothesisReport check_hypotheses(const ReactionDiffusionSystem& system, const WaveTrain& wt,
                                  const std::optional<DispersionData>& dispersion = std::nullopt);

// Discretized spatial-dynamics right-hand side G(u, v; omega) acting on stacked
// grid values ((u, v) each d x M); used by the reverser checks and tests.
Eigen::VectorXd spatial_rhs(const ReactionDiffusionSystem& system, const Eigen::VectorXd& uv,
                            double omega, int M);

}  // namespace condef
