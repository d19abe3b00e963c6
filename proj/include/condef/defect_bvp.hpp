#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "condef/rd_system.hpp"
#include "condef/wave_train.hpp"

namespace condef {

enum class Reverser { R0, Rpi };

// Symmetric uniform grid on [-L, L], Fourier collocation in tau with
// M = 2*N_tau points and 4th-order centered differences in x.
struct SpaceTimeGrid {
  double L = 0.0;
  int N_x = 0;
  int N_tau = 0;
  Eigen::VectorXd x_nodes;

  static SpaceTimeGrid make(double L, int N_x, int N_tau);
  int M() const { return 2 * N_tau; }
  double h() const { return x_nodes(1) - x_nodes(0); }
};

// Solution of the truncated boundary-value problem: omega u_tau = D u_xx + f(u)
// on [-L, L] x S^1 with u_x(+-L, tau) = 0 and the frequency omega selected by
// the phase condition.
struct TruncatedDefect {
  SpaceTimeGrid grid;
  int d = 0;
  Eigen::VectorXd U;      // flat, index (i*M + j)*d + c
  Eigen::VectorXd U_ref;  // phase reference used by the solve
  double omega = 0.0;
  double residual_norm = 0.0;
  int newton_iters = 0;
  std::vector<double> newton_residuals;

  int index(int i, int j, int c) const { return (i * grid.M() + j) * d + c; }
  Eigen::MatrixXd node(int i) const;            // d x M slice at x_i
  Eigen::VectorXd value(int i, int j) const;    // d-vector at (x_i, tau_j)
};

struct PhaseCoordinates {
  std::vector<double> x_samples;
  std::vector<double> alpha_L;        // lifted phase
  std::vector<double> y_L;            // d alpha_L / dx
  std::vector<double> fit_residuals;  // rms distance to the fitted translate
};

struct ScalingReport {
  struct FamilyEntry {
    double L, epsilon_star, omega;
  };
  std::vector<FamilyEntry> family;
  double fitted_constant = 0.0;      // limit of eps* L
  double fitted_exponent = 0.0;      // log-log slope of eps*(L)
  double derivative_match = 0.0;     // max rel. deviation of d eps*/dL from -const/L^2
  std::vector<std::pair<double, double>> distance_to_reference;         // per-x-infimum flavor
  std::vector<std::pair<double, double>> distance_to_reference_global;  // single-alpha flavor
  double distance_exponent = 0.0;    // log-log slope of the per-x-infimum distances
  std::vector<std::pair<double, double>> y_diff_max;  // (L, max|y - y_L|)
  double y_diff_exponent = 0.0;
  std::vector<std::pair<double, double>> alpha_sup_diff;  // (L, max|alpha - alpha_L|)
  std::vector<std::pair<double, double>> phase_drift;     // (L, |alpha_L(L) - alpha_L(0)|)
  double phase_drift_slope = 0.0;    // slope of drift vs log L
  double phase_drift_residual = 0.0;
  double unfolding_sign = 0.0;
};

struct NewtonOptions {
  int max_iters = 30;
  double tol = 1e-9;          // inf-norm residual target
  int max_backtracks = 8;
  // observer(iter, U, omega, residual) after each accepted iterate
  std::function<void(int, const Eigen::VectorXd&, double, const Eigen::VectorXd&)> observer;
};

// Phase-jump ansatz U0(x, tau) = P(tau + theta(x)) with theta a smoothstep of
// total variation `jump` over [-width, width] (exactly constant outside, so the
// Neumann rows hold at the initial iterate). core_dip > 0 additionally scales
// the profile through tanh(x/core_dip), which makes a jump = pi ansatz exactly
// R_pi-symmetric; the default keeps the plain phase ansatz.
Eigen::VectorXd build_initial_guess(const WaveTrain& wt, const SpaceTimeGrid& grid, double jump,
                                    double width, double core_dip = 0.0);

// Residual of the discretized system: interior collocation rows, one-sided
// Neumann rows at i = 0 and i = N_x-1, and the appended phase row.
Eigen::VectorXd assemble_residual(const ReactionDiffusionSystem& system, const SpaceTimeGrid& grid,
                                  const Eigen::VectorXd& U, double omega,
                                  const Eigen::VectorXd& U_ref);

TruncatedDefect newton_solve(const ReactionDiffusionSystem& system, const SpaceTimeGrid& grid,
                             const Eigen::VectorXd& U0, double omega0,
                             const NewtonOptions& opts = {});

// Re-grids the previous solution onto each L of the schedule (interpolating in
// x, padding beyond the old domain with the boundary slice) and re-converges.
std::vector<TruncatedDefect> continue_in_L(const ReactionDiffusionSystem& system,
                                           const TruncatedDefect& defect,
                                           const std::vector<double>& L_schedule,
                                           const NewtonOptions& opts = {});

PhaseCoordinates extract_phase_coordinates(const TruncatedDefect& defect, const WaveTrain& wt);

// sup over the grid of the reverser mismatch, on u together with the matching
// sign condition on u_x.
double check_reversibility(const TruncatedDefect& defect, Reverser reverser);

// Optimal tau-translate alignment; returns (alpha_hat, minimized sup-distance).
std::pair<double, double> check_uniqueness_mod_translation(const TruncatedDefect& d1,
                                                           const TruncatedDefect& d2);

// Scaling laws of the family: eps*(L) exponent and constant, derivative law,
// distance to the largest member, |y - y_L| decay and logarithmic phase drift.
ScalingReport verify_theorem1(const std::vector<TruncatedDefect>& family, const WaveTrain& wt,
                              double unfolding_sign);

// Fits shared with the scalar surrogate path: eps*(L) exponent / constant from
// (L, eps*) pairs alone.
struct EpsilonScalingFit {
  double exponent = 0.0;
  double constant = 0.0;  // extrapolated eps* L
};
EpsilonScalingFit fit_epsilon_scaling(const std::vector<std::pair<double, double>>& L_eps);

// Smallest singular value of the bordered Jacobian at the solution (inverse
// power iteration through the sparse factorization).
double jacobian_smallest_singular_value(const ReactionDiffusionSystem& system,
                                        const TruncatedDefect& defect);

// Applies the tau-translation T_alpha spectrally to a stored defect state.
Eigen::VectorXd translate_state(const SpaceTimeGrid& grid, int d, const Eigen::VectorXd& U,
                                double alpha);

}  // namespace condef
