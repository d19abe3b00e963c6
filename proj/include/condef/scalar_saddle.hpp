#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "condef/ode.hpp"
#include "condef/saddle_field.hpp"

namespace condef {

enum class Leg { MinusToZero, ZeroToPlus, Full };
enum class TravelTimeMethod { DirectODE, PartialFraction };

struct TravelTimeResult {
  double T = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  Leg leg = Leg::ZeroToPlus;
  TravelTimeMethod method = TravelTimeMethod::DirectODE;
  double err_estimate = 0.0;
};

// Normal form  z' = mu(omega) + z^2 (1 + a(omega)) + z^3 b(omega)  reached from
// y' = omega + y^2 + g(y, omega) through y = Psi(z; omega) with Psi'(0; omega) = 1.
// omega_map absorbs pure-parameter terms of g (identity whenever g(0, omega) = 0,
// in particular for every test field here).
struct NormalForm {
  Eigen::VectorXd a_coeffs;   // a(omega) = sum_j a_coeffs[j] omega^j, a_coeffs[0] = 0
  Eigen::VectorXd b_coeffs;   // b(omega)
  Eigen::VectorXd omega_map;  // mu(omega), omega_map[0] = 0, omega_map[1] = 1
  Eigen::MatrixXd psi;        // psi(i, j): coefficient of z^i omega^j
  int order = 5;              // weighted truncation order (z weight 1, omega weight 2)
  double max_residual_coeff = 0.0;

  double a_at(double omega) const;
  double b_at(double omega) const;
  double mu_at(double omega) const;
  double psi_at(double z, double omega) const;
  double psi_dz_at(double z, double omega) const;
  // delta_tilde solves Psi(dt; omega) = delta by Newton from dt = delta.
  double delta_tilde(double delta, double omega) const;
};

// Normal form with identity Psi for directly prescribed (a, b) polynomials.
NormalForm make_normal_form(const Eigen::VectorXd& a_coeffs, const Eigen::VectorXd& b_coeffs);

struct LogCoefficientEstimate {
  std::vector<std::pair<double, double>> eta_samples;  // (eps, eta_hat)
  double slope_at_zero = 0.0;                          // d eta / d eps at 0
  struct ZetaSample {
    double eps, delta, zeta_hat;
  };
  std::vector<ZetaSample> zeta_samples;
};

struct EpsilonStarResult {
  double L = 0.0;
  double delta = 0.0;
  double epsilon_star = 0.0;
  double residual = 0.0;    // |T(eps*) - L|
  double derivative = 0.0;  // d eps*/dL by centered differences
};

struct AsymptoteReport {
  double sup_weighted = 0.0;  // natural weight for the field (x^2 or x^2/log x)
  double sup_x2 = 0.0;
  double sup_x2_over_log = 0.0;
  bool used_x2_weight = false;
};

// Pieces of the partial-fraction evaluation, exposed for diagnostics: the real
// root u1 of u^3 + u(1+a) + eps*b, the complex pair u2 = conj(u3), the residue
// A1 = u1/(3 u1^2 + 1 + a), the tail integral I1 on [1, inf) and the assembled
// finite part I2, plus the coefficient multiplying log(eps) in eps*T.
struct PartialFractionParts {
  double u1 = 0.0;
  std::complex<double> u2;
  double A1 = 0.0;
  std::complex<double> A2;
  double I1 = 0.0;
  double I2 = 0.0;
  double log_eps_coefficient = 0.0;
  double eps_hat = 0.0;  // sqrt(mu(eps^2))
};

// --- operations ---------------------------------------------------------

// Integrates y' = eps^2 + y^2 + g(y, eps^2) from y(0) = y0 until y = y_target.
// Throws EventNotReached when the target is not attained before x_max.
struct EventIntegration {
  double x_hit = 0.0;
  OdeSolution trajectory;
};
EventIntegration integrate_to_event(const SaddleField& field, double epsilon, double y0,
                                    double y_target, double x_max, const OdeOptions& opts = {});

TravelTimeResult travel_time_direct(const SaddleField& field, double epsilon, double delta,
                                    Leg leg, const OdeOptions& opts = {});

NormalForm fit_normal_form(const SaddleField& field, int order = 5);

TravelTimeResult travel_time_partial_fraction(const NormalForm& nf, double epsilon, double delta,
                                              Leg leg = Leg::ZeroToPlus);
PartialFractionParts partial_fraction_parts(const NormalForm& nf, double epsilon, double delta,
                                            Leg leg = Leg::ZeroToPlus);

LogCoefficientEstimate extract_log_coefficient(const SaddleField& field,
                                               const std::vector<double>& epsilon_grid,
                                               double delta);

EpsilonStarResult solve_epsilon_for_length(const SaddleField& field, double L, double delta,
                                           Leg leg = Leg::MinusToZero);

AsymptoteReport asymptote_check(const SaddleField& field, double x_lo, double x_hi,
                                double x0 = 1.0, double y0 = -0.5);

}  // namespace condef
