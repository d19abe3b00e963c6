#pragma once

#include <vector>

#include "condef/ode.hpp"
#include "condef/saddle_field.hpp"

namespace condef {

// Reduced flow on the two-dimensional center manifold in equivariant
// coordinates:  alpha' = y,  y' = omega_star + y^2 + g(y, omega_star).
// alpha is kept as a real lift internally; reduce with alpha_mod when the
// circle-valued coordinate is wanted.
struct CenterTrajectory {
  struct Sample {
    double x;
    double alpha;  // unreduced lift
    double y;
  };
  std::vector<Sample> samples;
  double omega_star = 0.0;

  static double alpha_mod(double alpha_lift);
};

struct PassageReport {
  double L_of_eps = 0.0;   // travel time from y = -delta0 to y = 0
  double alpha_drift = 0.0;  // alpha(0) - alpha(-L)
  double eps = 0.0;
};

CenterTrajectory integrate_center(const SaddleField& field, double omega_star, double alpha0,
                                  double y0, double x_begin, double x_end,
                                  const OdeOptions& opts = {});

// Boundary-anchored construction: integrates backward from (alpha, y) = (0, 0)
// at x = 0 until y = -delta0, which is better conditioned than forward shooting.
PassageReport passage_report(const SaddleField& field, double eps, double delta0);

struct LocalExpansionErrors {
  double err_near_zero = 0.0;      // sup |y - eps^2 x| / (eps^4 x^2), |x| < 1/3
  double err_near_boundary = 0.0;  // boundary expansion residual over its stated bound
};
LocalExpansionErrors local_expansion_check(const SaddleField& field, double eps, double delta0);

struct PhaseDriftFit {
  double slope = 0.0;
  double residual = 0.0;  // rms residual of the linear-in-log-x fit
};
PhaseDriftFit phase_drift_log_check(const SaddleField& field, double x_lo, double x_hi,
                                    double x0 = 1.0, double y0 = -0.9);

// alpha(b) - alpha(a) along the trajectory through (alpha0, y0) at x = a.
double alpha_drift_between(const SaddleField& field, double omega_star, double alpha0, double y0,
                           double a, double b);

}  // namespace condef
