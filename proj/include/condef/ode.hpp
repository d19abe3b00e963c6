#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <vector>

namespace condef {

using Vec = Eigen::VectorXd;

// Right-hand side signature: dy/dx = f(x, y).
using OdeRhs = std::function<Vec(double, const Vec&)>;

struct OdeOptions {
  double rtol = 1e-12;
  double atol = 1e-15;
  double h_init = 0.0;    // 0 = choose automatically
  double h_max = std::numeric_limits<double>::infinity();
  long max_steps = 40'000'000;
  // Event localization stops once the x-bracket shrinks below
  // event_xtol_abs + event_xtol_rel*|x| or the event value drops below event_vtol.
  double event_vtol = 1e-15;
  double event_xtol_rel = 1e-13;
  double event_xtol_abs = 1e-300;
};

struct OdeSample {
  double x;
  Vec y;
};

struct OdeSolution {
  std::vector<OdeSample> samples;  // accepted steps, first = initial point
  long n_steps = 0;
  long n_rejected = 0;
  double err_estimate = 0.0;  // accumulated local error proxy

  const OdeSample& back() const { return samples.back(); }
};

struct EventResult {
  bool hit = false;
  double x_hit = 0.0;
  Vec y_hit;
  OdeSolution trajectory;  // up to the event (last sample at x_hit when hit)
};

// Adaptive Dormand-Prince 5(4) over [x0, x1]; x1 < x0 integrates backward.
OdeSolution integrate_ode(const OdeRhs& rhs, double x0, const Vec& y0, double x1,
                          const OdeOptions& opts = {});

// Marches until event(x, y) crosses zero; the crossing is refined by bisection,
// re-integrating from the last accepted step so event accuracy matches the
// integrator tolerance rather than a dense-output interpolant.
EventResult integrate_ode_to_event(const OdeRhs& rhs, double x0, const Vec& y0, double x_max,
                                   const std::function<double(double, const Vec&)>& event,
                                   const OdeOptions& opts = {});

}  // namespace condef
