#include "condef/ode.hpp"

#include <algorithm>
#include <cmath>

#include "condef/errors.hpp"

namespace condef {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5.0},
    {3.0 / 40.0, 9.0 / 40.0},
    {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0},
    {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0},
    {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0},
    {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0},
};
// 4th-order weights for the embedded error estimate.
constexpr double kB4[7] = {5179.0 / 57600.0, 0.0,           7571.0 / 16695.0, 393.0 / 640.0,
                           -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0};

struct StepResult {
  Vec y_new;
  double err;  // scaled error norm
  Vec k_last;  // FSAL stage
};

StepResult rk_step(const OdeRhs& rhs, double x, const Vec& y, const Vec& k0, double h,
                   const OdeOptions& opts) {
  const int n = static_cast<int>(y.size());
  Vec k[7];
  k[0] = k0;
  Vec yt(n);
  for (int s = 1; s < 7; ++s) {
    yt = y;
    for (int j = 0; j < s; ++j) {
      if (kA[s][j] != 0.0) yt += (h * kA[s][j]) * k[j];
    }
    k[s] = rhs(x + kC[s] * h, yt);
  }
  // FSAL: stage 7 arguments equal the 5th-order solution.
  StepResult out;
  out.y_new = y;
  for (int j = 0; j < 6; ++j) {
    if (kA[6][j] != 0.0) out.y_new += (h * kA[6][j]) * k[j];
  }
  Vec y4 = y;
  for (int j = 0; j < 7; ++j) {
    if (kB4[j] != 0.0) y4 += (h * kB4[j]) * k[j];
  }
  double err = 0.0;
  for (int i = 0; i < n; ++i) {
    const double sc = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(out.y_new[i]));
    const double e = (out.y_new[i] - y4[i]) / sc;
    err += e * e;
  }
  out.err = std::sqrt(err / n);
  out.k_last = k[6];
  return out;
}

double initial_step(const OdeRhs& rhs, double x0, const Vec& y0, const Vec& f0, double dir,
                    double span, const OdeOptions& opts) {
  const double d0 = y0.cwiseAbs().maxCoeff() * opts.rtol + opts.atol;
  const double d1 = f0.cwiseAbs().maxCoeff();
  double h = (d1 > 1e-30) ? 0.01 * d0 / d1 : 1e-6 * span;
  h = std::min(h, 0.1 * span);
  if (h <= 0.0 || !std::isfinite(h)) h = 1e-6 * std::max(span, 1.0);
  // one Euler probe to bound the second derivative
  Vec y1 = y0 + (dir * h) * f0;
  Vec f1 = rhs(x0 + dir * h, y1);
  const double d2 = (f1 - f0).cwiseAbs().maxCoeff() / h;
  if (d2 > 1e-30) h = std::min(h, std::pow(0.01 / d2, 1.0 / 5.0));
  return std::min(h, opts.h_max);
}

}  // namespace

OdeSolution integrate_ode(const OdeRhs& rhs, double x0, const Vec& y0, double x1,
                          const OdeOptions& opts) {
  OdeSolution sol;
  sol.samples.push_back({x0, y0});
  if (x1 == x0) return sol;
  const double dir = (x1 > x0) ? 1.0 : -1.0;
  const double span = std::abs(x1 - x0);

  double x = x0;
  Vec y = y0;
  Vec f = rhs(x, y);
  double h = (opts.h_init > 0.0) ? std::min(opts.h_init, span)
                                 : initial_step(rhs, x0, y0, f, dir, span, opts);

  while (dir * (x1 - x) > 0.0) {
    if (sol.n_steps + sol.n_rejected > opts.max_steps)
      throw SolverError("integrate_ode: step budget exhausted");
    h = std::min(h, std::min(std::abs(x1 - x), opts.h_max));
    StepResult st = rk_step(rhs, x, y, f, dir * h, opts);
    if (!std::isfinite(st.err)) {
      h *= 0.25;
      ++sol.n_rejected;
      if (h < 1e-15 * std::max(1.0, std::abs(x))) throw Blowup("integrate_ode: step size collapsed");
      continue;
    }
    if (st.err <= 1.0) {
      x += dir * h;
      y = st.y_new;
      f = st.k_last;
      sol.samples.push_back({x, y});
      ++sol.n_steps;
      sol.err_estimate += st.err * (opts.atol + opts.rtol * y.cwiseAbs().maxCoeff());
      const double fac = std::clamp(0.9 * std::pow(std::max(st.err, 1e-10), -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      ++sol.n_rejected;
      h *= std::clamp(0.9 * std::pow(st.err, -0.2), 0.1, 0.9);
      if (h < 1e-15 * std::max(1.0, std::abs(x))) throw Blowup("integrate_ode: step size collapsed");
    }
  }
  return sol;
}

EventResult integrate_ode_to_event(const OdeRhs& rhs, double x0, const Vec& y0, double x_max,
                                   const std::function<double(double, const Vec&)>& event,
                                   const OdeOptions& opts) {
  EventResult res;
  res.trajectory.samples.push_back({x0, y0});
  const double dir = (x_max > x0) ? 1.0 : -1.0;
  const double span = std::abs(x_max - x0);

  double x = x0;
  Vec y = y0;
  Vec f = rhs(x, y);
  double e_prev = event(x, y);
  if (std::abs(e_prev) <= opts.event_vtol) {
    res.hit = true;
    res.x_hit = x;
    res.y_hit = y;
    return res;
  }
  double h = (opts.h_init > 0.0) ? std::min(opts.h_init, span)
                                 : initial_step(rhs, x0, y0, f, dir, span, opts);

  auto& sol = res.trajectory;
  while (dir * (x_max - x) > 0.0) {
    if (sol.n_steps + sol.n_rejected > opts.max_steps)
      throw SolverError("integrate_ode_to_event: step budget exhausted");
    h = std::min(h, std::min(std::abs(x_max - x), opts.h_max));
    StepResult st = rk_step(rhs, x, y, f, dir * h, opts);
    if (!std::isfinite(st.err)) {
      h *= 0.25;
      ++sol.n_rejected;
      if (h < 1e-15 * std::max(1.0, std::abs(x))) throw Blowup("integrate_ode_to_event: step collapsed");
      continue;
    }
    if (st.err > 1.0) {
      ++sol.n_rejected;
      h *= std::clamp(0.9 * std::pow(st.err, -0.2), 0.1, 0.9);
      if (h < 1e-15 * std::max(1.0, std::abs(x))) throw Blowup("integrate_ode_to_event: step collapsed");
      continue;
    }
    const double x_new = x + dir * h;
    const double e_new = event(x_new, st.y_new);
    if (e_prev * e_new <= 0.0) {
      // Bisect on x, re-integrating from the bracketing accepted step. Each probe
      // runs the adaptive integrator so accuracy is not limited by interpolation.
      double xa = x, xb = x_new;
      Vec ya = y, yb = st.y_new;
      double ea = e_prev, eb = e_new;
      OdeOptions sub = opts;
      sub.h_init = 0.0;
      for (int it = 0; it < 200; ++it) {
        if (std::abs(eb) <= opts.event_vtol) break;
        if (std::abs(xb - xa) <= opts.event_xtol_abs + opts.event_xtol_rel * std::abs(xb)) break;
        const double xm = 0.5 * (xa + xb);
        if (xm == xa || xm == xb) break;
        Vec ym = integrate_ode(rhs, xa, ya, xm, sub).back().y;
        const double em = event(xm, ym);
        if (ea * em <= 0.0) {
          xb = xm;
          yb = ym;
          eb = em;
        } else {
          xa = xm;
          ya = ym;
          ea = em;
        }
      }
      res.hit = true;
      res.x_hit = xb;
      res.y_hit = yb;
      sol.samples.push_back({xb, yb});
      return res;
    }
    x = x_new;
    y = st.y_new;
    f = st.k_last;
    e_prev = e_new;
    sol.samples.push_back({x, y});
    ++sol.n_steps;
    const double fac = std::clamp(0.9 * std::pow(std::max(st.err, 1e-10), -0.2), 0.2, 5.0);
    h *= fac;
  }
  return res;  // hit=false: event not reached before x_max
}

}  // namespace condef
