#include "condef/center_flow.hpp"

#include <cmath>

#include "condef/errors.hpp"
#include "condef/numerics.hpp"

namespace condef {

namespace {

OdeRhs center_rhs(const SaddleField& field, double omega_star) {
  return [&field, omega_star](double, const Vec& s) {
    Vec ds(2);
    ds(0) = s(1);
    ds(1) = omega_star + s(1) * s(1) + field.g(s(1), omega_star);
    return ds;
  };
}

}  // namespace

double CenterTrajectory::alpha_mod(double alpha_lift) {
  double a = std::fmod(alpha_lift, 2.0 * M_PI);
  if (a < 0.0) a += 2.0 * M_PI;
  return a;
}

CenterTrajectory integrate_center(const SaddleField& field, double omega_star, double alpha0,
                                  double y0, double x_begin, double x_end,
                                  const OdeOptions& opts) {
  if (std::abs(y0) > 2.0 * field.delta0)
    throw DomainError("integrate_center: start outside the validity window");
  Vec s(2);
  s(0) = alpha0;
  s(1) = y0;
  const double bound = 2.0 * field.delta0;
  // guard: abort once y leaves the chart
  auto rhs = center_rhs(field, omega_star);
  auto guarded = [&rhs, bound](double x, const Vec& v) {
    if (std::abs(v(1)) > bound * (1.0 + 1e-9)) throw Blowup("integrate_center: y left the chart");
    return rhs(x, v);
  };
  OdeSolution sol = integrate_ode(guarded, x_begin, s, x_end, opts);
  CenterTrajectory traj;
  traj.omega_star = omega_star;
  traj.samples.reserve(sol.samples.size());
  for (const auto& smp : sol.samples) traj.samples.push_back({smp.x, smp.y(0), smp.y(1)});
  return traj;
}

PassageReport passage_report(const SaddleField& field, double eps, double delta0) {
  if (!(eps > 0.0) || eps > field.eps0) throw DomainError("passage_report: eps outside (0, eps0]");
  const double omega_star = eps * eps;
  Vec s(2);
  s(0) = 0.0;
  s(1) = 0.0;
  auto rhs = center_rhs(field, omega_star);
  auto ev = [delta0](double, const Vec& v) { return v(1) + delta0; };
  const double x_min = -(8.0 / eps + 100.0);
  EventResult r = integrate_ode_to_event(rhs, 0.0, s, x_min, ev);
  if (!r.hit) throw EventNotReached("passage_report: y = -delta0 not reached");
  PassageReport rep;
  rep.eps = eps;
  rep.L_of_eps = -r.x_hit;
  rep.alpha_drift = 0.0 - r.y_hit(0);  // alpha(0) - alpha(-L)
  return rep;
}

LocalExpansionErrors local_expansion_check(const SaddleField& field, double eps, double delta0) {
  LocalExpansionErrors out;
  const double omega_star = eps * eps;
  auto rhs = center_rhs(field, omega_star);

  // near x = 0 with y(0) = 0: compare against eps^2 x on |x| < 1/3
  {
    Vec s(2);
    s(0) = 0.0;
    s(1) = 0.0;
    for (double dir : {1.0, -1.0}) {
      Vec y = s;
      double x = 0.0;
      for (int i = 1; i <= 24; ++i) {
        const double xt = dir * (1.0 / 3.0) * i / 24.0;
        y = integrate_ode(rhs, x, y, xt).back().y;
        x = xt;
        const double denom = std::pow(eps, 4) * xt * xt;
        if (denom > 0.0)
          out.err_near_zero = std::max(out.err_near_zero,
                                       std::abs(y(1) - omega_star * xt) / denom);
      }
    }
  }

  // near the boundary anchor y(-L) = -delta0: expansion -delta0 + delta0^2 x
  {
    PassageReport rep = passage_report(field, eps, delta0);
    const double L = rep.L_of_eps;
    Vec s(2);
    s(0) = -rep.alpha_drift;
    s(1) = -delta0;
    for (double dir : {1.0, -1.0}) {
      Vec y = s;
      double x = -L;
      for (int i = 1; i <= 24; ++i) {
        const double dx = dir * 1.0 * i / 24.0;
        if (-L + dx > 0.0) break;
        // stay inside the chart |y| <= 2 delta0; strong g can blow up before |x| = 1
        const double speed = std::abs(omega_star + y(1) * y(1) + field.g(y(1), omega_star));
        if (std::abs(y(1)) + speed * (1.0 / 24.0) > 1.9 * field.delta0) break;
        const double xt = -L + dx;
        y = integrate_ode(rhs, x, y, xt).back().y;
        x = xt;
        if (std::abs(y(1)) > 2.0 * field.delta0) break;
        const double denom = eps * std::abs(dx) + std::pow(delta0, 3) * dx * dx;
        const double resid = std::abs(y(1) - (-delta0 + delta0 * delta0 * dx));
        if (denom > 0.0) out.err_near_boundary = std::max(out.err_near_boundary, resid / denom);
      }
    }
  }
  return out;
}

PhaseDriftFit phase_drift_log_check(const SaddleField& field, double x_lo, double x_hi, double x0,
                                    double y0) {
  if (!(y0 < 0.0)) throw DomainError("phase_drift_log_check: need y(x0) < 0");
  auto rhs = center_rhs(field, 0.0);
  Vec s(2);
  s(0) = 0.0;
  s(1) = y0;

  std::vector<double> logx, alpha;
  const int n = 160;
  Vec y = s;
  double x = x0;
  for (int i = 0; i <= n; ++i) {
    const double xt = x_lo * std::pow(x_hi / x_lo, static_cast<double>(i) / n);
    y = integrate_ode(rhs, x, y, xt).back().y;
    x = xt;
    logx.push_back(std::log(xt));
    alpha.push_back(y(0));
  }
  LinearFit fit = fit_line(logx, alpha);
  return {fit.slope, fit.rms_residual};
}

double alpha_drift_between(const SaddleField& field, double omega_star, double alpha0, double y0,
                           double a, double b) {
  auto rhs = center_rhs(field, omega_star);
  Vec s(2);
  s(0) = alpha0;
  s(1) = y0;
  Vec yb = integrate_ode(rhs, a, s, b).back().y;
  return yb(0) - alpha0;
}

}  // namespace condef
