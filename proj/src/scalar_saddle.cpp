#include "condef/scalar_saddle.hpp"

#include <algorithm>
#include <cmath>

#include "condef/errors.hpp"
#include "condef/numerics.hpp"

namespace condef {

namespace {

double eval_poly(const Eigen::VectorXd& c, double w) {
  double v = 0.0;
  for (int j = static_cast<int>(c.size()) - 1; j >= 0; --j) v = v * w + c(j);
  return v;
}

double leg_sign_start(Leg leg, double delta) { return leg == Leg::MinusToZero ? -delta : 0.0; }

void check_travel_time_domain(const SaddleField& field, double epsilon, double delta) {
  if (epsilon == 0.0)
    throw NonMonotone("travel time: eps = 0 has an equilibrium blocking the leg");
  if (!(epsilon > 0.0) || epsilon > field.eps0)
    throw DomainError("travel time: eps outside (0, eps0]");
  if (delta < 0.5 * field.delta0 || delta > 2.0 * field.delta0)
    throw DomainError("travel time: delta outside [delta0/2, 2*delta0]");
}

// ----- truncated bivariate series in (z, omega), z weight 1, omega weight 2 --

struct Series {
  Eigen::MatrixXd c;  // c(i, j): z^i omega^j
  int order;          // keep entries with i + 2j <= order

  explicit Series(int ord) : c(Eigen::MatrixXd::Zero(ord + 1, ord / 2 + 1)), order(ord) {}

  void truncate() {
    for (int i = 0; i < c.rows(); ++i)
      for (int j = 0; j < c.cols(); ++j)
        if (i + 2 * j > order) c(i, j) = 0.0;
  }
};

Series mul(const Series& A, const Series& B) {
  Series R(A.order);
  for (int i = 0; i < A.c.rows(); ++i)
    for (int j = 0; j < A.c.cols(); ++j) {
      if (A.c(i, j) == 0.0) continue;
      for (int k = 0; k + i <= A.order; ++k) {
        if (k >= B.c.rows()) break;
        for (int l = 0; l + j < R.c.cols() && i + k + 2 * (j + l) <= A.order; ++l) {
          if (l >= B.c.cols()) break;
          R.c(i + k, j + l) += A.c(i, j) * B.c(k, l);
        }
      }
    }
  return R;
}

Series dz(const Series& A) {
  Series R(A.order);
  for (int i = 1; i < A.c.rows(); ++i)
    for (int j = 0; j < A.c.cols(); ++j) R.c(i - 1, j) = i * A.c(i, j);
  return R;
}

// Composition F(Psi(z, omega), omega) for F(y, w) = w + y^2 + g(y, w).
Series compose_field(const SaddleField& field, const Series& psi, int order) {
  Series F(order);
  F.c(0, 1) += 1.0;  // omega
  // powers of psi
  std::vector<Series> pw;
  pw.push_back(Series(order));
  pw[0].c(0, 0) = 1.0;
  for (int i = 1; i <= order; ++i) pw.push_back(mul(pw.back(), psi));
  F.c += mul(psi, psi).c;  // y^2
  const auto& g = field.g_taylor;
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j) {
      if (g(i, j) == 0.0 || i + 2 * j > order) continue;
      // g_ij * psi^i * omega^j
      for (int p = 0; p < pw[i].c.rows(); ++p)
        for (int q = 0; q + j < F.c.cols(); ++q)
          if (p + 2 * (q + j) <= order) F.c(p, q + j) += g(i, j) * pw[i].c(p, q);
    }
  F.truncate();
  return F;
}

struct EliminationState {
  Series psi;
  Eigen::VectorXd a, b, mu;

  explicit EliminationState(int order)
      : psi(order),
        a(Eigen::VectorXd::Zero(order / 2 + 1)),
        b(Eigen::VectorXd::Zero(order / 2 + 1)),
        mu(Eigen::VectorXd::Zero(order / 2 + 1)) {
    psi.c(1, 0) = 1.0;
    if (mu.size() > 1) mu(1) = 1.0;
  }

  Series target(int order) const {
    Series N(order);
    for (int j = 0; j < mu.size() && 2 * j <= order; ++j) N.c(0, j) = mu(j);
    for (int j = 0; j < a.size() && 2 + 2 * j <= order; ++j) N.c(2, j) = (j == 0 ? 1.0 : 0.0) + a(j);
    for (int j = 0; j < b.size() && 3 + 2 * j <= order; ++j) N.c(3, j) = b(j);
    N.truncate();
    return N;
  }

  // E = Psi_z * N - F(Psi)
  Series defect(const SaddleField& field, int order) const {
    Series E = mul(dz(psi), target(order));
    E.c -= compose_field(field, psi, order).c;
    E.truncate();
    return E;
  }
};

}  // namespace

double NormalForm::a_at(double omega) const { return eval_poly(a_coeffs, omega); }
double NormalForm::b_at(double omega) const { return eval_poly(b_coeffs, omega); }
double NormalForm::mu_at(double omega) const { return eval_poly(omega_map, omega); }

double NormalForm::psi_at(double z, double omega) const {
  double v = 0.0;
  for (int i = static_cast<int>(psi.rows()) - 1; i >= 0; --i) {
    double row = 0.0;
    for (int j = static_cast<int>(psi.cols()) - 1; j >= 0; --j) row = row * omega + psi(i, j);
    v = v * z + row;
  }
  return v;
}

double NormalForm::psi_dz_at(double z, double omega) const {
  double v = 0.0;
  for (int i = static_cast<int>(psi.rows()) - 1; i >= 1; --i) {
    double row = 0.0;
    for (int j = static_cast<int>(psi.cols()) - 1; j >= 0; --j) row = row * omega + psi(i, j);
    v = v * z + i * row;
  }
  return v;
}

double NormalForm::delta_tilde(double delta, double omega) const {
  double z = delta;
  for (int it = 0; it < 50; ++it) {
    const double r = psi_at(z, omega) - delta;
    const double d = psi_dz_at(z, omega);
    if (d == 0.0) throw SolverError("delta_tilde: singular Psi'");
    const double step = r / d;
    z -= step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(z))) return z;
  }
  throw SolverError("delta_tilde: Newton failed to converge");
}

NormalForm make_normal_form(const Eigen::VectorXd& a_coeffs, const Eigen::VectorXd& b_coeffs) {
  if (a_coeffs.size() > 0 && std::abs(a_coeffs(0)) > 0.0)
    throw DomainError("make_normal_form: a(0) must vanish");
  NormalForm nf;
  nf.a_coeffs = a_coeffs.size() ? a_coeffs : Eigen::VectorXd::Zero(1);
  nf.b_coeffs = b_coeffs.size() ? b_coeffs : Eigen::VectorXd::Zero(1);
  nf.omega_map = Eigen::VectorXd::Zero(2);
  nf.omega_map(1) = 1.0;
  nf.psi = Eigen::MatrixXd::Zero(2, 1);
  nf.psi(1, 0) = 1.0;
  nf.order = 5;
  return nf;
}

EventIntegration integrate_to_event(const SaddleField& field, double epsilon, double y0,
                                    double y_target, double x_max, const OdeOptions& opts) {
  if (std::abs(y0) > 2.0 * field.delta0 || std::abs(y_target) > 2.0 * field.delta0)
    throw DomainError("integrate_to_event: endpoints outside the validity window");
  if (!(x_max > 0.0)) throw DomainError("integrate_to_event: x_max must be positive");
  auto rhs = [&field, epsilon](double, const Vec& y) {
    Vec dy(1);
    dy(0) = field.rhs(y(0), epsilon);
    return dy;
  };
  Vec start(1);
  start(0) = y0;
  auto ev = [y_target](double, const Vec& y) { return y(0) - y_target; };
  EventResult r = integrate_ode_to_event(rhs, 0.0, start, x_max, ev, opts);
  if (!r.hit)
    throw EventNotReached("integrate_to_event: y never attained the target before x_max");
  EventIntegration out;
  out.x_hit = r.x_hit;
  out.trajectory = std::move(r.trajectory);
  return out;
}

TravelTimeResult travel_time_direct(const SaddleField& field, double epsilon, double delta,
                                    Leg leg, const OdeOptions& opts) {
  check_travel_time_domain(field, epsilon, delta);
  if (leg == Leg::Full) {
    TravelTimeResult a = travel_time_direct(field, epsilon, delta, Leg::MinusToZero, opts);
    TravelTimeResult b = travel_time_direct(field, epsilon, delta, Leg::ZeroToPlus, opts);
    TravelTimeResult r;
    r.T = a.T + b.T;
    r.epsilon = epsilon;
    r.delta = delta;
    r.leg = Leg::Full;
    r.method = TravelTimeMethod::DirectODE;
    r.err_estimate = a.err_estimate + b.err_estimate;
    return r;
  }
  // validity: the field must stay positive on the leg
  const double lo = (leg == Leg::MinusToZero) ? -delta : 0.0;
  const double hi = (leg == Leg::MinusToZero) ? 0.0 : delta;
  for (int i = 0; i <= 32; ++i) {
    const double y = lo + (hi - lo) * i / 32.0;
    if (field.rhs(y, epsilon) <= 0.0)
      throw NonMonotone("travel_time_direct: field vanishes on the leg");
  }
  const double y0 = leg_sign_start(leg, delta);
  const double target = (leg == Leg::MinusToZero) ? 0.0 : delta;
  const double x_max = 8.0 / epsilon + 100.0;
  EventIntegration ev = integrate_to_event(field, epsilon, y0, target, x_max, opts);
  TravelTimeResult r;
  r.T = ev.x_hit;
  r.epsilon = epsilon;
  r.delta = delta;
  r.leg = leg;
  r.method = TravelTimeMethod::DirectODE;
  const double slope = field.rhs(target, epsilon);
  r.err_estimate = ev.trajectory.err_estimate / std::max(slope, 1e-30) +
                   1e-13 * (1.0 + std::abs(ev.x_hit));
  return r;
}

NormalForm fit_normal_form(const SaddleField& field, int order) {
  if (order < 4) throw OrderTooLow("fit_normal_form: order must be >= 4");
  if (field.g_taylor.rows() - 1 < order && !field.taylor_is_exact)
    throw OrderTooLow("fit_normal_form: Taylor table shorter than requested order");

  EliminationState st(order);
  // Graded elimination: at weighted order p, sweep monomials z^m omega^n with
  // m + 2n = p from large m down. Positions m=0,2,3 are resonant and absorbed
  // by mu, a, b; every other position is removed through a Psi coefficient
  // c_{m-1,n}, whose leading action carries the factor (m-3).
  for (int p = 2; p <= order; ++p) {
    for (int m = p; m >= 0; m -= 2) {
      const int n = (p - m) / 2;
      Series E = st.defect(field, order);
      const double e = E.c(m, n);
      if (m == 0) {
        st.mu(n) -= e;
      } else if (m == 2) {
        st.a(n) -= e;
      } else if (m == 3) {
        st.b(n) -= e;
      } else {
        // m == 1 uses the shift c_{0,n}; m >= 4 uses c_{m-1,n}
        st.psi.c(m - 1, n) -= e / (m - 3);
      }
    }
  }

  Series E = st.defect(field, order);
  const double resid = E.c.cwiseAbs().maxCoeff();
  if (resid > 1e-10)
    throw SolverError("fit_normal_form: residual coefficients exceed tolerance");

  NormalForm nf;
  nf.a_coeffs = st.a;
  nf.b_coeffs = st.b;
  nf.omega_map = st.mu;
  nf.psi = st.psi.c;
  nf.order = order;
  nf.max_residual_coeff = resid;
  if (std::abs(nf.a_coeffs(0)) > 1e-12)
    throw SolverError("fit_normal_form: a(0) failed to vanish");
  nf.a_coeffs(0) = 0.0;
  if (field.is_even_in_y)
    for (int j = 0; j < nf.b_coeffs.size(); ++j)
      if (std::abs(nf.b_coeffs(j)) > 1e-12)
        throw SolverError("fit_normal_form: even field produced nonzero b");
  return nf;
}

PartialFractionParts partial_fraction_parts(const NormalForm& nf, double epsilon, double delta,
                                            Leg leg) {
  if (leg == Leg::Full) throw DomainError("partial_fraction_parts: pick a single leg");
  const double omega = epsilon * epsilon;
  const double mu = nf.mu_at(omega);
  if (!(mu > 0.0)) throw RootIsolationFailure("partial fraction: mu(omega) not positive");
  const double eps_hat = std::sqrt(mu);
  const double a = nf.a_at(omega);
  double b = nf.b_at(omega);
  double dtil;
  if (leg == Leg::ZeroToPlus) {
    dtil = nf.delta_tilde(delta, omega);
  } else {
    // z -> -z maps the [-delta, 0] leg onto [0, delta_tilde_minus] and flips b.
    dtil = -nf.delta_tilde(-delta, omega);
    b = -b;
  }
  if (!(dtil > 0.0)) throw RootIsolationFailure("partial fraction: degenerate delta_tilde");

  const double one_a = 1.0 + a;
  if (one_a <= 0.0) throw RootIsolationFailure("partial fraction: 1 + a(omega) not positive");

  // real root of u^3 + (1+a) u + eps_hat b
  double u1 = 0.0;
  if (b != 0.0) {
    u1 = -eps_hat * b / one_a;
    for (int it = 0; it < 100; ++it) {
      const double f = u1 * u1 * u1 + one_a * u1 + eps_hat * b;
      const double df = 3.0 * u1 * u1 + one_a;
      const double step = f / df;
      u1 -= step;
      if (std::abs(step) < 1e-17 * (1.0 + std::abs(u1))) break;
    }
  }
  const double q = one_a + u1 * u1;  // deflated quadratic u^2 + u1 u + q
  const double disc = u1 * u1 - 4.0 * q;
  if (disc >= 0.0)
    throw RootIsolationFailure("partial fraction: complex pair collapsed onto the real axis");
  const std::complex<double> u2(-0.5 * u1, 0.5 * std::sqrt(-disc));
  if (std::abs(u2.imag()) < 0.5 * std::sqrt(one_a))
    throw RootIsolationFailure("partial fraction: roots not separated");

  const double l = eps_hat / dtil;
  if (u1 >= l * (1.0 - 1e-10))
    throw RootIsolationFailure("partial fraction: real root reaches the integration range");

  PartialFractionParts parts;
  parts.u1 = u1;
  parts.u2 = u2;
  parts.eps_hat = eps_hat;
  parts.A1 = (b == 0.0) ? 0.0 : u1 / (3.0 * u1 * u1 + one_a);
  parts.A2 = u2 / (3.0 * u2 * u2 + one_a);
  parts.log_eps_coefficient = -parts.A1;

  // I1 = int_1^inf u/(u^3 + (1+a)u + eps_hat b) du, mapped to [0,1] via t = 1/u.
  parts.I1 = gauss_legendre(
      [&](double t) { return 1.0 / (1.0 + one_a * t * t + eps_hat * b * t * t * t); }, 0.0, 1.0, 6);

  double i2 = 0.0;
  if (parts.A1 != 0.0) i2 += parts.A1 * (std::log(1.0 - u1) - std::log(l - u1));
  const std::complex<double> tail =
      parts.A2 * (std::log(std::complex<double>(1.0, 0.0) - u2) -
                  std::log(std::complex<double>(l, 0.0) - u2));
  i2 += 2.0 * tail.real();
  parts.I2 = i2;
  return parts;
}

TravelTimeResult travel_time_partial_fraction(const NormalForm& nf, double epsilon, double delta,
                                              Leg leg) {
  TravelTimeResult r;
  r.epsilon = epsilon;
  r.delta = delta;
  r.leg = leg;
  r.method = TravelTimeMethod::PartialFraction;
  if (leg == Leg::Full) {
    PartialFractionParts pa = partial_fraction_parts(nf, epsilon, delta, Leg::MinusToZero);
    PartialFractionParts pb = partial_fraction_parts(nf, epsilon, delta, Leg::ZeroToPlus);
    r.T = (pa.I1 + pa.I2) / pa.eps_hat + (pb.I1 + pb.I2) / pb.eps_hat;
  } else {
    PartialFractionParts p = partial_fraction_parts(nf, epsilon, delta, leg);
    r.T = (p.I1 + p.I2) / p.eps_hat;
  }
  r.err_estimate = 1e-13 * (1.0 + std::abs(r.T));
  return r;
}

LogCoefficientEstimate extract_log_coefficient(const SaddleField& field,
                                               const std::vector<double>& epsilon_grid,
                                               double delta) {
  if (epsilon_grid.size() < 8) throw GridTooCoarse("extract_log_coefficient: need >= 8 points");
  const auto [mn, mx] = std::minmax_element(epsilon_grid.begin(), epsilon_grid.end());
  if (*mx < 10.0 * *mn)
    throw GridTooCoarse("extract_log_coefficient: grid must span at least one decade");

  LogCoefficientEstimate est;
  std::vector<double> eps_sorted = epsilon_grid;
  std::sort(eps_sorted.begin(), eps_sorted.end());

  for (double eps : eps_sorted) {
    // Local 4-point model at eps, eps/2, eps/4, eps/8:
    //   eps*T - pi/2 = c_log * t*log(t) + c1 t + c2 t^2 + c3 t^3.
    // The smooth part of eps*T is annihilated through cubic order, which keeps
    // the log coefficient from being contaminated by zeta.
    Eigen::Matrix4d A;
    Eigen::Vector4d rhs;
    for (int i = 0; i < 4; ++i) {
      const double t = eps / std::pow(2.0, i);
      TravelTimeResult tt = travel_time_direct(field, t, delta, Leg::ZeroToPlus);
      const double f = t * tt.T - M_PI_2;
      A(i, 0) = t * std::log(t);
      A(i, 1) = t;
      A(i, 2) = t * t;
      A(i, 3) = t * t * t;
      rhs(i) = f;
    }
    Eigen::JacobiSVD<Eigen::Matrix4d> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues()(0) > 1e12 * svd.singularValues()(3))
      throw GridTooCoarse("extract_log_coefficient: regression conditioning exceeded threshold");
    Eigen::Vector4d sol = svd.solve(rhs);
    const double eta_hat = sol(0) * eps;
    est.eta_samples.push_back({eps, eta_hat});
    TravelTimeResult tt = travel_time_direct(field, eps, delta, Leg::ZeroToPlus);
    est.zeta_samples.push_back({eps, delta, eps * tt.T - M_PI_2 - eta_hat * std::log(eps)});
  }

  // slope at zero from the smaller half of the grid, a fit through the origin
  double num = 0.0, den = 0.0;
  const size_t half = est.eta_samples.size() / 2;
  for (size_t i = 0; i < std::max<size_t>(half, 2); ++i) {
    num += est.eta_samples[i].second * est.eta_samples[i].first;
    den += est.eta_samples[i].first * est.eta_samples[i].first;
  }
  est.slope_at_zero = (den > 0.0) ? num / den : 0.0;
  return est;
}

EpsilonStarResult solve_epsilon_for_length(const SaddleField& field, double L, double delta,
                                           Leg leg) {
  if (delta < 0.5 * field.delta0 || delta > field.delta0)
    throw DomainError("solve_epsilon_for_length: delta outside [delta0/2, delta0]");
  auto T_of = [&](double eps) { return travel_time_direct(field, eps, delta, leg).T; };

  auto solve_one = [&](double Lx) {
    double hi = field.eps0;
    const double t_hi = T_of(hi);
    if (t_hi > Lx) throw NoBracket("solve_epsilon_for_length: T(eps0) exceeds L");
    double lo = hi;
    double t_lo = t_hi;
    while (t_lo < Lx) {
      lo *= 0.5;
      if (lo < 1e-14) throw NoBracket("solve_epsilon_for_length: failed to bracket");
      t_lo = T_of(lo);
    }
    // T is strictly decreasing in eps on the bracket. Bisect a bit, then secant.
    double a = lo, b = hi, fa = t_lo - Lx, fb = t_hi - Lx;
    for (int it = 0; it < 20 && (b - a) > 1e-3 * a; ++it) {
      const double m = 0.5 * (a + b);
      const double fm = T_of(m) - Lx;
      if (fm > 0.0) {
        a = m;
        fa = fm;
      } else {
        b = m;
        fb = fm;
      }
    }
    double x0 = a, f0 = fa, x1 = b, f1 = fb;
    for (int it = 0; it < 60; ++it) {
      if (std::abs(f1) <= 1e-10 * Lx) return std::pair<double, double>(x1, std::abs(f1));
      const double denom = f1 - f0;
      double x2;
      if (denom == 0.0) {
        x2 = 0.5 * (x0 + x1);
      } else {
        x2 = x1 - f1 * (x1 - x0) / denom;
        if (!(x2 > a && x2 < b)) x2 = 0.5 * (x0 + x1);
      }
      x0 = x1;
      f0 = f1;
      x1 = x2;
      f1 = T_of(x1) - Lx;
      if (f1 > 0.0)
        a = std::max(a, x1);
      else
        b = std::min(b, x1);
    }
    if (std::abs(f1) <= 1e-10 * Lx) return std::pair<double, double>(x1, std::abs(f1));
    throw SolverError("solve_epsilon_for_length: residual target not reached");
  };

  EpsilonStarResult res;
  res.L = L;
  res.delta = delta;
  auto [eps_star, resid] = solve_one(L);
  res.epsilon_star = eps_star;
  res.residual = resid;
  const double hL = 5e-3 * L;
  const double ep = solve_one(L + hL).first;
  const double em = solve_one(L - hL).first;
  res.derivative = (ep - em) / (2.0 * hL);
  return res;
}

AsymptoteReport asymptote_check(const SaddleField& field, double x_lo, double x_hi, double x0,
                                double y0) {
  if (!(y0 < 0.0) || std::abs(y0) > 2.0 * field.delta0)
    throw DomainError("asymptote_check: need y(x0) < 0 inside the validity window");
  auto rhs = [&field](double, const Vec& y) {
    Vec dy(1);
    dy(0) = field.rhs(y(0), 0.0);
    return dy;
  };
  const int n_samples = 240;
  AsymptoteReport rep;
  double gyyy = (field.g_taylor.rows() > 3) ? field.g_taylor(3, 0) : 0.0;
  rep.used_x2_weight = (gyyy == 0.0);

  Vec y(1);
  y(0) = y0;
  double x = x0;
  for (int i = 0; i <= n_samples; ++i) {
    const double xt = x_lo * std::pow(x_hi / x_lo, static_cast<double>(i) / n_samples);
    y = integrate_ode(rhs, x, y, xt).back().y;
    x = xt;
    const double dev = std::abs(y(0) + 1.0 / xt);
    rep.sup_x2 = std::max(rep.sup_x2, xt * xt * dev);
    if (xt > 1.0)
      rep.sup_x2_over_log = std::max(rep.sup_x2_over_log, xt * xt / std::log(xt) * dev);
  }
  rep.sup_weighted = rep.used_x2_weight ? rep.sup_x2 : rep.sup_x2_over_log;
  return rep;
}

}  // namespace condef
