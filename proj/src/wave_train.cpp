#include "condef/wave_train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "condef/errors.hpp"
#include "condef/fourier.hpp"
#include "condef/ode.hpp"

namespace condef {

namespace {

// Newton on (P, omega) for  omega P_tau = k^2 D P'' + f(P)  with the integral
// phase condition <P - ref, ref_tau> = 0. k = 0 recovers the homogeneous train.
struct CollocationResult {
  Eigen::MatrixXd P;
  double omega;
  double residual;
  double phase_value;
  std::vector<double> newton_residuals;
};

CollocationResult solve_collocation(const ReactionDiffusionSystem& sys, Eigen::MatrixXd P,
                                    double omega, double ksq, const Eigen::MatrixXd& ref) {
  const int d = sys.dimension;
  const int M = static_cast<int>(P.cols());
  const Eigen::MatrixXd Dt = fourier::diff_matrix(M);
  const Eigen::MatrixXd Dt2 = fourier::diff2_matrix(M);
  Eigen::MatrixXd ref_tau = ref * Dt.transpose();  // row c: d/dtau of component c

  const int n = d * M + 1;
  auto idx = [d](int j, int c) { return j * d + c; };

  auto residual = [&](const Eigen::MatrixXd& Pm, double om, double* phase) {
    Eigen::VectorXd r(n);
    Eigen::MatrixXd Pt = Pm * Dt.transpose();
    Eigen::MatrixXd Ptt = Pm * Dt2.transpose();
    for (int j = 0; j < M; ++j) {
      Eigen::VectorXd fv = sys.f(Pm.col(j));
      for (int c = 0; c < d; ++c)
        r(idx(j, c)) = om * Pt(c, j) - ksq * sys.D(c) * Ptt(c, j) - fv(c);
    }
    double ph = 0.0;
    for (int j = 0; j < M; ++j)
      for (int c = 0; c < d; ++c) ph += (Pm(c, j) - ref(c, j)) * ref_tau(c, j);
    ph /= M;
    r(n - 1) = ph;
    if (phase) *phase = ph;
    return r;
  };

  CollocationResult out;
  double phase = 0.0;
  Eigen::VectorXd r = residual(P, omega, &phase);
  out.newton_residuals.push_back(r.cwiseAbs().maxCoeff());

  for (int it = 0; it < 50; ++it) {
    if (out.newton_residuals.back() < 1e-12) break;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd Pt = P * Dt.transpose();
    for (int j = 0; j < M; ++j) {
      Eigen::MatrixXd fj = sys.df(P.col(j));
      for (int c = 0; c < d; ++c) {
        for (int k2 = 0; k2 < M; ++k2) {
          J(idx(j, c), idx(k2, c)) += omega * Dt(j, k2) - ksq * sys.D(c) * Dt2(j, k2);
        }
        for (int c2 = 0; c2 < d; ++c2) J(idx(j, c), idx(j, c2)) -= fj(c, c2);
        J(idx(j, c), n - 1) = Pt(c, j);
      }
    }
    for (int j = 0; j < M; ++j)
      for (int c = 0; c < d; ++c) J(n - 1, idx(j, c)) = ref_tau(c, j) / M;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (!lu.isInvertible())
      throw SingularJacobian("wave train: phase condition failed to remove the kernel");
    Eigen::VectorXd step = lu.solve(-r);
    for (int j = 0; j < M; ++j)
      for (int c = 0; c < d; ++c) P(c, j) += step(idx(j, c));
    omega += step(n - 1);
    r = residual(P, omega, &phase);
    out.newton_residuals.push_back(r.cwiseAbs().maxCoeff());
  }
  if (out.newton_residuals.back() > 1e-10)
    throw NewtonDiverged("wave train: Newton failed to converge");
  out.P = P;
  out.omega = omega;
  out.residual = out.newton_residuals.back();
  out.phase_value = phase;
  return out;
}

WaveTrain pack_wave_train(const CollocationResult& res, int N_tau) {
  WaveTrain wt;
  wt.samples = res.P;
  const int d = static_cast<int>(res.P.rows());
  const int M = static_cast<int>(res.P.cols());
  wt.coeffs.resize(d, M);
  for (int c = 0; c < d; ++c) wt.coeffs.row(c) = fourier::coefficients(res.P.row(c).transpose());
  wt.omega_d = res.omega;
  wt.residual = res.residual;
  wt.phase_value = res.phase_value;
  wt.N_tau = N_tau;
  wt.newton_residuals = res.newton_residuals;
  return wt;
}

Eigen::VectorXd eval_coeffs(const Eigen::MatrixXcd& coeffs, double tau, int deriv) {
  const int d = static_cast<int>(coeffs.rows());
  const int M = static_cast<int>(coeffs.cols());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
  for (int c = 0; c < d; ++c) {
    double acc = 0.0;
    for (int nn = -M / 2 + 1; nn < M / 2; ++nn) {
      std::complex<double> e(std::cos(nn * tau), std::sin(nn * tau));
      std::complex<double> v = coeffs(c, nn + M / 2) * e;
      if (deriv == 1) v *= std::complex<double>(0.0, nn);
      acc += v.real();
    }
    const double ny = 0.5 * M;
    if (deriv == 0)
      acc += coeffs(c, 0).real() * std::cos(ny * tau);
    else
      acc += -coeffs(c, 0).real() * ny * std::sin(ny * tau);
    out(c) = acc;
  }
  return out;
}

}  // namespace

Eigen::VectorXd WaveTrain::at(double tau) const { return eval_coeffs(coeffs, tau, 0); }
Eigen::VectorXd WaveTrain::dtau_at(double tau) const { return eval_coeffs(coeffs, tau, 1); }

WaveTrain WaveTrain::translated(double alpha) const {
  WaveTrain wt = *this;
  for (int c = 0; c < samples.rows(); ++c)
    wt.samples.row(c) = fourier::shift(samples.row(c).transpose(), alpha).transpose();
  for (int c = 0; c < samples.rows(); ++c)
    wt.coeffs.row(c) = fourier::coefficients(wt.samples.row(c).transpose());
  return wt;
}

WaveTrain find_wave_train(const ReactionDiffusionSystem& system,
                          const std::function<Eigen::VectorXd(double)>& guess, int N_tau) {
  if (N_tau < 8) throw DomainError("find_wave_train: N_tau must be >= 8");
  const int M = 2 * N_tau;
  Eigen::MatrixXd P(system.dimension, M);
  for (int j = 0; j < M; ++j) P.col(j) = guess(2.0 * M_PI * j / M);
  // frequency guess from the residual of the guess itself
  const Eigen::MatrixXd Dt = fourier::diff_matrix(M);
  Eigen::MatrixXd Pt = P * Dt.transpose();
  double num = 0.0, den = 0.0;
  for (int j = 0; j < M; ++j) {
    Eigen::VectorXd fv = system.f(P.col(j));
    num += fv.dot(Pt.col(j));
    den += Pt.col(j).squaredNorm();
  }
  const double omega0 = (den > 0.0) ? num / den : 1.0;
  CollocationResult res = solve_collocation(system, P, omega0, 0.0, P);
  return pack_wave_train(res, N_tau);
}

WaveTrain find_wave_train(const ReactionDiffusionSystem& system, const Eigen::MatrixXd& guess,
                          double omega_guess) {
  const int M = static_cast<int>(guess.cols());
  if (M < 16) throw DomainError("find_wave_train: need at least 16 collocation points");
  CollocationResult res = solve_collocation(system, guess, omega_guess, 0.0, guess);
  return pack_wave_train(res, M / 2);
}

DispersionData nonlinear_dispersion(const ReactionDiffusionSystem& system, const WaveTrain& wt,
                                    const std::vector<double>& k_grid) {
  DispersionData data;
  data.has_omega = true;
  // continuation ordered by |k|, reusing the previous profile
  std::vector<double> ks = k_grid;
  std::sort(ks.begin(), ks.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  std::map<double, double> omega_of;
  std::map<double, std::pair<Eigen::MatrixXd, double>> cache;  // by |k| sign-agnostic? keep both
  for (double k : ks) {
    Eigen::MatrixXd P0 = wt.samples;
    double om0 = wt.omega_d;
    // warm start from the nearest smaller |k| of the same sign when available
    double best = 0.0;
    for (const auto& [kk, st] : cache)
      if (std::abs(kk - k) < std::abs(best - k)) best = kk;
    if (!cache.empty()) {
      P0 = cache[best].first;
      om0 = cache[best].second;
    }
    CollocationResult res;
    try {
      res = solve_collocation(system, P0, om0, k * k, wt.samples);
    } catch (const SolverError&) {
      throw ContinuationStall("nonlinear_dispersion: Newton failed along the k grid", best);
    }
    omega_of[k] = res.omega;
    cache[k] = {res.P, res.omega};
    data.omega_nl_samples.push_back({k, res.omega});
  }
  std::sort(data.omega_nl_samples.begin(), data.omega_nl_samples.end());

  // omega''(0) by symmetric second differences at two step sizes plus Richardson
  auto value_at = [&](double k) -> double {
    auto it = omega_of.find(k);
    if (it == omega_of.end()) throw DomainError("nonlinear_dispersion: grid must be symmetric");
    return it->second;
  };
  const double om0 = omega_of.count(0.0) ? omega_of[0.0] : wt.omega_d;
  std::vector<double> hs;
  for (const auto& [k, om] : omega_of)
    if (k > 0.0 && omega_of.count(-k)) hs.push_back(k);
  if (hs.size() >= 2) {
    std::sort(hs.begin(), hs.end());
    const double h1 = hs.back(), h2 = hs[hs.size() - 2];
    const double S1 = (value_at(h1) - 2.0 * om0 + value_at(-h1)) / (h1 * h1);
    const double S2 = (value_at(h2) - 2.0 * om0 + value_at(-h2)) / (h2 * h2);
    data.omega_nl_pp0 = (S2 * h1 * h1 - S1 * h2 * h2) / (h1 * h1 - h2 * h2);
  } else if (hs.size() == 1) {
    data.omega_nl_pp0 = (value_at(hs[0]) - 2.0 * om0 + value_at(-hs[0])) / (hs[0] * hs[0]);
  }
  return data;
}

DispersionData linear_dispersion(const ReactionDiffusionSystem& system, const WaveTrain& wt,
                                 const std::vector<double>& l_grid) {
  DispersionData data;
  data.has_lambda = true;
  const int d = system.dimension;
  const double period_t = 2.0 * M_PI / wt.omega_d;

  auto floquet_all = [&](double l) {
    // monodromy of v_tau = (1/omega_d)(-l^2 D + f'(P(tau))) v over one period
    Eigen::MatrixXd mono(d, d);
    for (int col = 0; col < d; ++col) {
      auto rhs = [&](double tau, const Vec& v) {
        Eigen::MatrixXd Jf = system.df(wt.at(tau));
        Vec dv = (Jf * v) / wt.omega_d;
        for (int c = 0; c < d; ++c) dv(c) -= l * l * system.D(c) * v(c) / wt.omega_d;
        return dv;
      };
      Vec v0 = Vec::Zero(d);
      v0(col) = 1.0;
      OdeOptions opts;
      opts.rtol = 1e-12;
      opts.atol = 1e-14;
      mono.col(col) = integrate_ode(rhs, 0.0, v0, 2.0 * M_PI, opts).back().y;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(mono);
    std::vector<std::complex<double>> lams(d);
    for (int i = 0; i < d; ++i) lams[i] = std::log(es.eigenvalues()(i)) / period_t;
    return lams;
  };

  std::vector<double> ls = l_grid;
  std::sort(ls.begin(), ls.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  std::map<double, std::complex<double>> lam_of;
  std::complex<double> prev(0.0, 0.0);
  for (double l : ls) {
    auto lams = floquet_all(l);
    // track the branch continuing from the previous value (lambda(0) = 0)
    std::complex<double> target = prev;
    if (std::abs(l) < 1e-14) target = std::complex<double>(0.0, 0.0);
    std::sort(lams.begin(), lams.end(), [&](auto a, auto b) {
      return std::abs(a - target) < std::abs(b - target);
    });
    if (lams.size() >= 2 &&
        std::abs(lams[0] - target) > 0.5 * std::abs(lams[1] - target) &&
        std::abs(lams[0] - lams[1]) < 1e-8)
      throw BranchCrossing("linear_dispersion: tracked exponent collided with another branch");
    lam_of[l] = lams[0];
    prev = lams[0];
    data.lambda_lin_samples.push_back({l, lams[0]});
  }
  std::sort(data.lambda_lin_samples.begin(), data.lambda_lin_samples.end(),
            [](auto a, auto b) { return a.first < b.first; });

  const std::complex<double> lam0 = lam_of.count(0.0) ? lam_of[0.0] : std::complex<double>(0, 0);
  std::vector<double> hs;
  for (const auto& [l, lam] : lam_of)
    if (l > 0.0 && lam_of.count(-l)) hs.push_back(l);
  if (!hs.empty()) {
    std::sort(hs.begin(), hs.end());
    const double h1 = hs.back();
    const double S1 = ((lam_of[h1] - 2.0 * lam0 + lam_of[-h1]) / (h1 * h1)).real();
    if (hs.size() >= 2) {
      const double h2 = hs[hs.size() - 2];
      const double S2 = ((lam_of[h2] - 2.0 * lam0 + lam_of[-h2]) / (h2 * h2)).real();
      data.lambda_lin_pp0 = (S2 * h1 * h1 - S1 * h2 * h2) / (h1 * h1 - h2 * h2);
    } else {
      data.lambda_lin_pp0 = S1;
    }
  }
  return data;
}

Eigen::VectorXd spatial_rhs(const ReactionDiffusionSystem& system, const Eigen::VectorXd& uv,
                            double omega, int M) {
  const int d = system.dimension;
  if (uv.size() != 2 * d * M) throw ShapeMismatch("spatial_rhs: bad state size");
  const Eigen::MatrixXd Dt = fourier::diff_matrix(M);
  auto idx = [d](int j, int c) { return j * d + c; };
  Eigen::VectorXd out(2 * d * M);
  // u' = v
  out.head(d * M) = uv.tail(d * M);
  // v' = -D^{-1}(-omega u_tau + f(u))
  Eigen::MatrixXd U(d, M);
  for (int j = 0; j < M; ++j)
    for (int c = 0; c < d; ++c) U(c, j) = uv(idx(j, c));
  Eigen::MatrixXd Ut = U * Dt.transpose();
  for (int j = 0; j < M; ++j) {
    Eigen::VectorXd fv = system.f(U.col(j));
    for (int c = 0; c < d; ++c)
      out(d * M + idx(j, c)) = (omega * Ut(c, j) - fv(c)) / system.D(c);
  }
  return out;
}

HypothesisReport check_hypotheses(const ReactionDiffusionSystem& system, const WaveTrain& wt,
                                  const std::optional<DispersionData>& dispersion) {
  HypothesisReport rep;
  const int d = system.dimension;
  const int M = wt.M();
  const Eigen::MatrixXd Dt = fourier::diff_matrix(M);
  auto idx = [d](int j, int c) { return j * d + c; };

  // spatial linearization about the wave train: (u, v) -> (v, D^{-1}(omega_d u_tau - f'(P) u))
  const int n = d * M;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  A.topRightCorner(n, n).setIdentity();
  for (int j = 0; j < M; ++j) {
    Eigen::MatrixXd fj = system.df(wt.samples.col(j));
    for (int c = 0; c < d; ++c) {
      for (int k = 0; k < M; ++k) A(n + idx(j, c), idx(k, c)) += wt.omega_d * Dt(j, k) / system.D(c);
      for (int c2 = 0; c2 < d; ++c2) A(n + idx(j, c), idx(j, c2)) -= fj(c, c2) / system.D(c);
    }
  }

  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  const auto& evs = es.eigenvalues();
  const double scale = evs.cwiseAbs().maxCoeff();
  const double tol_zero = 1e-5 * scale;

  // algebraic multiplicity of zero from the rank drop of A^2
  Eigen::MatrixXd A2 = A * A;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A2);
  const auto& sv = svd.singularValues();
  int mult = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) < 1e-6 * sv(0)) ++mult;
  rep.zero_multiplicity = mult;

  double gap = std::numeric_limits<double>::infinity();
  bool imaginary_nonzero = false;
  for (int i = 0; i < evs.size(); ++i) {
    if (std::abs(evs(i)) <= tol_zero) continue;
    const double re = std::abs(evs(i).real());
    gap = std::min(gap, re);
    if (re <= tol_zero) imaginary_nonzero = true;
  }
  rep.spectral_gap = std::isfinite(gap) ? gap : 0.0;
  rep.h2_pass = (rep.zero_multiplicity == 2) && !imaginary_nonzero && rep.spectral_gap > 1e-3;

  DispersionData disp;
  if (dispersion) {
    disp = *dispersion;
  } else {
    const double h = 0.1;
    disp = nonlinear_dispersion(system, wt, {-h, -h / 2, 0.0, h / 2, h});
    DispersionData lin = linear_dispersion(system, wt, {-h, -h / 2, 0.0, h / 2, h});
    disp.lambda_lin_pp0 = lin.lambda_lin_pp0;
    disp.lambda_lin_samples = lin.lambda_lin_samples;
    disp.has_lambda = true;
  }
  rep.omega_nl_pp0 = disp.omega_nl_pp0;
  rep.lambda_lin_pp0 = disp.lambda_lin_pp0;
  rep.omega_nl_pp0_nonzero = std::abs(disp.omega_nl_pp0) > 1e-3;
  rep.lambda_lin_pp0_nonzero = std::abs(disp.lambda_lin_pp0) > 1e-3;
  rep.h5_pass = rep.omega_nl_pp0_nonzero && rep.lambda_lin_pp0_nonzero;

  // reversers anticommute with the discretized G: R0 (u,v) -> (u,-v) and
  // R_pi additionally shifts tau by half a period (M/2 grid points).
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  bool ok = true;
  for (int trial = 0; trial < 3 && ok; ++trial) {
    // band-limited random smooth state
    Eigen::VectorXd uv(2 * n);
    for (int half = 0; half < 2; ++half)
      for (int c = 0; c < d; ++c) {
        double a1 = dist(rng), b1 = dist(rng), a2 = dist(rng), b2 = dist(rng), a0 = dist(rng);
        for (int j = 0; j < M; ++j) {
          const double tau = 2.0 * M_PI * j / M;
          uv(half * n + idx(j, c)) = a0 + a1 * std::cos(tau) + b1 * std::sin(tau) +
                                     a2 * std::cos(2 * tau) + b2 * std::sin(2 * tau);
        }
      }
    auto apply_R = [&](const Eigen::VectorXd& w, bool pi_shift) {
      Eigen::VectorXd out(2 * n);
      const int sh = pi_shift ? M / 2 : 0;
      for (int j = 0; j < M; ++j)
        for (int c = 0; c < d; ++c) {
          const int js = (j + sh) % M;
          out(idx(j, c)) = w(idx(js, c));
          out(n + idx(j, c)) = -w(n + idx(js, c));
        }
      return out;
    };
    for (bool pi_shift : {false, true}) {
      Eigen::VectorXd lhs = spatial_rhs(system, apply_R(uv, pi_shift), wt.omega_d, M);
      Eigen::VectorXd rhs = -apply_R(spatial_rhs(system, uv, wt.omega_d, M), pi_shift);
      const double scale_g = 1.0 + rhs.cwiseAbs().maxCoeff();
      if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-10 * scale_g) ok = false;
    }
  }
  rep.reversers_verified = ok;
  return rep;
}

}  // namespace condef
