#include "condef/models.hpp"

#include <cmath>
#include <random>

#include "condef/errors.hpp"

namespace condef {

namespace {

// f(u) = sum_k s^k (a_k I + b_k J) u with s = |u|^2 and J the rotation by pi/2.
// Covers both built-in models; gauge equivariance is immediate because I and J
// commute with every rotation.
ReactionDiffusionSystem polynomial_gl_system(const std::vector<std::complex<double>>& coeffs,
                                             const Eigen::Vector2d& D, const std::string& name) {
  ReactionDiffusionSystem sys;
  sys.dimension = 2;
  sys.D = D;
  sys.name = name;
  sys.f = [coeffs](const Eigen::VectorXd& u) {
    const double s = u.squaredNorm();
    double ar = 0.0, ai = 0.0, p = 1.0;
    for (const auto& c : coeffs) {
      ar += c.real() * p;
      ai += c.imag() * p;
      p *= s;
    }
    Eigen::VectorXd out(2);
    out(0) = ar * u(0) - ai * u(1);
    out(1) = ai * u(0) + ar * u(1);
    return out;
  };
  sys.df = [coeffs](const Eigen::VectorXd& u) {
    const double s = u.squaredNorm();
    double ar = 0.0, ai = 0.0, dar = 0.0, dai = 0.0, p = 1.0;
    for (size_t k = 0; k < coeffs.size(); ++k) {
      ar += coeffs[k].real() * p;
      ai += coeffs[k].imag() * p;
      if (k >= 1) {
        dar += k * coeffs[k].real() * std::pow(s, k - 1);
        dai += k * coeffs[k].imag() * std::pow(s, k - 1);
      }
      p *= s;
    }
    Eigen::MatrixXd M(2, 2);
    M(0, 0) = ar;
    M(0, 1) = -ai;
    M(1, 0) = ai;
    M(1, 1) = ar;
    // chain rule through s = |u|^2
    Eigen::Vector2d Mu(dar * u(0) - dai * u(1), dai * u(0) + dar * u(1));
    M += 2.0 * Mu * u.transpose();
    return M;
  };
  return sys;
}

}  // namespace

void validate_system(const ReactionDiffusionSystem& sys, unsigned seed) {
  if (sys.dimension < 2) throw DomainError("system: dimension must be >= 2");
  if (sys.D.size() != sys.dimension || (sys.D.array() <= 0.0).any())
    throw DomainError("system: D must be diagonal positive of matching size");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd u(sys.dimension);
    for (int i = 0; i < sys.dimension; ++i) u(i) = dist(rng);
    const Eigen::MatrixXd J = sys.df(u);
    const double h = 1e-6;
    for (int j = 0; j < sys.dimension; ++j) {
      Eigen::VectorXd up = u, um = u;
      up(j) += h;
      um(j) -= h;
      Eigen::VectorXd col = (sys.f(up) - sys.f(um)) / (2.0 * h);
      if ((col - J.col(j)).cwiseAbs().maxCoeff() > 1e-6 * (1.0 + J.cwiseAbs().maxCoeff()))
        throw DomainError("system: Jacobian inconsistent with finite differences");
    }
  }
}

ReactionDiffusionSystem lambda_omega(const LambdaOmegaParams& params) {
  if ((params.D.array() <= 0.0).any()) throw DomainError("lambda_omega: D must be positive");
  return polynomial_gl_system({{1.0, params.omega0}, {-1.0, -params.gamma}}, params.D,
                              "lambda-omega");
}

ReactionDiffusionSystem cgl_quintic(const CGLQuinticParams& params) {
  if ((params.D.array() <= 0.0).any()) throw DomainError("cgl_quintic: D must be positive");
  if (params.c5.real() > 0.0)
    throw DomainError("cgl_quintic: Re(c5) must be <= 0 for bounded dynamics");
  return polynomial_gl_system({params.c1, params.c3, params.c5}, params.D, "cgl-quintic");
}

HomogeneousOscillation homogeneous_oscillation(const LambdaOmegaParams& params) {
  return {1.0, params.omega0 - params.gamma};
}

HomogeneousOscillation homogeneousOscillation_from(const std::complex<double>& c1,
                                                   const std::complex<double>& c3,
                                                   const std::complex<double>& c5) {
  // positive root of c1r + c3r s + c5r s^2 = 0 with s = r^2
  const double a = c5.real(), b = c3.real(), c = c1.real();
  double s = 0.0;
  if (a == 0.0) {
    if (b == 0.0) throw DomainError("homogeneous oscillation: degenerate amplitude equation");
    s = -c / b;
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) throw DomainError("homogeneous oscillation: no real amplitude");
    const double s1 = (-b + std::sqrt(disc)) / (2.0 * a);
    const double s2 = (-b - std::sqrt(disc)) / (2.0 * a);
    s = std::max(s1, s2) > 0.0 ? std::max(s1, s2) : std::min(s1, s2);
    if (s1 > 0.0 && s2 > 0.0) s = std::min(s1, s2);  // branch connected to the cubic limit
  }
  if (!(s > 0.0)) throw DomainError("homogeneous oscillation: no positive amplitude");
  const double omega = c1.imag() + c3.imag() * s + c5.imag() * s * s;
  return {std::sqrt(s), omega};
}

HomogeneousOscillation homogeneous_oscillation(const CGLQuinticParams& params) {
  return homogeneousOscillation_from(params.c1, params.c3, params.c5);
}

}  // namespace condef
