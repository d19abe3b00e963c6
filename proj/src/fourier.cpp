#include "condef/fourier.hpp"

#include <cmath>

#include "condef/errors.hpp"

namespace condef {
namespace fourier {

namespace {
void require_even(int M) {
  if (M < 2 || M % 2 != 0) throw DomainError("fourier: grid size must be even and >= 2");
}
}  // namespace

Eigen::VectorXd grid(int M) {
  require_even(M);
  Eigen::VectorXd g(M);
  for (int j = 0; j < M; ++j) g(j) = 2.0 * M_PI * j / M;
  return g;
}

Eigen::MatrixXd diff_matrix(int M) {
  require_even(M);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(M, M);
  for (int j = 0; j < M; ++j)
    for (int k = 0; k < M; ++k) {
      if (j == k) continue;
      const int d = j - k;
      D(j, k) = 0.5 * ((d % 2 == 0) ? 1.0 : -1.0) / std::tan(M_PI * d / M);
    }
  return D;
}

Eigen::MatrixXd diff2_matrix(int M) {
  require_even(M);
  Eigen::MatrixXd D2 = Eigen::MatrixXd::Zero(M, M);
  const double h = 2.0 * M_PI / M;
  for (int j = 0; j < M; ++j)
    for (int k = 0; k < M; ++k) {
      if (j == k) {
        D2(j, k) = -M * M / 12.0 - 1.0 / 6.0;
      } else {
        const int d = j - k;
        const double s = std::sin(0.5 * d * h);
        D2(j, k) = -((d % 2 == 0) ? 1.0 : -1.0) * 0.5 / (s * s);
      }
    }
  return D2;
}

Eigen::VectorXcd coefficients(const Eigen::VectorXd& samples) {
  const int M = static_cast<int>(samples.size());
  require_even(M);
  Eigen::VectorXcd c(M);
  for (int n = -M / 2; n < M / 2; ++n) {
    std::complex<double> acc(0.0, 0.0);
    for (int j = 0; j < M; ++j) {
      const double phi = -2.0 * M_PI * n * j / M;
      acc += samples(j) * std::complex<double>(std::cos(phi), std::sin(phi));
    }
    c(n + M / 2) = acc / static_cast<double>(M);
  }
  return c;
}

Eigen::VectorXd from_coefficients(const Eigen::VectorXcd& coeffs) {
  const int M = static_cast<int>(coeffs.size());
  require_even(M);
  Eigen::VectorXd u(M);
  for (int j = 0; j < M; ++j) {
    std::complex<double> acc(0.0, 0.0);
    for (int n = -M / 2; n < M / 2; ++n) {
      const double phi = 2.0 * M_PI * n * j / M;
      acc += coeffs(n + M / 2) * std::complex<double>(std::cos(phi), std::sin(phi));
    }
    u(j) = acc.real();
  }
  return u;
}

Eigen::VectorXd shift(const Eigen::VectorXd& samples, double alpha) {
  const int M = static_cast<int>(samples.size());
  require_even(M);
  Eigen::VectorXcd c = coefficients(samples);
  Eigen::VectorXd out(M);
  for (int j = 0; j < M; ++j) {
    const double tau = 2.0 * M_PI * j / M + alpha;
    double acc = 0.0;
    for (int n = -M / 2 + 1; n < M / 2; ++n) {
      const std::complex<double> e(std::cos(n * tau), std::sin(n * tau));
      acc += (c(n + M / 2) * e).real();
    }
    // Nyquist mode as cos(M/2 tau)
    acc += c(0).real() * std::cos(0.5 * M * tau);
    out(j) = acc;
  }
  return out;
}

double interpolate(const Eigen::VectorXd& samples, double tau) {
  const int M = static_cast<int>(samples.size());
  require_even(M);
  Eigen::VectorXcd c = coefficients(samples);
  double acc = 0.0;
  for (int n = -M / 2 + 1; n < M / 2; ++n) {
    const std::complex<double> e(std::cos(n * tau), std::sin(n * tau));
    acc += (c(n + M / 2) * e).real();
  }
  acc += c(0).real() * std::cos(0.5 * M * tau);
  return acc;
}

}  // namespace fourier
}  // namespace condef
