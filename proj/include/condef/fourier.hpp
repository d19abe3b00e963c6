#pragma once

#include <Eigen/Dense>
#include <complex>

namespace condef {

// Helpers for 2*pi-periodic grids with M uniform points tau_j = 2*pi*j/M, M even.
namespace fourier {

Eigen::VectorXd grid(int M);

// Spectral differentiation matrices (exact on trigonometric polynomials).
Eigen::MatrixXd diff_matrix(int M);
Eigen::MatrixXd diff2_matrix(int M);

// DFT coefficients c_n, n = -M/2 .. M/2-1, of real samples; reality gives
// c_{-n} = conj(c_n).
Eigen::VectorXcd coefficients(const Eigen::VectorXd& samples);
Eigen::VectorXd from_coefficients(const Eigen::VectorXcd& coeffs);

// Samples of u(tau + alpha) from samples of u; the Nyquist mode is treated as
// cos(M/2 tau) so the shift of a real signal stays real.
Eigen::VectorXd shift(const Eigen::VectorXd& samples, double alpha);

// Trigonometric interpolation at an arbitrary point.
double interpolate(const Eigen::VectorXd& samples, double tau);

}  // namespace fourier
}  // namespace condef
