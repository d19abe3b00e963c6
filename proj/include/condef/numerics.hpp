#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

namespace condef {

// Composite Gauss-Legendre quadrature (20-point rule per panel). Meant for the
// smooth bounded integrands assembled inside the library; oracles in the test
// suite use an unrelated adaptive scheme.
double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels = 4);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};

// Least-squares line y ~ intercept + slope*t.
LinearFit fit_line(const std::vector<double>& t, const std::vector<double>& y);

// Least-squares polynomial of given degree; coeffs[k] multiplies t^k.
Eigen::VectorXd fit_polynomial(const std::vector<double>& t, const std::vector<double>& y,
                               int degree);
double polyfit_rms_residual(const std::vector<double>& t, const std::vector<double>& y,
                            const Eigen::VectorXd& coeffs);

double eval_polynomial(const Eigen::VectorXd& coeffs, double t);

}  // namespace condef
