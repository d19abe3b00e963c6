#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace condef {

// Scalar saddle-node field  y' = eps^2 + y^2 + g(y, omega)  with omega = eps^2.
// The Taylor table of g around (0,0) must carry no constant, y, y^2, omega or
// y*omega terms; that is validated at construction.
struct SaddleField {
  std::function<double(double, double)> g;    // g(y, omega)
  std::function<double(double, double)> g_y;  // dg/dy, exact for table-built fields
  Eigen::MatrixXd g_taylor;                   // (i,j) -> coefficient of y^i omega^j
  int smoothness_order = 4;                   // r in C^r
  bool is_even_in_y = false;
  bool taylor_is_exact = false;  // true when g is the polynomial of the table
  double delta0 = 0.5;           // validity half-width in y
  double eps0 = 0.1;             // validity bound in eps
  std::string name;

  double rhs(double y, double eps) const { return eps * eps + y * y + g(y, eps * eps); }
  double rhs_dy(double y, double eps) const { return 2.0 * y + g_y(y, eps * eps); }
};

// Builds a field whose g is exactly the polynomial of the coefficient table.
// Throws DomainError when the table violates the degeneracy conditions
// g(0,0)=g_y(0,0)=g_yy(0,0)=g_omega(0,0)=g_{y omega}(0,0)=0 (tolerance 1e-12)
// or when an even flag contradicts the table.
SaddleField make_polynomial_field(const Eigen::MatrixXd& g_coeffs, const std::string& name = "");

// Convenience fields used across the test problems: g == 0, g = c*y^3, g = y^4.
SaddleField zero_field();
SaddleField cubic_field(double c = 1.0);
SaddleField quartic_field(double c = 1.0);

// Validates a user-assembled field (g callback plus table); same checks as the
// polynomial builder plus a sampled g-vs-table consistency probe near zero and,
// when is_even_in_y is set, a sampled evenness check.
void validate_field(const SaddleField& field);

}  // namespace condef
