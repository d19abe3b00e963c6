#include "condef/saddle_field.hpp"

#include <cmath>

#include "condef/errors.hpp"

namespace condef {

namespace {

double eval_table(const Eigen::MatrixXd& c, double y, double w) {
  // Horner in y, plain powers in omega (tables are tiny).
  double v = 0.0;
  for (int i = static_cast<int>(c.rows()) - 1; i >= 0; --i) {
    double row = 0.0;
    for (int j = static_cast<int>(c.cols()) - 1; j >= 0; --j) row = row * w + c(i, j);
    v = v * y + row;
  }
  return v;
}

double eval_table_dy(const Eigen::MatrixXd& c, double y, double w) {
  double v = 0.0;
  for (int i = static_cast<int>(c.rows()) - 1; i >= 1; --i) {
    double row = 0.0;
    for (int j = static_cast<int>(c.cols()) - 1; j >= 0; --j) row = row * w + c(i, j);
    v = v * y + i * row;
  }
  return v;
}

void check_degeneracy(const Eigen::MatrixXd& c) {
  auto at = [&](int i, int j) {
    return (i < c.rows() && j < c.cols()) ? c(i, j) : 0.0;
  };
  const double tol = 1e-12;
  if (std::abs(at(0, 0)) > tol || std::abs(at(1, 0)) > tol || std::abs(at(2, 0)) > tol ||
      std::abs(at(0, 1)) > tol || std::abs(at(1, 1)) > tol)
    throw DomainError("saddle field: Taylor table violates the saddle-node degeneracy conditions");
}

bool table_even_in_y(const Eigen::MatrixXd& c) {
  for (int i = 1; i < c.rows(); i += 2)
    for (int j = 0; j < c.cols(); ++j)
      if (c(i, j) != 0.0) return false;
  return true;
}

}  // namespace

SaddleField make_polynomial_field(const Eigen::MatrixXd& g_coeffs, const std::string& name) {
  check_degeneracy(g_coeffs);
  SaddleField f;
  f.g_taylor = g_coeffs;
  // pad to total order 5 so downstream consumers can rely on the shape
  const int need = 6;
  if (f.g_taylor.rows() < need || f.g_taylor.cols() < need) {
    Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(std::max<int>(need, g_coeffs.rows()),
                                                   std::max<int>(need, g_coeffs.cols()));
    padded.topLeftCorner(g_coeffs.rows(), g_coeffs.cols()) = g_coeffs;
    f.g_taylor = padded;
  }
  Eigen::MatrixXd table = f.g_taylor;
  f.g = [table](double y, double w) { return eval_table(table, y, w); };
  f.g_y = [table](double y, double w) { return eval_table_dy(table, y, w); };
  f.taylor_is_exact = true;
  f.is_even_in_y = table_even_in_y(f.g_taylor);
  f.name = name;
  return f;
}

SaddleField zero_field() {
  SaddleField f = make_polynomial_field(Eigen::MatrixXd::Zero(6, 6), "g=0");
  return f;
}

SaddleField cubic_field(double c) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(6, 6);
  t(3, 0) = c;
  return make_polynomial_field(t, "g=c*y^3");
}

SaddleField quartic_field(double c) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(6, 6);
  t(4, 0) = c;
  return make_polynomial_field(t, "g=c*y^4");
}

void validate_field(const SaddleField& field) {
  if (!field.g) throw DomainError("saddle field: missing g");
  check_degeneracy(field.g_taylor);
  // sampled consistency of g against its table near the origin
  const double pts[4] = {3e-3, -2e-3, 1e-3, -4e-3};
  for (double y : pts) {
    for (double w : {1e-4, 4e-4}) {
      const double gv = field.g(y, w);
      const double tv = eval_table(field.g_taylor, y, w);
      const double scale = 1e-6 + std::abs(tv);
      if (std::abs(gv - tv) > 1e-6 * scale + 1e-12)
        throw DomainError("saddle field: g disagrees with its Taylor table near the origin");
    }
  }
  if (field.is_even_in_y) {
    for (double y : {0.05, 0.17, 0.31, 0.42}) {
      for (double w : {0.0, 1e-3, 4e-3}) {
        if (std::abs(field.g(y, w) - field.g(-y, w)) > 1e-12 * (1.0 + std::abs(field.g(y, w))))
          throw DomainError("saddle field: is_even_in_y set but g is not even");
      }
    }
  }
}

}  // namespace condef
