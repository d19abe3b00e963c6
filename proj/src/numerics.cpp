#include "condef/numerics.hpp"

#include <cmath>

#include "condef/errors.hpp"

namespace condef {

namespace {
// 20-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; symmetric).
constexpr double kGL20x[10] = {
    0.0765265211334973, 0.2277858511416451, 0.3737060887154195, 0.5108670019508271,
    0.6360536807265150, 0.7463319064601508, 0.8391169718222188, 0.9122344282513259,
    0.9639719272779138, 0.9931285991850949};
constexpr double kGL20w[10] = {
    0.1527533871307258, 0.1491729864726037, 0.1420961093183820, 0.1316886384491766,
    0.1181945319615184, 0.1019301198172404, 0.0832767415767048, 0.0626720483341091,
    0.0406014298003869, 0.0176140071391521};
}  // namespace

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels) {
  double total = 0.0;
  const double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * w;
    const double mid = lo + 0.5 * w;
    const double half = 0.5 * w;
    double s = 0.0;
    for (int i = 0; i < 10; ++i) {
      s += kGL20w[i] * (f(mid + half * kGL20x[i]) + f(mid - half * kGL20x[i]));
    }
    total += s * half;
  }
  return total;
}

LinearFit fit_line(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 2) throw SolverError("fit_line: need >= 2 samples");
  const int n = static_cast<int>(t.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (int i = 0; i < n; ++i) {
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
  }
  const double det = n * stt - st * st;
  if (det == 0.0) throw SolverError("fit_line: degenerate abscissae");
  LinearFit fit;
  fit.slope = (n * sty - st * sy) / det;
  fit.intercept = (sy - fit.slope * st) / n;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * t[i];
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / n);
  return fit;
}

Eigen::VectorXd fit_polynomial(const std::vector<double>& t, const std::vector<double>& y,
                               int degree) {
  if (t.size() != y.size() || static_cast<int>(t.size()) < degree + 1)
    throw SolverError("fit_polynomial: not enough samples");
  const int n = static_cast<int>(t.size());
  Eigen::MatrixXd A(n, degree + 1);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    double p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      A(i, k) = p;
      p *= t[i];
    }
    b(i) = y[i];
  }
  return A.colPivHouseholderQr().solve(b);
}

double polyfit_rms_residual(const std::vector<double>& t, const std::vector<double>& y,
                            const Eigen::VectorXd& coeffs) {
  double ss = 0.0;
  for (size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - eval_polynomial(coeffs, t[i]);
    ss += r * r;
  }
  return std::sqrt(ss / t.size());
}

double eval_polynomial(const Eigen::VectorXd& coeffs, double t) {
  double v = 0.0;
  for (int k = static_cast<int>(coeffs.size()) - 1; k >= 0; --k) v = v * t + coeffs(k);
  return v;
}

}  // namespace condef
