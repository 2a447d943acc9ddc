#include "xychain/quadrature.hpp"

namespace xychain {

namespace {
constexpr double kGaussTail = 36.85;  // exp(-36.85) < 1e-16
}

std::complex<double> gaussian_halfline_lhs(double energy, double alpha, double eps,
                                           double tol) {
  using cd = std::complex<double>;
  if (!(alpha > 0.0) || !(eps > 0.0))
    throw config_error("gaussian identity requires alpha > 0 and eps > 0");
  const double t_cut = std::sqrt(kGaussTail / alpha);
  const auto integrand = [&](double t) -> cd {
    const cd numerator = std::polar(std::exp(-alpha * t * t), energy * t);
    return numerator / cd(t, -eps);
  };
  const cd raw = adaptive_simpson<cd>(integrand, -t_cut, 0.0, tol) +
                 adaptive_simpson<cd>(integrand, 0.0, t_cut, tol);
  return raw / cd(0.0, 2.0 * M_PI);
}

double gaussian_halfline_rhs(double energy, double alpha, double eps, double tol) {
  if (!(alpha > 0.0) || !(eps > 0.0))
    throw config_error("gaussian identity requires alpha > 0 and eps > 0");
  const double w_cut = std::max(0.0, energy) + 2.0 * std::sqrt(alpha * kGaussTail);
  const auto integrand = [&](double w) -> double {
    const double d = w - energy;
    return std::exp(-eps * w - d * d / (4.0 * alpha));
  };
  const double raw = adaptive_simpson<double>(integrand, 0.0, w_cut, tol);
  return raw / (2.0 * std::sqrt(M_PI * alpha));
}

}  // namespace xychain
