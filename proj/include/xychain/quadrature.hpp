#pragma once

#include <cmath>
#include <complex>
#include <functional>

#include "xychain/model.hpp"

namespace xychain {

namespace detail {

template <class T>
double quad_error(const T& x) {
  if constexpr (std::is_arithmetic_v<T>) {
    return std::abs(x);
  } else if constexpr (std::is_same_v<T, std::complex<double>>) {
    return std::abs(x);
  } else {
    return x.cwiseAbs().maxCoeff();  // dense Eigen matrix
  }
}

template <class T, class F>
T simpson_recurse(const F& f, double a, double m, double b, const T& fa,
                  const T& fm, const T& fb, const T& whole, double tol,
                  int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const T flm = f(lm);
  const T frm = f(rm);
  const T left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const T right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const T refined = left + right;
  if (depth <= 0)
    throw numerical_error("adaptive quadrature failed to converge");
  if (quad_error<T>(refined - whole) <= 15.0 * tol)
    return refined + (refined - whole) / 15.0;
  return simpson_recurse<T>(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse<T>(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature for scalar- or dense-matrix-valued
/// integrands; error is measured in the max norm.
template <class T, class F>
T adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 40) {
  const double m = 0.5 * (a + b);
  const T fa = f(a);
  const T fm = f(m);
  const T fb = f(b);
  const T whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_recurse<T>(f, a, m, b, fa, fm, fb, whole, tol, max_depth);
}

/// Left side of the gaussian half-line identity:
///   (1 / 2 pi i) \int e^{iEt} e^{-alpha t^2} / (t - i eps) dt,
/// integrated directly over the real line (truncated where the gaussian
/// drops below 1e-16).
std::complex<double> gaussian_halfline_lhs(double energy, double alpha, double eps,
                                           double tol = 1e-12);

/// Right side of the same identity:
///   (1 / 2 sqrt(pi alpha)) \int_0^inf e^{-eps w} e^{-(w-E)^2 / 4 alpha} dw.
/// Real, evaluated by an independent quadrature in the w variable.
double gaussian_halfline_rhs(double energy, double alpha, double eps,
                             double tol = 1e-12);

}  // namespace xychain
