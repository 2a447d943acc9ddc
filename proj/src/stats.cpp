#include "xychain/stats.hpp"

#include <algorithm>

namespace xychain {

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit fit;
  const size_t m = x.size();
  if (m != y.size() || m < 2) return fit;

  double sx = 0.0, sy = 0.0;
  for (size_t i = 0; i < m; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / static_cast<double>(m);
  const double my = sy / static_cast<double>(m);

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) return fit;

  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (size_t i = 0; i < m; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.ok = true;
  return fit;
}

DecayFit fit_exponential_decay(const std::vector<std::pair<int, double>>& means,
                               int d_min, int d_max) {
  std::vector<double> xs, ys;
  for (const auto& [d, value] : means) {
    if (d < d_min || d > d_max) continue;
    if (!(value > 0.0) || !std::isfinite(value)) continue;
    xs.push_back(static_cast<double>(d));
    ys.push_back(std::log(value));
  }
  if (xs.size() < 3)
    throw numerical_error("decay fit requires at least 3 distances in the window [" +
                          std::to_string(d_min) + ", " + std::to_string(d_max) + "]");

  const LinearFit line = least_squares(xs, ys);
  DecayFit fit;
  fit.amplitude = std::exp(line.intercept);
  fit.rate = -line.slope;
  fit.r2 = line.r2;
  fit.d_min = d_min;
  fit.d_max = d_max;
  fit.points = static_cast<int>(xs.size());
  fit.ok = line.ok;
  return fit;
}

double slope_through_origin(const std::vector<double>& x, const std::vector<double>& y) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < x.size() && i < y.size(); ++i) {
    num += x[i] * y[i];
    den += x[i] * x[i];
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace xychain
