#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "xychain/model.hpp"

namespace xychain {

/// Streaming mean/variance accumulator with an associative merge, so
/// ensemble reductions give the same result for any worker partition when
/// folded in a fixed order.
struct WelfordAccumulator {
  long long count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  void merge(const WelfordAccumulator& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    const double total = static_cast<double>(count + other.count);
    const double delta = other.mean - mean;
    m2 += other.m2 + delta * delta * (static_cast<double>(count) *
                                      static_cast<double>(other.count) / total);
    mean += delta * (static_cast<double>(other.count) / total);
    count += other.count;
  }

  double variance() const {
    return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
  }

  double std_error() const {
    return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
  }
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  bool ok = false;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

/// Exponential-decay fit of positive means against integer distance:
/// log(mean) regressed on d over [d_min, d_max]. amplitude = exp(intercept),
/// rate = -slope. Throws numerical_error when fewer than three usable
/// distances fall inside the window.
struct DecayFit {
  double amplitude = 0.0;
  double rate = 0.0;
  double r2 = 0.0;
  int d_min = 0;
  int d_max = 0;
  int points = 0;
  bool ok = false;
};

DecayFit fit_exponential_decay(const std::vector<std::pair<int, double>>& means,
                               int d_min, int d_max);

/// Least-squares slope of y = slope * x through the origin.
double slope_through_origin(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace xychain
