#pragma once

// Small statistics toolkit for the Monte Carlo layer.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace pinlab::stats {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Mean computed relative to the first element, so a constant input returns
/// that constant exactly.
inline double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean: empty input");
  const double ref = x.front();
  double s = 0.0;
  for (double v : x) s += v - ref;
  return ref + s / static_cast<double>(x.size());
}

inline double variance(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("variance: need two values");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

inline double stderr_of_mean(std::span<const double> x) { return std::sqrt(variance(x) / static_cast<double>(x.size())); }

/// log of the mean of exp(x_i). Exact for constant input.
inline double log_mean_exp(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("log_mean_exp: empty input");
  const double mx = *std::max_element(x.begin(), x.end());
  if (mx == -std::numeric_limits<double>::infinity()) return mx;
  double s = 0.0;
  for (double v : x) s += std::exp(v - mx);
  return mx + std::log(s / static_cast<double>(x.size()));
}

/// Unbiased k-statistics k2, k3, k4.
struct KStatistics {
  double k2 = 0.0, k3 = 0.0, k4 = 0.0;
};

inline KStatistics k_statistics(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 4) throw std::invalid_argument("k_statistics: need four values");
  const double m = mean(x);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - m;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  KStatistics k;
  k.k2 = n * m2 / (n - 1);
  k.k3 = n * n * m3 / ((n - 1) * (n - 2));
  k.k4 = n * n * ((n + 1) * m4 - 3 * (n - 1) * m2 * m2) / ((n - 1) * (n - 2) * (n - 3));
  return k;
}

/// Grouped jackknife standard error of a statistic of the sample.
inline double jackknife_stderr(std::span<const double> x, const std::function<double(std::span<const double>)>& stat,
                               int groups = 20) {
  const std::size_t n = x.size();
  groups = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(groups), n));
  if (groups < 2) throw std::invalid_argument("jackknife_stderr: need two groups");
  std::vector<double> loo;
  std::vector<double> rest;
  rest.reserve(n);
  for (int g = 0; g < groups; ++g) {
    rest.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (static_cast<int>(i % static_cast<std::size_t>(groups)) != g) rest.push_back(x[i]);
    loo.push_back(stat(rest));
  }
  const double m = mean(loo);
  double s = 0.0;
  for (double v : loo) s += (v - m) * (v - m);
  const double gd = groups;
  return std::sqrt((gd - 1) / gd * s);
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope * x.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit: need matching inputs of size >= 2");
  const double n = static_cast<double>(x.size());
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");
  LinearFit f;
  f.points = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    rss += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - rss / syy : 1.0;
  if (x.size() > 2) {
    const double s2 = rss / (n - 2);
    f.slope_stderr = std::sqrt(s2 / sxx);
    f.intercept_stderr = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  }
  return f;
}

/// Kolmogorov distance between the lattice law {(x_i, w_i)} (x sorted,
/// weights summing to one) and the standard normal, checking both sides of
/// every jump.
inline double ks_lattice(std::span<const double> x, std::span<const double> w) {
  double cdf = 0.0;
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double phi = normal_cdf(x[i]);
    d = std::max(d, std::abs(phi - cdf));
    cdf += w[i];
    d = std::max(d, std::abs(std::min(cdf, 1.0) - phi));
  }
  return d;
}

/// Kolmogorov distance between the empirical law of the sample, standardized
/// by its own mean and standard deviation, and the standard normal.
inline double ks_standardized(std::span<const double> sample) {
  if (sample.size() < 2) throw std::invalid_argument("ks_standardized: need two values");
  const double m = mean(sample);
  const double s = std::sqrt(variance(sample));
  if (!(s > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> z(sample.begin(), sample.end());
  for (auto& v : z) v = (v - m) / s;
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double phi = normal_cdf(z[i]);
    d = std::max({d, (i + 1) / n - phi, phi - i / n});
  }
  return d;
}

/// Upper end of the Wilson score interval for k successes out of n.
inline double wilson_upper(std::size_t k, std::size_t n, double z = 1.96) {
  if (n == 0) throw std::invalid_argument("wilson_upper: n must be positive");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double centre = p + z2 / (2 * nn);
  const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn));
  return std::min(1.0, (centre + half) / (1 + z2 / nn));
}

}  // namespace pinlab::stats
