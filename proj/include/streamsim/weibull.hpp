#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "streamsim/rng.hpp"

namespace streamsim {

// Two-parameter Weibull distribution used to model per-class service demand.
// Units (cycles or seconds) are carried by the caller's context.
struct Weibull {
  double shape;  // k
  double scale;  // lambda

  Weibull(double k, double lam) : shape(k), scale(lam) {
    if (!std::isfinite(k) || !std::isfinite(lam) || k <= 0.0 || lam <= 0.0)
      throw std::invalid_argument("Weibull: shape and scale must be finite and > 0");
  }

  // Inverse CDF: scale * (-ln(1-p))^(1/k). Defined on [0, 1).
  double quantile(double p) const {
    if (!(p >= 0.0 && p < 1.0))
      throw std::domain_error("Weibull::quantile: p must be in [0, 1)");
    if (p == 0.0) return 0.0;
    return scale * std::pow(-std::log1p(-p), 1.0 / shape);
  }

  // 1 - exp(-(x/scale)^k); x < 0 maps to 0 by convention.
  double cdf(double x) const {
    if (x <= 0.0) return 0.0;
    return -std::expm1(-std::pow(x / scale, shape));
  }

  double pdf(double x) const {
    if (x <= 0.0) return 0.0;
    const double z = x / scale;
    return (shape / scale) * std::pow(z, shape - 1.0) * std::exp(-std::pow(z, shape));
  }

  double mean() const { return scale * std::tgamma(1.0 + 1.0 / shape); }

  // Inverse-transform sampling; deterministic per rng state.
  double sample(std::mt19937_64& rng) const { return quantile(uniform01(rng)); }
};

struct FitReport {
  Weibull dist;
  double nrmse;              // histogram-vs-density error, normalized by empirical range
  std::size_t sample_count;
  std::size_t bins;
};

namespace detail {

// Profile log-likelihood derivative in the shape parameter:
//   g(k) = sum(x^k ln x)/sum(x^k) - 1/k - mean(ln x)
// The MLE shape is the root; scale follows in closed form.
inline void weibull_shape_sums(std::span<const double> x, double k, double& s0,
                               double& s1, double& s2) {
  s0 = s1 = s2 = 0.0;
  for (double v : x) {
    const double lx = std::log(v);
    const double xk = std::pow(v, k);
    s0 += xk;
    s1 += xk * lx;
    s2 += xk * lx * lx;
  }
}

}  // namespace detail

// Maximum-likelihood fit by Newton iteration on the shape equation. Requires
// at least 100 strictly positive, non-degenerate samples.
inline FitReport fit_weibull(std::span<const double> samples, std::size_t bins = 50) {
  const std::size_t n = samples.size();
  if (n < 100)
    throw std::invalid_argument("fit_weibull: need at least 100 samples");
  double lo = samples[0], hi = samples[0];
  for (double v : samples) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("fit_weibull: samples must be positive and finite");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo == hi)
    throw std::invalid_argument("fit_weibull: degenerate samples (all equal)");

  // Work on x/max for conditioning; scale is restored at the end.
  std::vector<double> x(samples.begin(), samples.end());
  for (double& v : x) v /= hi;

  double mean_lx = 0.0, var_lx = 0.0;
  for (double v : x) mean_lx += std::log(v);
  mean_lx /= static_cast<double>(n);
  for (double v : x) {
    const double d = std::log(v) - mean_lx;
    var_lx += d * d;
  }
  var_lx /= static_cast<double>(n);

  // Moment-of-log starting point: sd(ln X) = (pi/sqrt(6))/k.
  double k = 1.28254983016186409 / std::sqrt(std::max(var_lx, 1e-12));
  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    double s0, s1, s2;
    detail::weibull_shape_sums(x, k, s0, s1, s2);
    const double g = s1 / s0 - 1.0 / k - mean_lx;
    const double gp = (s2 * s0 - s1 * s1) / (s0 * s0) + 1.0 / (k * k);
    double step = g / gp;
    // keep the iterate positive
    if (k - step <= 0.0) step = k / 2.0;
    k -= step;
    if (std::abs(step) < 1e-12 * k) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw std::runtime_error("fit_weibull: Newton iteration did not converge (last k=" +
                             std::to_string(k) + ")");

  double s0, s1, s2;
  detail::weibull_shape_sums(x, k, s0, s1, s2);
  const double scale = hi * std::pow(s0 / static_cast<double>(n), 1.0 / k);
  Weibull fitted(k, scale);

  // NRMSE between the normalized histogram and the fitted density, normalized
  // by the range of the empirical bin heights.
  if (bins < 2) bins = 2;
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<double> hist(bins, 0.0);
  for (double v : samples) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    if (b >= bins) b = bins - 1;
    hist[b] += 1.0;
  }
  double h_lo = 1e300, h_hi = -1e300, sq = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    hist[b] /= static_cast<double>(n) * width;  // empirical density
    h_lo = std::min(h_lo, hist[b]);
    h_hi = std::max(h_hi, hist[b]);
    const double center = lo + (static_cast<double>(b) + 0.5) * width;
    const double d = hist[b] - fitted.pdf(center);
    sq += d * d;
  }
  const double rmse = std::sqrt(sq / static_cast<double>(bins));
  const double nrmse = h_hi > h_lo ? rmse / (h_hi - h_lo) : rmse;

  return FitReport{fitted, nrmse, n, bins};
}

}  // namespace streamsim
