#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "streamsim/workload.hpp"

namespace streamsim {

// Dense bucketed series. counts[i] == 0 marks an empty bucket; its value is
// meaningless and consumers must skip or carry forward explicitly.
struct TimeSeries {
  double bucket_width_s = 60.0;
  double origin_s = 0.0;
  std::vector<double> values;
  std::vector<std::size_t> counts;

  std::size_t size() const { return values.size(); }
  double bucket_start(std::size_t i) const {
    return origin_s + static_cast<double>(i) * bucket_width_s;
  }
};

namespace detail {

inline TimeSeries bucket_frame(const std::vector<std::pair<double, double>>& samples,
                               double width) {
  TimeSeries ts;
  ts.bucket_width_s = width;
  if (width <= 0.0) throw std::invalid_argument("bucketize: bucket width must be > 0");
  if (samples.empty()) return ts;
  double lo = samples[0].first, hi = samples[0].first;
  for (const auto& [t, v] : samples) {
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  ts.origin_s = lo;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / width)) + 1;
  ts.values.assign(n, 0.0);
  ts.counts.assign(n, 0);
  return ts;
}

}  // namespace detail

// Per-bucket mean of (time, value) samples.
inline TimeSeries bucketize_mean(const std::vector<std::pair<double, double>>& samples,
                                 double width) {
  TimeSeries ts = detail::bucket_frame(samples, width);
  for (const auto& [t, v] : samples) {
    auto b = static_cast<std::size_t>(std::floor((t - ts.origin_s) / width));
    if (b >= ts.size()) b = ts.size() - 1;
    ts.values[b] += v;
    ++ts.counts[b];
  }
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (ts.counts[i] > 0) ts.values[i] /= static_cast<double>(ts.counts[i]);
  return ts;
}

// Per-bucket sample count (value is the count; counts[] is identical).
inline TimeSeries bucketize_count(const std::vector<double>& times, double width) {
  std::vector<std::pair<double, double>> samples;
  samples.reserve(times.size());
  for (double t : times) samples.emplace_back(t, 1.0);
  TimeSeries ts = detail::bucket_frame(samples, width);
  for (double t : times) {
    auto b = static_cast<std::size_t>(std::floor((t - ts.origin_s) / width));
    if (b >= ts.size()) b = ts.size() - 1;
    ++ts.counts[b];
  }
  for (std::size_t i = 0; i < ts.size(); ++i)
    ts.values[i] = static_cast<double>(ts.counts[i]);
  return ts;
}

// y0 = x0; yt = alpha*xt + (1-alpha)*y(t-1). Empty buckets carry the previous
// EMA forward.
inline TimeSeries ema(const TimeSeries& x, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("ema: alpha must be in (0, 1]");
  TimeSeries y = x;
  bool seeded = false;
  double prev = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x.counts[i] == 0) {
      if (seeded) {
        y.values[i] = prev;
        y.counts[i] = 1;  // carried forward, usable downstream
      }
      continue;
    }
    prev = seeded ? alpha * x.values[i] + (1.0 - alpha) * prev : x.values[i];
    seeded = true;
    y.values[i] = prev;
  }
  return y;
}

// Absolute first differences, length n-1. Pairs with an empty side are marked
// empty in the result.
inline TimeSeries variation(const TimeSeries& x) {
  if (x.size() < 2) throw std::invalid_argument("variation: series length must be >= 2");
  TimeSeries d;
  d.bucket_width_s = x.bucket_width_s;
  d.origin_s = x.origin_s + x.bucket_width_s;
  d.values.assign(x.size() - 1, 0.0);
  d.counts.assign(x.size() - 1, 0);
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x.counts[i] == 0 || x.counts[i - 1] == 0) continue;
    d.values[i - 1] = std::abs(x.values[i] - x.values[i - 1]);
    d.counts[i - 1] = 1;
  }
  return d;
}

struct LagCorrelation {
  int lag = 0;
  std::optional<double> r;  // empty when variance vanishes at this lag
};

// Pearson r between a(t) and b(t+lag), lag = 0..max_lag. Buckets empty in
// either series are excluded pairwise.
inline std::vector<LagCorrelation> lagged_pearson(const TimeSeries& a, const TimeSeries& b,
                                                  int max_lag) {
  if (a.bucket_width_s != b.bucket_width_s)
    throw std::invalid_argument("lagged_pearson: bucket widths differ");
  std::vector<LagCorrelation> out;
  for (int lag = 0; lag <= max_lag; ++lag) {
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i + static_cast<std::size_t>(lag) < b.size() && i < a.size(); ++i) {
      const std::size_t j = i + static_cast<std::size_t>(lag);
      if (a.counts[i] == 0 || b.counts[j] == 0) continue;
      const double x = a.values[i], y = b.values[j];
      sa += x;
      sb += y;
      saa += x * x;
      sbb += y * y;
      sab += x * y;
      ++n;
    }
    LagCorrelation c{lag, std::nullopt};
    if (n >= 3) {
      const double nn = static_cast<double>(n);
      const double va = saa - sa * sa / nn;
      const double vb = sbb - sb * sb / nn;
      if (va > 0.0 && vb > 0.0) {
        double r = (sab - sa * sb / nn) / std::sqrt(va * vb);
        c.r = std::clamp(r, -1.0, 1.0);
      }
    } else if (n < 3) {
      throw std::invalid_argument("lagged_pearson: fewer than 3 overlapping buckets at lag " +
                                  std::to_string(lag));
    }
    out.push_back(c);
  }
  return out;
}

struct CorrelationReport {
  TimeSeries volume;          // items per bucket
  TimeSeries score_mean;      // mean sentiment score per bucket
  TimeSeries score_ema;
  TimeSeries score_variation;  // |diff| of score_mean
  std::vector<LagCorrelation> lags;  // score(t) vs volume(t+lag)
};

// Bucketed volume/sentiment series plus the lag table, over item post times.
inline CorrelationReport report_correlation(const std::vector<WorkItem>& items,
                                            double bucket_width_s = 60.0, int max_lag = 10,
                                            double ema_alpha = 1.0) {
  CorrelationReport rep;
  std::vector<double> times;
  std::vector<std::pair<double, double>> scores;
  times.reserve(items.size());
  scores.reserve(items.size());
  for (const auto& it : items) {
    times.push_back(it.post_time);
    scores.emplace_back(it.post_time, it.sentiment.score());
  }
  rep.volume = bucketize_count(times, bucket_width_s);
  rep.score_mean = bucketize_mean(scores, bucket_width_s);
  rep.score_ema = ema(rep.score_mean, ema_alpha);
  rep.score_variation = variation(rep.score_mean);
  rep.lags = lagged_pearson(rep.score_mean, rep.volume, max_lag);
  return rep;
}

}  // namespace streamsim
