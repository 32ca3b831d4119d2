#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "streamsim/rng.hpp"
#include "streamsim/workload.hpp"

namespace streamsim {

// One load burst: arrival rate rises linearly from the base rate to peak_rate
// over rise_s starting at event_time_s, then decays exponentially with time
// constant decay_s.
struct Burst {
  double event_time_s = 0.0;
  double peak_rate = 0.0;  // items/s at the top of the burst
  double rise_s = 60.0;
  double decay_s = 120.0;
};

struct SyntheticSpec {
  double duration_s = 0.0;
  double base_rate = 0.0;  // items/s
  std::vector<Burst> bursts;

  // The sentiment signal leads each burst: item scores drawn in the window
  // [event_time - signal_lead_s, event_time + rise_s] use burst_score_mean,
  // then relax linearly back to baseline over relax_s.
  double signal_lead_s = 90.0;
  double baseline_score_mean = 0.3;
  double baseline_score_sigma = 0.1;
  double burst_score_mean = 0.9;
  double relax_s = 0.0;

  std::vector<WorkloadClass> classes;
  std::uint64_t rng_seed = 1;

  void validate() const {
    if (!(duration_s >= 0.0)) throw std::invalid_argument("synthetic: duration_s must be >= 0");
    if (!(base_rate >= 0.0)) throw std::invalid_argument("synthetic: base_rate must be >= 0");
    if (!(signal_lead_s >= 0.0)) throw std::invalid_argument("synthetic: signal_lead_s must be >= 0");
    if (!(relax_s >= 0.0)) throw std::invalid_argument("synthetic: relax_s must be >= 0");
    for (const auto& b : bursts) {
      if (b.event_time_s < 0.0 || b.event_time_s > duration_s)
        throw std::invalid_argument("synthetic: burst event_time_s outside [0, duration_s]");
      if (b.peak_rate < 0.0) throw std::invalid_argument("synthetic: burst peak_rate must be >= 0");
      if (b.rise_s < 0.0 || b.decay_s <= 0.0)
        throw std::invalid_argument("synthetic: burst rise_s/decay_s invalid");
    }
    if (classes.empty()) throw std::invalid_argument("synthetic: at least one class required");
    double total = 0.0;
    for (const auto& c : classes) total += c.proportion;
    if (std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("synthetic: class proportions must sum to 1");
    if (!(baseline_score_sigma >= 0.0))
      throw std::invalid_argument("synthetic: baseline_score_sigma must be >= 0");
  }

  double rate_at(double t) const {
    double r = base_rate;
    for (const auto& b : bursts) {
      const double extra = b.peak_rate - base_rate;
      if (extra <= 0.0 || t < b.event_time_s) continue;
      const double dt = t - b.event_time_s;
      if (dt <= b.rise_s)
        r += b.rise_s > 0.0 ? extra * dt / b.rise_s : extra;
      else
        r += extra * std::exp(-(dt - b.rise_s) / b.decay_s);
    }
    return r;
  }

  // Target mean of the scalar sentiment score at post time t.
  double score_mean_at(double t) const {
    for (const auto& b : bursts) {
      const double lo = b.event_time_s - signal_lead_s;
      const double hi = b.event_time_s + b.rise_s;
      if (t >= lo && t <= hi) return burst_score_mean;
      if (relax_s > 0.0 && t > hi && t < hi + relax_s) {
        const double f = (t - hi) / relax_s;
        return burst_score_mean + f * (baseline_score_mean - burst_score_mean);
      }
    }
    return baseline_score_mean;
  }
};

namespace detail {

inline SentimentTriple triple_from_score(double s, std::mt19937_64& rng) {
  s = std::clamp(s, 0.0, 1.0);
  const double u = uniform01(rng);  // split of the non-neutral mass
  SentimentTriple t;
  t.p_pos = s * u;
  t.p_neg = s * (1.0 - u);
  t.p_neu = 1.0 - s;
  return t;
}

}  // namespace detail

// Non-homogeneous Poisson arrivals by thinning, class by proportion, demand
// from the class distribution, sentiment score from the spec's burst-leading
// signal. Bitwise deterministic for a fixed spec.
inline Workload generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Workload w;
  w.classes = spec.classes;
  if (spec.duration_s <= 0.0) return w;

  double rate_max = spec.base_rate;
  for (const auto& b : spec.bursts) rate_max = std::max(rate_max, b.peak_rate);
  if (rate_max <= 0.0) return w;

  std::mt19937_64 rng(spec.rng_seed);

  // class selection cdf
  std::vector<double> class_cdf;
  double acc = 0.0;
  for (const auto& c : spec.classes) {
    acc += c.proportion;
    class_cdf.push_back(acc);
  }

  std::uint64_t next_id = 1;
  double t = 0.0;
  for (;;) {
    t += -std::log1p(-uniform01(rng)) / rate_max;
    if (t >= spec.duration_s) break;
    if (uniform01(rng) * rate_max > spec.rate_at(t)) continue;  // thinned out

    WorkItem it;
    it.id = next_id++;
    it.post_time = t;

    const double cu = uniform01(rng);
    std::size_t ci = 0;
    while (ci + 1 < class_cdf.size() && cu >= class_cdf[ci]) ++ci;
    it.class_id = spec.classes[ci].class_id;
    it.cycles_required = spec.classes[ci].demand.sample(rng);
    it.cycles_remaining = it.cycles_required;

    // Box-Muller would burn draws unevenly; a simple 12-uniform sum keeps the
    // stream layout fixed per item.
    double z = -6.0;
    for (int i = 0; i < 12; ++i) z += uniform01(rng);
    const double s = spec.score_mean_at(t) + spec.baseline_score_sigma * z;
    it.sentiment = detail::triple_from_score(s, rng);

    w.items.push_back(it);
  }
  return w;
}

}  // namespace streamsim
