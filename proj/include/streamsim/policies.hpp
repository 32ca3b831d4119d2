#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "streamsim/workload.hpp"

namespace streamsim {

// What a policy sees at an adaptation boundary. completed_scores holds
// (post_time, sentiment score) of items already finished, keyed by post time.
struct PolicyObservation {
  double clock_s = 0.0;
  int current_cpus = 1;  // active plus committed-but-provisioning
  double cpu_usage_window = 0.0;
  std::size_t in_system_count = 0;
  double sla_s = 300.0;
  double freq_hz = 2.0e9;
  std::span<const std::pair<double, double>> completed_scores;
};

struct ScaleDecision {
  int delta_cpus = 0;
};

class ScalingPolicy {
 public:
  virtual ~ScalingPolicy() = default;
  virtual ScaleDecision decide(const PolicyObservation& obs) = 0;
  virtual std::string name() const = 0;
};

// ---------------------------------------------------------------- threshold

struct ThresholdPolicyCfg {
  double upper = 0.9;
  double lower = 0.5;

  void validate() const {
    if (!(lower > 0.0 && lower < upper && upper <= 1.0))
      throw std::invalid_argument("threshold policy: need 0 < lower < upper <= 1");
  }
};

inline ScaleDecision threshold_decide(const ThresholdPolicyCfg& cfg,
                                      const PolicyObservation& obs) {
  if (obs.cpu_usage_window > cfg.upper) return {+1};
  if (obs.cpu_usage_window < cfg.lower) return {-1};
  return {0};
}

// --------------------------------------------------------------------- load

struct LoadPolicyCfg {
  double quantile = 0.99999;                  // of each class's demand distribution
  std::vector<WorkloadClass> classes;         // training-data demand + proportions

  void validate() const {
    if (!(quantile > 0.0 && quantile < 1.0))
      throw std::invalid_argument("load policy: quantile must be in (0, 1)");
    double total = 0.0;
    for (const auto& c : classes) total += c.proportion;
    if (classes.empty() || std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("load policy: class proportions must sum to 1");
  }

  // Per-item demand estimate: class quantiles weighted by class proportion.
  double demand_quantile_cycles() const {
    double d = 0.0;
    for (const auto& c : classes) d += c.proportion * c.demand.quantile(quantile);
    return d;
  }
};

// Expected time to drain everything currently in the system.
inline double load_expected_delay(const LoadPolicyCfg& cfg, const PolicyObservation& obs) {
  if (obs.current_cpus < 1) throw std::invalid_argument("load policy: current_cpus < 1");
  const double demand = static_cast<double>(obs.in_system_count) * cfg.demand_quantile_cycles();
  return demand / (static_cast<double>(obs.current_cpus) * obs.freq_hz);
}

inline ScaleDecision load_decide(const LoadPolicyCfg& cfg, const PolicyObservation& obs) {
  const double expected = load_expected_delay(cfg, obs);
  if (expected > obs.sla_s) {
    const auto target = static_cast<int>(
        std::ceil(static_cast<double>(obs.current_cpus) * expected / obs.sla_s));
    return {target - obs.current_cpus};
  }
  if (expected < obs.sla_s / 2.0) return {-1};
  return {0};
}

// ------------------------------------------------------------------ appdata

struct AppdataPolicyCfg {
  double window_s = 120.0;
  double jump_threshold = 0.5;
  int extra_cpus = 1;
  double cooldown_s = 120.0;

  void validate() const {
    if (!(window_s > 0.0)) throw std::invalid_argument("appdata policy: window_s must be > 0");
    if (extra_cpus < 1) throw std::invalid_argument("appdata policy: extra_cpus must be >= 1");
    if (cooldown_s < 0.0) throw std::invalid_argument("appdata policy: cooldown_s must be >= 0");
  }
};

struct AppdataState {
  double last_trigger_s = -std::numeric_limits<double>::infinity();
};

// Compares the mean score of items posted in the last window against the
// window before it; a jump of jump_threshold or more allocates extra_cpus.
// Means are over completed items bucketed by post time. Empty windows never
// trigger.
inline ScaleDecision appdata_decide(const AppdataPolicyCfg& cfg, AppdataState& state,
                                    const PolicyObservation& obs) {
  if (obs.clock_s - state.last_trigger_s < cfg.cooldown_s) return {0};
  const double w = cfg.window_s;
  double sum_a = 0.0, sum_b = 0.0;
  std::size_t n_a = 0, n_b = 0;
  for (const auto& [post, score] : obs.completed_scores) {
    if (post >= obs.clock_s - w && post < obs.clock_s) {
      sum_a += score;
      ++n_a;
    } else if (post >= obs.clock_s - 2.0 * w && post < obs.clock_s - w) {
      sum_b += score;
      ++n_b;
    }
  }
  if (n_a == 0 || n_b == 0) return {0};
  if (sum_a / static_cast<double>(n_a) - sum_b / static_cast<double>(n_b) >=
      cfg.jump_threshold) {
    state.last_trigger_s = obs.clock_s;
    return {cfg.extra_cpus};
  }
  return {0};
}

// Appdata runs alongside load: scale-out deltas add, appdata never pulls the
// decision negative, and a detected peak overrides load's single-CPU release.
inline ScaleDecision composite_decide(const LoadPolicyCfg& load_cfg,
                                      const AppdataPolicyCfg& app_cfg, AppdataState& state,
                                      const PolicyObservation& obs) {
  const ScaleDecision load = load_decide(load_cfg, obs);
  const ScaleDecision app = appdata_decide(app_cfg, state, obs);
  if (app.delta_cpus > 0) return {std::max(load.delta_cpus, 0) + app.delta_cpus};
  return load;
}

// ----------------------------------------------------- ScalingPolicy wrappers

class NullPolicy final : public ScalingPolicy {
 public:
  ScaleDecision decide(const PolicyObservation&) override { return {0}; }
  std::string name() const override { return "none"; }
};

class ThresholdPolicy final : public ScalingPolicy {
 public:
  explicit ThresholdPolicy(ThresholdPolicyCfg cfg) : cfg_(cfg) { cfg_.validate(); }
  ScaleDecision decide(const PolicyObservation& obs) override {
    return threshold_decide(cfg_, obs);
  }
  std::string name() const override { return "threshold"; }

 private:
  ThresholdPolicyCfg cfg_;
};

class LoadPolicy final : public ScalingPolicy {
 public:
  explicit LoadPolicy(LoadPolicyCfg cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }
  ScaleDecision decide(const PolicyObservation& obs) override {
    return load_decide(cfg_, obs);
  }
  std::string name() const override { return "load"; }

 private:
  LoadPolicyCfg cfg_;
};

class AppdataPolicy final : public ScalingPolicy {
 public:
  AppdataPolicy(LoadPolicyCfg load_cfg, AppdataPolicyCfg app_cfg)
      : load_cfg_(std::move(load_cfg)), app_cfg_(app_cfg) {
    load_cfg_.validate();
    app_cfg_.validate();
  }
  ScaleDecision decide(const PolicyObservation& obs) override {
    return composite_decide(load_cfg_, app_cfg_, state_, obs);
  }
  std::string name() const override { return "appdata"; }

 private:
  LoadPolicyCfg load_cfg_;
  AppdataPolicyCfg app_cfg_;
  AppdataState state_;
};

}  // namespace streamsim
