#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <limits>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "streamsim/policies.hpp"
#include "streamsim/workload.hpp"

namespace streamsim {

struct SimConfig {
  double cpu_freq_hz = 2.0e9;
  int starting_cpus = 1;
  double step_s = 1.0;
  double sla_s = 300.0;
  double adapt_period_s = 60.0;
  double provisioning_delay_s = 60.0;
  double input_rate_cap = std::numeric_limits<double>::infinity();  // items/s
  double network_delay_s = 0.0;   // fixed at zero in this model
  double measure_from_s = 0.0;    // warmup cutoff for L / lambda / W accounting

  void validate() const {
    if (!(cpu_freq_hz > 0.0)) throw std::invalid_argument("sim: cpu_freq_hz must be > 0");
    if (starting_cpus < 1) throw std::invalid_argument("sim: starting_cpus must be >= 1");
    if (!(step_s > 0.0)) throw std::invalid_argument("sim: step_s must be > 0");
    if (!(sla_s > 0.0)) throw std::invalid_argument("sim: sla_s must be > 0");
    if (!(adapt_period_s > 0.0)) throw std::invalid_argument("sim: adapt_period_s must be > 0");
    if (provisioning_delay_s < 0.0)
      throw std::invalid_argument("sim: provisioning_delay_s must be >= 0");
    if (!(input_rate_cap > 0.0)) throw std::invalid_argument("sim: input_rate_cap must be > 0");
    if (network_delay_s != 0.0)
      throw std::invalid_argument("sim: network_delay_s is fixed at 0");
  }
};

struct PendingAlloc {
  double available_at_s;
  int count;
};

struct ClusterState {
  int active_cpus = 1;  // never drops below 1
  std::vector<PendingAlloc> pending;
  double freq_hz = 2.0e9;

  int committed_cpus() const {
    int n = active_cpus;
    for (const auto& p : pending) n += p.count;
    return n;
  }
};

// Equal-share cycle distribution with excess redistribution. Sorts the span
// ascending by remaining cycles (ties by post time, then id), hands every item
// an equal share, and re-spreads what finishing items do not need over the
// rest. Returns the cycles left over when everything finishes early.
inline double distribute_cycles(std::vector<WorkItem*>& items, double cycles_per_step) {
  if (items.empty()) return cycles_per_step;
  std::sort(items.begin(), items.end(), [](const WorkItem* a, const WorkItem* b) {
    if (a->cycles_remaining != b->cycles_remaining)
      return a->cycles_remaining < b->cycles_remaining;
    if (a->post_time != b->post_time) return a->post_time < b->post_time;
    return a->id < b->id;
  });
  std::size_t to_process = items.size();
  double per_item = cycles_per_step / static_cast<double>(items.size());
  double idle = 0.0;
  for (WorkItem* it : items) {
    if (it->cycles_remaining < per_item) {
      const double excess = per_item - it->cycles_remaining;
      it->cycles_remaining = 0.0;
      --to_process;
      if (to_process > 0)
        per_item += excess / static_cast<double>(to_process);
      else
        idle = excess;
    } else {
      it->cycles_remaining -= per_item;
    }
  }
  return idle;
}

// One point of the per-adaptation-period telemetry.
struct SeriesPoint {
  double clock_s;
  int active_cpus;
  double usage;
  std::size_t input_queue_len;
  std::size_t in_system;
};

// Discrete-time simulation of the elastic cluster. Single-threaded and fully
// deterministic; arrival intake, cycle distribution, completion harvesting,
// policy actuation and usage accounting happen in a fixed order each step.
class Simulation {
 public:
  Simulation(SimConfig cfg, Workload workload, std::shared_ptr<ScalingPolicy> policy,
             std::ostream* event_log = nullptr)
      : cfg_(cfg),
        items_(std::move(workload.items)),
        classes_(std::move(workload.classes)),
        policy_(std::move(policy)),
        event_log_(event_log) {
    cfg_.validate();
    cluster_.active_cpus = cfg_.starting_cpus;
    cluster_.freq_hz = cfg_.cpu_freq_hz;
    // clock starts at the post time of the first item
    start_s_ = items_.empty() ? 0.0 : items_.front().post_time;
    steps_per_adapt_ = std::max<std::int64_t>(
        1, std::llround(cfg_.adapt_period_s / cfg_.step_s));
    window_available_.assign(static_cast<std::size_t>(steps_per_adapt_), 0.0);
    window_consumed_.assign(static_cast<std::size_t>(steps_per_adapt_), 0.0);
  }

  double clock_s() const { return start_s_ + static_cast<double>(steps_done_) * cfg_.step_s; }
  double start_s() const { return start_s_; }
  bool drained() const {
    return arrival_cursor_ == items_.size() && input_queue_.empty() && processing_.empty();
  }

  void step() {
    const double t0 = clock_s();
    const double t1 = start_s_ + static_cast<double>(steps_done_ + 1) * cfg_.step_s;

    // 1. fold matured allocations into the active pool
    for (auto it = cluster_.pending.begin(); it != cluster_.pending.end();) {
      if (it->available_at_s <= t0) {
        cluster_.active_cpus += it->count;
        log_event(t0, "scale_apply", 0, it->count);
        it = cluster_.pending.erase(it);
      } else {
        ++it;
      }
    }

    // 2. arrivals posted during [t0, t1) enter the input queue, then up to
    //    input_rate_cap * step_s of them are admitted
    while (arrival_cursor_ < items_.size() && items_[arrival_cursor_].post_time < t1)
      input_queue_.push_back(arrival_cursor_++);
    std::size_t admit = input_queue_.size();
    if (std::isfinite(cfg_.input_rate_cap))
      admit = std::min(admit, static_cast<std::size_t>(
                                  std::floor(cfg_.input_rate_cap * cfg_.step_s + 1e-9)));
    for (std::size_t i = 0; i < admit; ++i) {
      processing_.push_back(&items_[input_queue_.front()]);
      input_queue_.pop_front();
    }

    // in-system census for Little's-law accounting (items completing this
    // step were present during it)
    const std::size_t in_system_now = input_queue_.size() + processing_.size();
    if (t0 >= cfg_.measure_from_s) {
      in_system_integral_ += static_cast<double>(in_system_now) * cfg_.step_s;
      measured_time_ += cfg_.step_s;
    }

    // 3. distribute this step's cycle budget
    const double budget =
        static_cast<double>(cluster_.active_cpus) * cluster_.freq_hz * cfg_.step_s;
    double idle = budget;
    if (!processing_.empty()) {
      scratch_.assign(processing_.begin(), processing_.end());
      idle = distribute_cycles(scratch_, budget);
    }

    // 4. harvest completions; processing_ keeps its post-time order
    auto keep = processing_.begin();
    for (WorkItem* it : processing_) {
      if (it->cycles_remaining == 0.0) {
        it->completion_time = t1;
        completed_scores_.emplace_back(it->post_time, it->sentiment.score());
        completed_.push_back(it);
        log_event(t1, "complete", it->id, t1 - it->post_time);
      } else {
        *keep++ = it;
      }
    }
    processing_.erase(keep, processing_.end());

    // usage accounting
    const std::size_t slot = static_cast<std::size_t>(steps_done_ % steps_per_adapt_);
    window_available_[slot] = budget;
    window_consumed_[slot] = budget - idle;
    total_available_ += budget;
    total_consumed_ += budget - idle;
    cpu_seconds_ += static_cast<double>(cluster_.active_cpus) * cfg_.step_s;

    ++steps_done_;

    // 5. policy evaluation at adaptation boundaries
    if (steps_done_ % steps_per_adapt_ == 0) {
      const double usage = usage_last_window();
      series_.push_back({t1, cluster_.active_cpus, usage, input_queue_.size(),
                         input_queue_.size() + processing_.size()});
      if (policy_) {
        PolicyObservation obs;
        obs.clock_s = t1;
        obs.current_cpus = cluster_.committed_cpus();
        obs.cpu_usage_window = usage;
        obs.in_system_count = input_queue_.size() + processing_.size();
        obs.sla_s = cfg_.sla_s;
        obs.freq_hz = cfg_.cpu_freq_hz;
        obs.completed_scores = completed_scores_;
        actuate(policy_->decide(obs), t1);
      }
    }
  }

  void actuate(ScaleDecision d, double now_s) {
    if (d.delta_cpus > 0) {
      cluster_.pending.push_back({now_s + cfg_.provisioning_delay_s, d.delta_cpus});
      log_event(now_s, "scale_request", 0, d.delta_cpus);
    } else if (d.delta_cpus < 0) {
      const int target = cluster_.active_cpus + d.delta_cpus;
      if (target < 1) {
        ++floor_clamps_;
        log_event(now_s, "scale_floor", 0, d.delta_cpus);
      }
      if (cluster_.active_cpus != std::max(1, target))
        log_event(now_s, "scale_in", 0, std::max(1, target) - cluster_.active_cpus);
      cluster_.active_cpus = std::max(1, target);
    }
  }

  // Runs until the workload drains or the horizon is reached.
  void run(double horizon_s = std::numeric_limits<double>::infinity()) {
    while (!drained() && clock_s() - start_s_ < horizon_s) step();
  }

  // Average usage over the last completed adaptation window.
  double usage_last_window() const {
    double a = 0.0, c = 0.0;
    for (double v : window_available_) a += v;
    for (double v : window_consumed_) c += v;
    if (a <= 0.0) throw std::runtime_error("usage: empty window");
    return c / a;
  }

  double usage_total() const {
    if (total_available_ <= 0.0) throw std::runtime_error("usage: no completed steps");
    return total_consumed_ / total_available_;
  }

  const SimConfig& config() const { return cfg_; }
  const ClusterState& cluster() const { return cluster_; }
  const std::vector<WorkItem>& items() const { return items_; }
  const std::vector<WorkloadClass>& classes() const { return classes_; }
  const std::vector<WorkItem*>& completed() const { return completed_; }
  const std::vector<std::pair<double, double>>& completed_scores() const {
    return completed_scores_;
  }
  const std::vector<SeriesPoint>& series() const { return series_; }
  std::size_t in_flight() const { return input_queue_.size() + processing_.size(); }
  double cpu_seconds() const { return cpu_seconds_; }
  double in_system_integral() const { return in_system_integral_; }
  double measured_time() const { return measured_time_; }
  std::size_t floor_clamps() const { return floor_clamps_; }
  std::int64_t steps_done() const { return steps_done_; }
  double total_consumed_cycles() const { return total_consumed_; }
  double total_available_cycles() const { return total_available_; }

 private:
  void log_event(double clock, const char* event, std::uint64_t item_id, double detail) {
    if (!event_log_) return;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.9g,%s,%llu,%.9g\n", clock, event,
                  static_cast<unsigned long long>(item_id), detail);
    *event_log_ << buf;
  }

  SimConfig cfg_;
  std::vector<WorkItem> items_;
  std::vector<WorkloadClass> classes_;
  std::shared_ptr<ScalingPolicy> policy_;
  std::ostream* event_log_;

  ClusterState cluster_;
  double start_s_ = 0.0;
  std::int64_t steps_done_ = 0;
  std::int64_t steps_per_adapt_ = 60;
  std::size_t arrival_cursor_ = 0;
  std::deque<std::size_t> input_queue_;
  std::vector<WorkItem*> processing_;  // post-time order
  std::vector<WorkItem*> scratch_;
  std::vector<WorkItem*> completed_;
  std::vector<std::pair<double, double>> completed_scores_;  // (post_time, score)

  std::vector<double> window_available_;
  std::vector<double> window_consumed_;
  double total_available_ = 0.0;
  double total_consumed_ = 0.0;
  double cpu_seconds_ = 0.0;
  double in_system_integral_ = 0.0;
  double measured_time_ = 0.0;
  std::size_t floor_clamps_ = 0;
  std::vector<SeriesPoint> series_;
};

}  // namespace streamsim
