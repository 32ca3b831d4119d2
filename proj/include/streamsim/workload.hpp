#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "streamsim/weibull.hpp"

namespace streamsim {

struct SentimentTriple {
  double p_pos = 0.0;
  double p_neg = 0.0;
  double p_neu = 1.0;

  // Scalar sentiment score: probability of the item being non-neutral.
  double score() const { return p_pos + p_neg; }

  bool valid(double tol = 1e-9) const {
    auto in01 = [](double p) { return p >= 0.0 && p <= 1.0; };
    return in01(p_pos) && in01(p_neg) && in01(p_neu) &&
           std::abs(p_pos + p_neg + p_neu - 1.0) <= tol;
  }
};

// One unit of streamed work.
struct WorkItem {
  std::uint64_t id = 0;
  double post_time = 0.0;           // seconds
  int class_id = 0;
  double cycles_required = 0.0;     // 0 for the zero-demand class
  double cycles_remaining = 0.0;
  SentimentTriple sentiment;
  std::optional<double> completion_time;  // set when finished
};

// Per-class service demand: Weibull in cycles, or identically zero.
struct ServiceDemand {
  enum class Kind { weibull, zero };
  Kind kind = Kind::zero;
  double shape = 0.0;
  double scale = 0.0;

  static ServiceDemand make_weibull(double k, double lam) {
    Weibull check(k, lam);  // validates
    return ServiceDemand{Kind::weibull, check.shape, check.scale};
  }
  static ServiceDemand make_zero() { return ServiceDemand{}; }

  double quantile(double p) const {
    if (kind == Kind::zero) {
      if (!(p >= 0.0 && p < 1.0))
        throw std::domain_error("ServiceDemand::quantile: p must be in [0, 1)");
      return 0.0;
    }
    return Weibull(shape, scale).quantile(p);
  }
  double mean() const {
    return kind == Kind::zero ? 0.0 : Weibull(shape, scale).mean();
  }
  double sample(std::mt19937_64& rng) const {
    return kind == Kind::zero ? 0.0 : Weibull(shape, scale).sample(rng);
  }
};

struct WorkloadClass {
  int class_id = 0;
  std::string name;
  ServiceDemand demand;
  double proportion = 0.0;  // fraction of the item population
};

// Measured reference machine constants for converting processing delays into
// CPU cycle demands under the uniform cycle-sharing assumption:
//   cycles = delay * f_ref * utilization / L_avg
struct ConversionContext {
  double f_ref_hz;
  double utilization;  // (0, 1]
  double l_avg;        // mean number of items sharing the CPU, >= 1
};

inline double convert_delay_to_cycles(double delay_s, const ConversionContext& ctx) {
  if (!std::isfinite(delay_s) || !std::isfinite(ctx.f_ref_hz) ||
      !std::isfinite(ctx.utilization) || !std::isfinite(ctx.l_avg))
    throw std::invalid_argument("convert_delay_to_cycles: non-finite input");
  if (delay_s < 0.0) throw std::invalid_argument("convert_delay_to_cycles: delay < 0");
  if (ctx.f_ref_hz <= 0.0) throw std::invalid_argument("convert_delay_to_cycles: f_ref_hz <= 0");
  if (ctx.utilization <= 0.0 || ctx.utilization > 1.0)
    throw std::invalid_argument("convert_delay_to_cycles: utilization outside (0, 1]");
  if (ctx.l_avg < 1.0) throw std::invalid_argument("convert_delay_to_cycles: l_avg < 1");
  return delay_s * ctx.f_ref_hz * ctx.utilization / ctx.l_avg;
}

struct Workload {
  std::vector<WorkItem> items;       // sorted non-decreasing by post_time
  std::vector<WorkloadClass> classes;
  std::vector<std::string> warnings;
};

struct TraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s, std::size_t line_no, const char* what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw TraceError("line " + std::to_string(line_no) + ": bad " + what + " value '" + s + "'");
  }
}

}  // namespace detail

// Loads a CSV trace. Header must be
//   id,post_time_s,class_id,p_pos,p_neg,p_neu,cycles
// or the same with a trailing delay_s column instead of cycles, in which case
// a ConversionContext is required. Class proportions are computed from the
// file's per-class counts; demand distributions come from the side manifest
// (load_class_manifest) when one is used.
inline Workload load_trace(const std::string& path,
                           const std::optional<ConversionContext>& ctx = {}) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot open trace file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw TraceError(path + ": empty file, header expected");
  const auto header = detail::split_csv_line(line);
  const std::string prefix = "id,post_time_s,class_id,p_pos,p_neg,p_neu,";
  bool uses_delay;
  if (header.size() == 7 && header[6] == "cycles" &&
      line.rfind(prefix, 0) == 0) {
    uses_delay = false;
  } else if (header.size() == 7 && header[6] == "delay_s" &&
             line.rfind(prefix, 0) == 0) {
    uses_delay = true;
  } else {
    throw TraceError(path + ": unrecognized header '" + line + "'");
  }
  if (uses_delay && !ctx)
    throw TraceError(path + ": delay_s column requires a conversion context");

  Workload w;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 7)
      throw TraceError("line " + std::to_string(line_no) + ": expected 7 fields, got " +
                       std::to_string(f.size()));
    WorkItem it;
    it.id = static_cast<std::uint64_t>(detail::parse_double(f[0], line_no, "id"));
    it.post_time = detail::parse_double(f[1], line_no, "post_time_s");
    it.class_id = static_cast<int>(detail::parse_double(f[2], line_no, "class_id"));
    it.sentiment.p_pos = detail::parse_double(f[3], line_no, "p_pos");
    it.sentiment.p_neg = detail::parse_double(f[4], line_no, "p_neg");
    it.sentiment.p_neu = detail::parse_double(f[5], line_no, "p_neu");
    if (it.post_time < 0.0)
      throw TraceError("line " + std::to_string(line_no) + ": negative post_time_s");
    if (!it.sentiment.valid(1e-6))
      throw TraceError("line " + std::to_string(line_no) + ": sentiment does not sum to 1");
    double last = detail::parse_double(f[6], line_no, uses_delay ? "delay_s" : "cycles");
    if (last < 0.0)
      throw TraceError("line " + std::to_string(line_no) + ": negative " +
                       (uses_delay ? "delay_s" : "cycles"));
    it.cycles_required = uses_delay ? convert_delay_to_cycles(last, *ctx) : last;
    it.cycles_remaining = it.cycles_required;
    w.items.push_back(it);
  }

  if (!std::is_sorted(w.items.begin(), w.items.end(),
                      [](const WorkItem& a, const WorkItem& b) {
                        return a.post_time < b.post_time;
                      })) {
    w.warnings.push_back(path + ": rows out of post-time order, sorted on load");
    std::stable_sort(w.items.begin(), w.items.end(),
                     [](const WorkItem& a, const WorkItem& b) {
                       return a.post_time < b.post_time;
                     });
  }

  // class proportions from file counts
  std::vector<std::pair<int, std::size_t>> counts;
  for (const auto& it : w.items) {
    auto p = std::find_if(counts.begin(), counts.end(),
                          [&](const auto& c) { return c.first == it.class_id; });
    if (p == counts.end())
      counts.emplace_back(it.class_id, 1);
    else
      ++p->second;
  }
  std::sort(counts.begin(), counts.end());
  for (const auto& [cid, cnt] : counts) {
    WorkloadClass c;
    c.class_id = cid;
    c.name = "class_" + std::to_string(cid);
    c.proportion = static_cast<double>(cnt) / static_cast<double>(w.items.size());
    w.classes.push_back(c);
  }
  return w;
}

inline void write_trace(const std::string& path, const Workload& w) {
  std::ofstream out(path);
  if (!out) throw TraceError("cannot write trace file: " + path);
  out << "id,post_time_s,class_id,p_pos,p_neg,p_neu,cycles\n";
  char buf[256];
  for (const auto& it : w.items) {
    std::snprintf(buf, sizeof buf, "%llu,%.9g,%d,%.9g,%.9g,%.9g,%.9g\n",
                  static_cast<unsigned long long>(it.id), it.post_time, it.class_id,
                  it.sentiment.p_pos, it.sentiment.p_neg, it.sentiment.p_neu,
                  it.cycles_required);
    out << buf;
  }
}

// Side manifest: class_id,name,dist,shape,scale,proportion with dist in
// {weibull, zero}.
inline std::vector<WorkloadClass> load_class_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot open class manifest: " + path);
  std::string line;
  if (!std::getline(in, line) ||
      detail::split_csv_line(line) !=
          std::vector<std::string>{"class_id", "name", "dist", "shape", "scale", "proportion"})
    throw TraceError(path + ": bad class manifest header");
  std::vector<WorkloadClass> classes;
  std::size_t line_no = 1;
  double total = 0.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 6)
      throw TraceError("line " + std::to_string(line_no) + ": expected 6 fields");
    WorkloadClass c;
    c.class_id = static_cast<int>(detail::parse_double(f[0], line_no, "class_id"));
    c.name = f[1];
    if (f[2] == "weibull") {
      c.demand = ServiceDemand::make_weibull(detail::parse_double(f[3], line_no, "shape"),
                                             detail::parse_double(f[4], line_no, "scale"));
    } else if (f[2] == "zero") {
      c.demand = ServiceDemand::make_zero();
    } else {
      throw TraceError("line " + std::to_string(line_no) + ": unknown dist '" + f[2] + "'");
    }
    c.proportion = detail::parse_double(f[5], line_no, "proportion");
    if (c.proportion < 0.0 || c.proportion > 1.0)
      throw TraceError("line " + std::to_string(line_no) + ": proportion outside [0, 1]");
    total += c.proportion;
    classes.push_back(c);
  }
  if (!classes.empty() && std::abs(total - 1.0) > 1e-9)
    throw TraceError(path + ": class proportions sum to " + std::to_string(total) +
                     ", expected 1");
  return classes;
}

inline void write_class_manifest(const std::string& path,
                                 const std::vector<WorkloadClass>& classes) {
  std::ofstream out(path);
  if (!out) throw TraceError("cannot write class manifest: " + path);
  out << "class_id,name,dist,shape,scale,proportion\n";
  char buf[256];
  for (const auto& c : classes) {
    const bool wb = c.demand.kind == ServiceDemand::Kind::weibull;
    std::snprintf(buf, sizeof buf, "%d,%s,%s,%.9g,%.9g,%.9g\n", c.class_id, c.name.c_str(),
                  wb ? "weibull" : "zero", c.demand.shape, c.demand.scale, c.proportion);
    out << buf;
  }
}

}  // namespace streamsim
