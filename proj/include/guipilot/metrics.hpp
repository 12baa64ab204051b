#pragma once

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "guipilot/core.hpp"
#include "guipilot/loop_breaker.hpp"

namespace guipilot {

// Exact counts; percentages are derived only at print time, so the stored
// numerators never drift.
struct Ratio {
  long long num = 0;
  long long den = 0;
  std::string undefined_label;  // used when den == 0, e.g. "0 failed"

  bool defined() const { return den != 0; }
  double value() const { return defined() ? static_cast<double>(num) / den : 0.0; }

  std::string percent() const {
    if (!defined()) return "n/a (" + undefined_label + ")";
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(1) << (100.0 * num / den) << "%";
    return ss.str();
  }
};

struct RunOutcomeRow {
  std::string task_id;
  std::string terminal_kind;  // done-accepted | fail-declared | budget-exhausted | aborted
  bool claimed_done = false;
  bool ground_success = false;
  std::vector<std::pair<int, int>> loop_segments;  // inclusive step ranges
  int total_steps = 0;
};

struct MetricsReport {
  Ratio success_rate;
  Ratio fdf;            // false done / failed
  Ratio fda;            // false done / all
  Ratio done_accuracy;  // correct done / claimed done
  Ratio lf;             // looped / failed
  Ratio la;             // looped / all
  Ratio wsr;            // loop steps / total steps, pooled
  double wsr_per_run_mean = 0.0;
};

// Re-runs the repetition counters over a finished log at the given thresholds;
// a recorded external-judge trigger also marks its step. Consecutive flagged
// steps merge into maximal segments.
inline std::vector<std::pair<int, int>> detect_loop_segments(const std::vector<StepRecord>& steps,
                                                             const LoopConfig& cfg) {
  std::vector<std::pair<int, int>> segments;
  auto views = loop_views(steps);
  int start = -1;
  for (int t = 0; t < static_cast<int>(views.size()); ++t) {
    bool in_loop = action_repeat_count(views, t, cfg) >= cfg.tau_a ||
                   screen_repeat_count(views, t, cfg) >= cfg.tau_o;
    if (!in_loop && steps[t].loop_note &&
        steps[t].loop_note->tier == LoopTier::ReflectionSwitch) {
      in_loop = true;
    }
    if (in_loop && start < 0) start = t;
    if (!in_loop && start >= 0) {
      segments.push_back({start, t - 1});
      start = -1;
    }
  }
  if (start >= 0) segments.push_back({start, static_cast<int>(views.size()) - 1});
  return segments;
}

// Collapses one finished trajectory into a metrics row. Loop thresholds come
// from the run's own header so post-hoc detection matches the runtime.
inline RunOutcomeRow row_from_trajectory(const Trajectory& traj) {
  RunOutcomeRow row;
  row.task_id = traj.header.contains("task")
                    ? traj.header.at("task").value("id", std::string("unknown"))
                    : "unknown";
  LoopConfig cfg;
  if (traj.header.contains("config") && traj.header.at("config").contains("loop")) {
    const auto& l = traj.header.at("config").at("loop");
    cfg.tau_a = l.value("tau_a", cfg.tau_a);
    cfg.tau_o = l.value("tau_o", cfg.tau_o);
    cfg.similarity_epsilon = l.value("similarity_epsilon", cfg.similarity_epsilon);
  }
  row.total_steps = static_cast<int>(traj.steps.size());
  row.loop_segments = detect_loop_segments(traj.steps, cfg);

  if (traj.trailer.is_null()) {
    row.terminal_kind = "aborted";
  } else if (traj.trailer.value("type", std::string{}) == "aborted") {
    row.terminal_kind = "aborted";
    row.ground_success = traj.trailer.value("env_success", false);
  } else {
    auto term = termination_from_json(traj.trailer.at("termination"));
    row.terminal_kind = to_string(term.kind);
    row.claimed_done = term.kind == TerminationKind::DoneAccepted;
    row.ground_success = traj.trailer.value("env_success", false);
  }
  return row;
}

inline MetricsReport compute_metrics(const std::vector<RunOutcomeRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("compute_metrics: no rows");
  long long n = static_cast<long long>(rows.size());
  long long success = 0, failed = 0, claimed = 0, false_done = 0, correct_done = 0;
  long long looped = 0, looped_failed = 0;
  long long loop_steps = 0, total_steps = 0;
  double wsr_sum = 0.0;
  long long wsr_runs = 0;

  for (const auto& r : rows) {
    bool ok = r.claimed_done && r.ground_success;
    bool has_loop = !r.loop_segments.empty();
    if (ok) ++success;
    else ++failed;
    if (r.claimed_done) {
      ++claimed;
      if (r.ground_success) ++correct_done;
      else ++false_done;
    }
    if (has_loop) {
      ++looped;
      if (!ok) ++looped_failed;
    }
    long long run_loop_steps = 0;
    for (const auto& [a, b] : r.loop_segments) run_loop_steps += b - a + 1;
    loop_steps += run_loop_steps;
    total_steps += r.total_steps;
    if (r.total_steps > 0) {
      wsr_sum += static_cast<double>(run_loop_steps) / r.total_steps;
      ++wsr_runs;
    }
  }

  MetricsReport rep;
  rep.success_rate = {success, n, ""};
  rep.fdf = {false_done, failed, "0 failed"};
  rep.fda = {false_done, n, ""};
  rep.done_accuracy = {correct_done, claimed, "0 claimed"};
  rep.lf = {looped_failed, failed, "0 failed"};
  rep.la = {looped, n, ""};
  rep.wsr = {loop_steps, total_steps, "0 steps"};
  rep.wsr_per_run_mean = wsr_runs ? wsr_sum / wsr_runs : 0.0;
  return rep;
}

namespace detail {

inline json ratio_json(const Ratio& r) {
  if (!r.defined()) return json{{"undefined", r.percent()}};
  return json{{"num", r.num}, {"den", r.den}, {"percent", r.percent()}};
}

}  // namespace detail

inline json report_to_json(const MetricsReport& rep) {
  std::ostringstream mean;
  mean << std::fixed << std::setprecision(1) << (100.0 * rep.wsr_per_run_mean) << "%";
  return json{{"success_rate", detail::ratio_json(rep.success_rate)},
              {"false_done_over_failed", detail::ratio_json(rep.fdf)},
              {"false_done_over_all", detail::ratio_json(rep.fda)},
              {"done_accuracy", detail::ratio_json(rep.done_accuracy)},
              {"loop_over_failed", detail::ratio_json(rep.lf)},
              {"loop_over_all", detail::ratio_json(rep.la)},
              {"wasted_steps_ratio", detail::ratio_json(rep.wsr)},
              {"wasted_steps_ratio_per_run_mean", mean.str()}};
}

inline std::string emit_report(const MetricsReport& rep, const std::string& format) {
  if (format == "json") return report_to_json(rep).dump(2) + "\n";

  auto line = [](const std::string& name, const Ratio& r) {
    std::ostringstream ss;
    ss << std::left << std::setw(28) << name << std::right << std::setw(10) << r.percent();
    if (r.defined()) ss << "   (" << r.num << "/" << r.den << ")";
    ss << "\n";
    return ss.str();
  };
  std::string out;
  out += line("success rate", rep.success_rate);
  out += line("false done / failed", rep.fdf);
  out += line("false done / all", rep.fda);
  out += line("done accuracy", rep.done_accuracy);
  out += line("loop / failed", rep.lf);
  out += line("loop / all", rep.la);
  out += line("wasted steps ratio", rep.wsr);
  std::ostringstream mean;
  mean << std::left << std::setw(28) << "wasted steps (per-run mean)" << std::right
       << std::setw(10) << std::fixed << std::setprecision(1)
       << (100.0 * rep.wsr_per_run_mean) << "%" << "\n";
  out += mean.str();
  return out;
}

}  // namespace guipilot
