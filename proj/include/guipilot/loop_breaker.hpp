#pragma once

#include <optional>
#include <string>
#include <vector>

#include "guipilot/core.hpp"
#include "guipilot/outputs.hpp"

namespace guipilot {

struct LoopConfig {
  int tau_a = 2;  // action repeated with no visible change, window [t-1, t]
  int tau_o = 3;  // screen recurrence, window [t-2, t]
  int similarity_epsilon = 0;  // digest Hamming distance bound for ≈
  bool reflection_every_step = true;
  int blacklist_retry_budget = 2;
};

// One step as the counters see it: what was done plus the screens around it.
// Non-action steps (malformed, blocked) use a per-step unique fingerprint so
// they can never match anything.
struct LoopStepView {
  std::string fingerprint;
  std::string canonical;  // display form for directive text
  std::string pre_digest;
  std::string post_digest;
};

struct LoopState {
  int n_a = 0;
  int n_o = 0;
  std::optional<std::pair<LoopTier, int>> last_trigger;
};

inline bool similar_digests(const std::string& a, const std::string& b, const LoopConfig& cfg) {
  return digest_distance(a, b) <= cfg.similarity_epsilon;
}

inline bool screens_similar(const Observation& a, const Observation& b, const LoopConfig& cfg) {
  return similar_digests(a.screen_digest, b.screen_digest, cfg);
}

// |{i in [t-1, t] : a_i = a_t and the step-i action left the screen unchanged}|
inline int action_repeat_count(const std::vector<LoopStepView>& steps, int t,
                               const LoopConfig& cfg) {
  int count = 0;
  for (int i = t - 1; i <= t; ++i) {
    if (i < 0) continue;
    if (steps[i].fingerprint != steps[t].fingerprint) continue;
    if (similar_digests(steps[i].post_digest, steps[i].pre_digest, cfg)) ++count;
  }
  return count;
}

// |{i in [t-2, t] : o_i ≈ o_t}| — at least 1 at any t since i=t is reflexive.
inline int screen_repeat_count(const std::vector<LoopStepView>& steps, int t,
                               const LoopConfig& cfg) {
  int count = 0;
  for (int i = t - 2; i <= t; ++i) {
    if (i < 0) continue;
    if (similar_digests(steps[i].pre_digest, steps[t].pre_digest, cfg)) ++count;
  }
  return count;
}

// Escalation: an external SWITCH signal outranks the counters; the action
// counter outranks the screen counter. Tier 1 and Tier 3 blacklist the action
// for exactly the next step; Tier 2 only demands a strategy change.
inline LoopDecision evaluate_loop(const std::vector<LoopStepView>& steps, int t,
                                  const std::optional<ReflectionSignals>& signals,
                                  const LoopConfig& cfg) {
  LoopDecision d;
  d.n_a = action_repeat_count(steps, t, cfg);
  d.n_o = screen_repeat_count(steps, t, cfg);

  const std::string& shown = steps[t].canonical;
  if (signals && signals->strategy == StrategySignal::Switch) {
    d.tier = LoopTier::ReflectionSwitch;
    d.blacklisted = steps[t].fingerprint;
    d.directive = "Hard directive: an external review judged the current approach a dead end";
    if (!signals->strategy_reason.empty()) d.directive += " (" + signals->strategy_reason + ")";
    d.directive += ". The action " + shown +
                   " is blacklisted for your next step. Adopt a different overall strategy.";
    return d;
  }
  if (d.n_a >= cfg.tau_a) {
    d.tier = LoopTier::ModalitySwitch;
    d.blacklisted = steps[t].fingerprint;
    d.directive = "Hard directive: the action " + shown + " produced no visible change " +
                  std::to_string(d.n_a) +
                  " times and is blacklisted for your next step. Switch to a different "
                  "interaction modality (for example: menu click -> keyboard shortcut -> "
                  "command line).";
    return d;
  }
  if (d.n_o >= cfg.tau_o) {
    d.tier = LoopTier::StrategyChange;
    d.directive = "Directive: the current screen has now appeared " + std::to_string(d.n_o) +
                  " times in a row. Do not repeat the recent approach; change your overall "
                  "strategy for the next step.";
    return d;
  }
  return d;
}

enum class BlacklistRuling { Allow, Reject };

inline BlacklistRuling enforce_blacklist(const BeliefState& belief, const Action& proposed) {
  return belief.blacklist.count(action_fingerprint(proposed)) ? BlacklistRuling::Reject
                                                              : BlacklistRuling::Allow;
}

// Builds counter views from recorded history. Steps without an executed action
// get a unique never-matching fingerprint but still occupy window slots.
inline std::vector<LoopStepView> loop_views(const std::vector<StepRecord>& history) {
  std::vector<LoopStepView> views;
  views.reserve(history.size());
  for (const auto& rec : history) {
    LoopStepView v;
    if (rec.parsed_action) {
      v.fingerprint = action_fingerprint(*rec.parsed_action);
      v.canonical = serialize_action(*rec.parsed_action);
    } else {
      v.fingerprint = "<none:" + std::to_string(rec.step_index) + ">";
      v.canonical = "(no action)";
    }
    v.pre_digest = rec.pre_obs.screen_digest;
    v.post_digest = rec.post_obs.screen_digest;
    views.push_back(std::move(v));
  }
  return views;
}

}  // namespace guipilot
