#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "guipilot/core.hpp"
#include "guipilot/loop_breaker.hpp"
#include "guipilot/outputs.hpp"

namespace guipilot {

struct VerifierConfig {
  double verifier_temperature = 0.2;
  std::vector<std::string> uncertainty_phrases = default_uncertainty_phrases();
  int rejection_warning_cap = 5;  // warn (not block) after this many rejected claims
};

// --- micro-verification ------------------------------------------------------

namespace detail {

inline const ObsElement* find_element(const Observation& obs, const std::string& target) {
  std::string want = normalize_target(target);
  for (const auto& e : obs.elements) {
    if (normalize_target(e.label) == want) return &e;
  }
  // fall back to substring match so "the Save button" finds "Save"
  for (const auto& e : obs.elements) {
    std::string have = normalize_target(e.label);
    if (!have.empty() && want.find(have) != std::string::npos) return &e;
  }
  return nullptr;
}

inline bool is_save_chord(const std::vector<std::string>& keys) {
  bool ctrl = false, s = false;
  for (const auto& k : keys) {
    if (k == "ctrl" || k == "cmd") ctrl = true;
    if (k == "s") s = true;
  }
  return ctrl && s;
}

inline bool save_like_name(const std::string& name) {
  std::string low = normalize_target(name);
  return low.find("save") != std::string::npos || low.find("export") != std::string::npos;
}

}  // namespace detail

// Picks the expected-outcome rule for an executed UI action; nullopt for tool
// calls and terminals, which have no screen-level expectation.
inline std::optional<MicroRule> select_micro_rule(const Action& a, const Observation& pre_obs) {
  if (!is_ui_action(a)) return std::nullopt;
  if (const auto* c = std::get_if<ClickAction>(&a)) {
    const ObsElement* el = detail::find_element(pre_obs, c->target);
    if (el && el->kind == "toggle") return MicroRule::ToggleStateChanged;
    return MicroRule::ClickNewElement;
  }
  if (const auto* dc = std::get_if<DoubleClickAction>(&a)) {
    const ObsElement* el = detail::find_element(pre_obs, dc->target);
    if (el && el->kind == "toggle") return MicroRule::ToggleStateChanged;
    return MicroRule::ClickNewElement;
  }
  if (std::holds_alternative<TypeAction>(a) || std::holds_alternative<SetCellValuesAction>(a))
    return MicroRule::TypeFieldContains;
  if (const auto* h = std::get_if<HotkeyAction>(&a)) {
    if (detail::is_save_chord(h->keys)) return MicroRule::SaveArtifactVisible;
    return MicroRule::ClickNewElement;
  }
  if (const auto* o = std::get_if<OpenAction>(&a)) {
    if (detail::save_like_name(o->name)) return MicroRule::SaveArtifactVisible;
    return MicroRule::ClickNewElement;
  }
  return MicroRule::ClickNewElement;
}

// Checks an executed action's expected outcome against the observation delta.
// An unchanged screen trumps the selected rule: the outcome becomes
// no-change-wait and the orchestrator schedules a one-second wait before the
// next observation. In live mode rules degrade to unknown self-check items.
inline MicroVerifyOutcome micro_verify(const Action& a, const Observation& pre,
                                       const Observation& post, bool sim_mode,
                                       int epsilon = 0) {
  MicroVerifyOutcome out;
  auto rule = select_micro_rule(a, pre);
  out.rule = rule.value_or(MicroRule::ClickNewElement);

  if (digest_distance(pre.screen_digest, post.screen_digest) <= epsilon) {
    out.rule = MicroRule::NoChangeWait;
    out.expected = "a visible change after " + action_name(a);
    out.satisfied = MicroStatus::No;
    out.evidence = "screen digest unchanged; scheduling wait(1) before re-check";
    return out;
  }

  if (!sim_mode) {
    out.satisfied = MicroStatus::Unknown;
    out.expected = "self-check: did " + action_name(a) + " have its expected effect?";
    out.evidence = "live mode: verified by the next self-check";
    return out;
  }

  std::set<std::string> pre_labels;
  for (const auto& e : pre.elements) pre_labels.insert(e.label);

  switch (out.rule) {
    case MicroRule::ClickNewElement: {
      out.expected = "a new UI element (dialog, tab, highlight) is visible";
      for (const auto& e : post.elements) {
        if (!pre_labels.count(e.label)) {
          out.satisfied = MicroStatus::Yes;
          out.evidence = "new element: " + e.label;
          return out;
        }
      }
      out.satisfied = MicroStatus::Unknown;
      out.evidence = "screen changed but no new element appeared";
      return out;
    }
    case MicroRule::ToggleStateChanged: {
      std::string target;
      if (const auto* c = std::get_if<ClickAction>(&a)) target = c->target;
      if (const auto* dc = std::get_if<DoubleClickAction>(&a)) target = dc->target;
      out.expected = "toggle '" + target + "' changed state";
      const ObsElement* before = detail::find_element(pre, target);
      const ObsElement* after = detail::find_element(post, target);
      if (!before || !after) {
        out.satisfied = MicroStatus::Unknown;
        out.evidence = "toggle not found on both screens";
        return out;
      }
      if (before->state != after->state) {
        out.satisfied = MicroStatus::Yes;
        out.evidence = "state " + before->state + " -> " + after->state;
      } else {
        out.satisfied = MicroStatus::No;
        out.evidence = "state still " + after->state;
      }
      return out;
    }
    case MicroRule::TypeFieldContains: {
      if (const auto* t = std::get_if<TypeAction>(&a)) {
        out.expected = "field '" + t->target + "' contains the typed text";
        const ObsElement* field = detail::find_element(post, t->target);
        if (!field) {
          out.satisfied = MicroStatus::Unknown;
          out.evidence = "field not found after typing";
        } else if (field->state.find(t->text) != std::string::npos) {
          out.satisfied = MicroStatus::Yes;
          out.evidence = "field content: " + field->state;
        } else {
          out.satisfied = MicroStatus::No;
          out.evidence = "field content: " + field->state;
        }
        return out;
      }
      const auto& cells = std::get<SetCellValuesAction>(a).cells;
      out.expected = "every written cell shows its value";
      for (const auto& [cell, value] : cells) {
        const ObsElement* el = detail::find_element(post, cell);
        if (!el || el->state.find(value) == std::string::npos) {
          out.satisfied = MicroStatus::No;
          out.evidence = "cell " + cell + " does not show " + value;
          return out;
        }
      }
      out.satisfied = MicroStatus::Yes;
      out.evidence = "all " + std::to_string(cells.size()) + " cells updated";
      return out;
    }
    case MicroRule::SaveArtifactVisible: {
      out.expected = "a save/export artifact (toast, file entry) is visible";
      for (const auto& e : post.elements) {
        if (pre_labels.count(e.label)) continue;
        std::string low = normalize_target(e.label);
        if (low.find("save") != std::string::npos || low.find("toast") != std::string::npos ||
            low.find("export") != std::string::npos) {
          out.satisfied = MicroStatus::Yes;
          out.evidence = "artifact: " + e.label;
          return out;
        }
      }
      out.satisfied = MicroStatus::Unknown;
      out.evidence = "screen changed but no save artifact surfaced";
      return out;
    }
    case MicroRule::NoChangeWait:
      break;  // handled above
  }
  return out;
}

// --- success criteria --------------------------------------------------------

// Reads numbered or bulleted criterion lines out of the gate section, e.g.
//   1. The slide number on every master is red [EXACT CHECK]
// The tag is captured and stripped from the stored statement.
inline std::vector<SuccessCriterion> parse_criteria(const std::string& gate_text) {
  std::vector<SuccessCriterion> out;
  size_t pos = 0;
  while (pos <= gate_text.size()) {
    size_t eol = gate_text.find('\n', pos);
    std::string line = detail::trim(gate_text.substr(
        pos, eol == std::string::npos ? std::string::npos : eol - pos));
    pos = eol == std::string::npos ? gate_text.size() + 1 : eol + 1;
    if (line.empty()) continue;

    size_t i = 0;
    bool numbered = false;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
      numbered = true;
      ++i;
    } else if (line[0] == '-' || line[0] == '*') {
      numbered = true;
      i = 1;
    } else {
      i = 0;
    }
    if (!numbered) continue;

    std::string body = detail::trim(line.substr(i));
    if (body.empty()) continue;
    // status-claim lines ("1. met: ...") are not criterion definitions
    std::string first = detail::lower(detail::first_word(body));
    if (first == "met" || first == "unmet") continue;

    SuccessCriterion c;
    c.index = static_cast<int>(out.size()) + 1;
    const std::string tag = "[EXACT CHECK]";
    size_t tag_at = detail::ifind(body, tag);
    if (tag_at != std::string::npos) {
      c.exact_check = true;
      body = detail::trim(body.substr(0, tag_at) + body.substr(tag_at + tag.size()));
    }
    c.statement = body;
    out.push_back(std::move(c));
  }
  return out;
}

// Applies "N. met: <evidence>" / "N. unmet" claims from a later gate section.
// A met claim without evidence is ignored (met-with-evidence needs evidence).
inline void apply_criteria_claims(const std::string& gate_text,
                                  std::vector<SuccessCriterion>& criteria) {
  size_t pos = 0;
  while (pos <= gate_text.size()) {
    size_t eol = gate_text.find('\n', pos);
    std::string line = detail::trim(gate_text.substr(
        pos, eol == std::string::npos ? std::string::npos : eol - pos));
    pos = eol == std::string::npos ? gate_text.size() + 1 : eol + 1;
    if (line.empty()) continue;

    size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i == 0 || i >= line.size() || (line[i] != '.' && line[i] != ')')) continue;
    int index = std::stoi(line.substr(0, i));
    std::string body = detail::trim(line.substr(i + 1));
    std::string first = detail::lower(detail::first_word(body));
    if (index < 1 || index > static_cast<int>(criteria.size())) continue;
    auto& c = criteria[index - 1];
    if (first == "met") {
      std::string evidence = detail::trim(detail::after_first_word(body));
      if (!evidence.empty()) {
        c.status = CriterionStatus::MetWithEvidence;
        c.evidence = evidence;
      }
    } else if (first == "unmet") {
      c.status = CriterionStatus::Unmet;
      c.evidence.clear();
    }
  }
}

// --- the gate ----------------------------------------------------------------

// DONE only when every criterion is met with evidence and the UI is at rest
// (stable frame, no pending no-change wait). FAIL passes through the Manager's
// explicit infeasibility ruling; everything else is CONTINUE.
inline GateDecision compute_gate(const std::vector<SuccessCriterion>& criteria, bool obs_stable,
                                 bool pending_wait, GateValue manager_decision) {
  GateDecision g;
  g.criteria_snapshot = criteria;
  g.ui_stable = obs_stable && !pending_wait;
  if (manager_decision == GateValue::Fail) {
    g.value = GateValue::Fail;
    return g;
  }
  bool all_met = !criteria.empty();
  for (const auto& c : criteria) {
    if (c.status != CriterionStatus::MetWithEvidence) {
      all_met = false;
      break;
    }
  }
  g.value = (all_met && g.ui_stable) ? GateValue::Done : GateValue::Continue;
  return g;
}

// Success needs both modules to agree at the same step; anything else is a
// rejection the run must survive.
inline std::optional<TerminationRecord> final_termination(const GateDecision& gate,
                                                          const JudgeVerdict& judge,
                                                          int step_index) {
  if (gate.value == GateValue::Done && judge.complete) {
    return TerminationRecord{TerminationKind::DoneAccepted, step_index,
                             "completion gate DONE and judge accepted"};
  }
  return std::nullopt;
}

// Judge abstraction: the live judge is one verifier-role model call; the sim
// suite swaps in an oracle backed by the world's ground truth.
class CompletionJudge {
 public:
  virtual ~CompletionJudge() = default;
  virtual JudgeVerdict judge(const TaskSpec& task, const Observation& obs,
                             const BeliefState& belief) = 0;
};

}  // namespace guipilot
