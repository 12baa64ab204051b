#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "guipilot/actions.hpp"
#include "guipilot/grammar.hpp"

namespace guipilot {

using json = nlohmann::ordered_json;

struct SequencingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- hashing -----------------------------------------------------------------

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

inline std::string digest_hex(std::string_view s) { return hex64(fnv1a64(s)); }

inline uint64_t parse_hex64(std::string_view s) {
  uint64_t v = 0;
  for (char c : s) {
    v <<= 4;
    if (c >= '0' && c <= '9') v |= static_cast<uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') v |= static_cast<uint64_t>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') v |= static_cast<uint64_t>(c - 'A' + 10);
  }
  return v;
}

// Hamming distance between two hex digests; the loop breaker's ≈ relation is
// distance ≤ epsilon (0 in sim mode).
inline int digest_distance(std::string_view a, std::string_view b) {
  return std::popcount(parse_hex64(a) ^ parse_hex64(b));
}

// --- task & observation ------------------------------------------------------

struct FeatureFlags {
  bool verifier = true;
  bool loop_breaker = true;
  bool search = true;
  bool coder = true;
  bool grounder = true;
  bool operator==(const FeatureFlags&) const = default;
};

struct TaskSpec {
  std::string id;
  std::string instruction;
  int step_budget = 50;
  std::string tag;  // free-form category label, e.g. "trap"
  FeatureFlags flags;
  bool operator==(const TaskSpec&) const = default;
};

struct ObsElement {
  std::string label;
  int x = 0, y = 0, w = 0, h = 0;
  std::string kind;   // button | toggle | field | menu | text
  std::string state;  // toggle position or field content
  bool operator==(const ObsElement&) const = default;
};

struct Observation {
  int step_index = 0;
  std::string screen_digest;  // 16 hex chars
  std::vector<ObsElement> elements;
  std::string image_ref;
  bool stable = true;
  bool operator==(const Observation&) const = default;
};

// --- criteria & verdicts -----------------------------------------------------

enum class CriterionStatus { Unmet, MetWithEvidence };

struct SuccessCriterion {
  int index = 1;
  std::string statement;
  bool exact_check = false;
  CriterionStatus status = CriterionStatus::Unmet;
  std::string evidence;
  bool operator==(const SuccessCriterion&) const = default;
};

enum class MicroRule {
  ClickNewElement,
  ToggleStateChanged,
  TypeFieldContains,
  SaveArtifactVisible,
  NoChangeWait,
};
enum class MicroStatus { Yes, No, Unknown };

struct MicroVerifyOutcome {
  MicroRule rule = MicroRule::ClickNewElement;
  std::string expected;
  MicroStatus satisfied = MicroStatus::Unknown;
  std::string evidence;
  bool operator==(const MicroVerifyOutcome&) const = default;
};

enum class LoopTier { None, ModalitySwitch, StrategyChange, ReflectionSwitch };

struct LoopDecision {
  LoopTier tier = LoopTier::None;
  int n_a = 0;
  int n_o = 0;
  std::optional<std::string> blacklisted;  // action fingerprint
  std::string directive;
  bool operator==(const LoopDecision&) const = default;
};

struct JudgeVerdict {
  bool complete = false;
  std::string reason;
  std::string missing_steps;
  bool overridden = false;
  bool operator==(const JudgeVerdict&) const = default;
};

enum class GateValue { Done, Continue, Fail };

struct GateDecision {
  GateValue value = GateValue::Continue;
  std::vector<SuccessCriterion> criteria_snapshot;
  bool ui_stable = true;
  bool operator==(const GateDecision&) const = default;
};

// --- trajectory --------------------------------------------------------------

struct Injected {
  std::string kind;  // directive | knowledge | rejection-reason
  std::string text;
  bool operator==(const Injected&) const = default;
};

struct StepRecord {
  int step_index = 0;
  std::string prompt_digest;
  std::string model_output;
  std::optional<Action> parsed_action;  // absent when every retry was malformed
  Observation pre_obs;
  Observation post_obs;
  std::optional<MicroVerifyOutcome> micro_verify;
  std::optional<LoopDecision> loop_note;
  std::optional<GateDecision> gate_note;
  std::optional<JudgeVerdict> verifier_note;
  std::vector<Injected> injected;
  std::vector<std::string> annotations;
  bool operator==(const StepRecord&) const = default;
};

enum class TerminationKind { DoneAccepted, FailDeclared, BudgetExhausted };

struct TerminationRecord {
  TerminationKind kind = TerminationKind::BudgetExhausted;
  int step_index = 0;
  std::string reason;
  bool operator==(const TerminationRecord&) const = default;
};

struct BeliefState {
  TaskSpec task;
  std::vector<SuccessCriterion> criteria;
  std::vector<StepRecord> history;
  std::vector<std::string> knowledge;          // injected search results, in order
  std::vector<std::string> rejection_reasons;  // judge rejections, in order
  std::vector<std::string> active_directives;  // cleared after one compliant step
  std::set<std::string> blacklist;             // action fingerprints
};

inline void append_step(BeliefState& belief, StepRecord rec) {
  if (rec.step_index != static_cast<int>(belief.history.size())) {
    throw SequencingError("append_step: expected index " +
                          std::to_string(belief.history.size()) + ", got " +
                          std::to_string(rec.step_index));
  }
  belief.history.push_back(std::move(rec));
}

inline void inject_knowledge(BeliefState& belief, const std::string& text) {
  if (text.empty()) throw std::invalid_argument("inject_knowledge: empty text");
  belief.knowledge.push_back(text);
}

// --- enum names --------------------------------------------------------------

inline const char* to_string(CriterionStatus s) {
  return s == CriterionStatus::Unmet ? "unmet" : "met-with-evidence";
}
inline const char* to_string(MicroRule r) {
  switch (r) {
    case MicroRule::ClickNewElement: return "click-new-element";
    case MicroRule::ToggleStateChanged: return "toggle-state-changed";
    case MicroRule::TypeFieldContains: return "type-field-contains";
    case MicroRule::SaveArtifactVisible: return "save-artifact-visible";
    case MicroRule::NoChangeWait: return "no-change-wait";
  }
  return "click-new-element";
}
inline const char* to_string(MicroStatus s) {
  switch (s) {
    case MicroStatus::Yes: return "yes";
    case MicroStatus::No: return "no";
    case MicroStatus::Unknown: return "unknown";
  }
  return "unknown";
}
inline const char* to_string(LoopTier t) {
  switch (t) {
    case LoopTier::None: return "none";
    case LoopTier::ModalitySwitch: return "modality-switch";
    case LoopTier::StrategyChange: return "strategy-change";
    case LoopTier::ReflectionSwitch: return "reflection-switch";
  }
  return "none";
}
inline const char* to_string(GateValue v) {
  switch (v) {
    case GateValue::Done: return "DONE";
    case GateValue::Continue: return "CONTINUE";
    case GateValue::Fail: return "FAIL";
  }
  return "CONTINUE";
}
inline const char* to_string(TerminationKind k) {
  switch (k) {
    case TerminationKind::DoneAccepted: return "done-accepted";
    case TerminationKind::FailDeclared: return "fail-declared";
    case TerminationKind::BudgetExhausted: return "budget-exhausted";
  }
  return "budget-exhausted";
}

namespace detail {

template <class E>
E enum_from(const std::string& s, std::initializer_list<std::pair<const char*, E>> table,
            const char* what) {
  for (const auto& [name, value] : table) {
    if (s == name) return value;
  }
  throw LoadError(std::string(what) + ": unknown value '" + s + "'");
}

}  // namespace detail

inline CriterionStatus criterion_status_from(const std::string& s) {
  return detail::enum_from<CriterionStatus>(
      s, {{"unmet", CriterionStatus::Unmet}, {"met-with-evidence", CriterionStatus::MetWithEvidence}},
      "criterion status");
}
inline MicroRule micro_rule_from(const std::string& s) {
  return detail::enum_from<MicroRule>(s,
                                      {{"click-new-element", MicroRule::ClickNewElement},
                                       {"toggle-state-changed", MicroRule::ToggleStateChanged},
                                       {"type-field-contains", MicroRule::TypeFieldContains},
                                       {"save-artifact-visible", MicroRule::SaveArtifactVisible},
                                       {"no-change-wait", MicroRule::NoChangeWait}},
                                      "micro rule");
}
inline MicroStatus micro_status_from(const std::string& s) {
  return detail::enum_from<MicroStatus>(
      s, {{"yes", MicroStatus::Yes}, {"no", MicroStatus::No}, {"unknown", MicroStatus::Unknown}},
      "micro status");
}
inline LoopTier loop_tier_from(const std::string& s) {
  return detail::enum_from<LoopTier>(s,
                                     {{"none", LoopTier::None},
                                      {"modality-switch", LoopTier::ModalitySwitch},
                                      {"strategy-change", LoopTier::StrategyChange},
                                      {"reflection-switch", LoopTier::ReflectionSwitch}},
                                     "loop tier");
}
inline GateValue gate_value_from(const std::string& s) {
  return detail::enum_from<GateValue>(
      s, {{"DONE", GateValue::Done}, {"CONTINUE", GateValue::Continue}, {"FAIL", GateValue::Fail}},
      "gate value");
}
inline TerminationKind termination_kind_from(const std::string& s) {
  return detail::enum_from<TerminationKind>(s,
                                            {{"done-accepted", TerminationKind::DoneAccepted},
                                             {"fail-declared", TerminationKind::FailDeclared},
                                             {"budget-exhausted", TerminationKind::BudgetExhausted}},
                                            "termination kind");
}

// --- JSON --------------------------------------------------------------------
// Field order is fixed by hand so serialized logs are byte-stable.

inline json to_json(const FeatureFlags& f) {
  return json{{"verifier", f.verifier},
              {"loop_breaker", f.loop_breaker},
              {"search", f.search},
              {"coder", f.coder},
              {"grounder", f.grounder}};
}
inline FeatureFlags feature_flags_from_json(const json& j) {
  FeatureFlags f;
  f.verifier = j.value("verifier", true);
  f.loop_breaker = j.value("loop_breaker", true);
  f.search = j.value("search", true);
  f.coder = j.value("coder", true);
  f.grounder = j.value("grounder", true);
  return f;
}

inline json to_json(const TaskSpec& t) {
  return json{{"id", t.id},
              {"instruction", t.instruction},
              {"step_budget", t.step_budget},
              {"tag", t.tag},
              {"feature_flags", to_json(t.flags)}};
}
inline TaskSpec task_spec_from_json(const json& j) {
  TaskSpec t;
  t.id = j.at("id").get<std::string>();
  t.instruction = j.at("instruction").get<std::string>();
  t.step_budget = j.at("step_budget").get<int>();
  t.tag = j.value("tag", std::string{});
  if (j.contains("feature_flags")) t.flags = feature_flags_from_json(j.at("feature_flags"));
  if (t.id.empty()) throw LoadError("task id must be nonempty");
  if (t.step_budget < 1) throw LoadError("step_budget must be >= 1");
  return t;
}

inline json to_json(const ObsElement& e) {
  return json{{"label", e.label}, {"x", e.x},       {"y", e.y},
              {"w", e.w},         {"h", e.h},       {"kind", e.kind},
              {"state", e.state}};
}
inline ObsElement obs_element_from_json(const json& j) {
  ObsElement e;
  e.label = j.at("label").get<std::string>();
  e.x = j.at("x").get<int>();
  e.y = j.at("y").get<int>();
  e.w = j.at("w").get<int>();
  e.h = j.at("h").get<int>();
  e.kind = j.value("kind", std::string{});
  e.state = j.value("state", std::string{});
  return e;
}

inline json to_json(const Observation& o) {
  json els = json::array();
  for (const auto& e : o.elements) els.push_back(to_json(e));
  return json{{"step_index", o.step_index},
              {"screen_digest", o.screen_digest},
              {"elements", std::move(els)},
              {"image_ref", o.image_ref},
              {"stable", o.stable}};
}
inline Observation observation_from_json(const json& j) {
  Observation o;
  o.step_index = j.at("step_index").get<int>();
  o.screen_digest = j.at("screen_digest").get<std::string>();
  for (const auto& e : j.at("elements")) o.elements.push_back(obs_element_from_json(e));
  o.image_ref = j.value("image_ref", std::string{});
  o.stable = j.at("stable").get<bool>();
  return o;
}

inline json to_json(const SuccessCriterion& c) {
  return json{{"index", c.index},
              {"statement", c.statement},
              {"exact_check", c.exact_check},
              {"status", to_string(c.status)},
              {"evidence", c.evidence}};
}
inline SuccessCriterion criterion_from_json(const json& j) {
  SuccessCriterion c;
  c.index = j.at("index").get<int>();
  c.statement = j.at("statement").get<std::string>();
  c.exact_check = j.at("exact_check").get<bool>();
  c.status = criterion_status_from(j.at("status").get<std::string>());
  c.evidence = j.value("evidence", std::string{});
  return c;
}

inline json to_json(const MicroVerifyOutcome& m) {
  return json{{"rule", to_string(m.rule)},
              {"expected", m.expected},
              {"satisfied", to_string(m.satisfied)},
              {"evidence", m.evidence}};
}
inline MicroVerifyOutcome micro_from_json(const json& j) {
  MicroVerifyOutcome m;
  m.rule = micro_rule_from(j.at("rule").get<std::string>());
  m.expected = j.value("expected", std::string{});
  m.satisfied = micro_status_from(j.at("satisfied").get<std::string>());
  m.evidence = j.value("evidence", std::string{});
  return m;
}

inline json to_json(const LoopDecision& d) {
  json j{{"tier", to_string(d.tier)}, {"n_a", d.n_a}, {"n_o", d.n_o}};
  j["blacklisted"] = d.blacklisted ? json(*d.blacklisted) : json(nullptr);
  j["directive"] = d.directive;
  return j;
}
inline LoopDecision loop_decision_from_json(const json& j) {
  LoopDecision d;
  d.tier = loop_tier_from(j.at("tier").get<std::string>());
  d.n_a = j.at("n_a").get<int>();
  d.n_o = j.at("n_o").get<int>();
  if (j.contains("blacklisted") && !j.at("blacklisted").is_null())
    d.blacklisted = j.at("blacklisted").get<std::string>();
  d.directive = j.value("directive", std::string{});
  return d;
}

inline json to_json(const JudgeVerdict& v) {
  return json{{"complete", v.complete},
              {"reason", v.reason},
              {"missing_steps", v.missing_steps},
              {"overridden", v.overridden}};
}
inline JudgeVerdict judge_from_json(const json& j) {
  JudgeVerdict v;
  v.complete = j.at("complete").get<bool>();
  v.reason = j.value("reason", std::string{});
  v.missing_steps = j.value("missing_steps", std::string{});
  v.overridden = j.value("overridden", false);
  return v;
}

inline json to_json(const GateDecision& g) {
  json crit = json::array();
  for (const auto& c : g.criteria_snapshot) crit.push_back(to_json(c));
  return json{{"value", to_string(g.value)},
              {"criteria", std::move(crit)},
              {"ui_stable", g.ui_stable}};
}
inline GateDecision gate_from_json(const json& j) {
  GateDecision g;
  g.value = gate_value_from(j.at("value").get<std::string>());
  for (const auto& c : j.at("criteria")) g.criteria_snapshot.push_back(criterion_from_json(c));
  g.ui_stable = j.at("ui_stable").get<bool>();
  return g;
}

inline json to_json(const StepRecord& r) {
  json j;
  j["type"] = "step";
  j["step_index"] = r.step_index;
  j["prompt_digest"] = r.prompt_digest;
  j["model_output"] = r.model_output;
  j["action"] = r.parsed_action ? json(serialize_action(*r.parsed_action)) : json(nullptr);
  j["pre_obs"] = to_json(r.pre_obs);
  j["post_obs"] = to_json(r.post_obs);
  j["micro_verify"] = r.micro_verify ? to_json(*r.micro_verify) : json(nullptr);
  j["loop_note"] = r.loop_note ? to_json(*r.loop_note) : json(nullptr);
  j["gate_note"] = r.gate_note ? to_json(*r.gate_note) : json(nullptr);
  j["verifier_note"] = r.verifier_note ? to_json(*r.verifier_note) : json(nullptr);
  json inj = json::array();
  for (const auto& i : r.injected) inj.push_back(json{{"kind", i.kind}, {"text", i.text}});
  j["injected"] = std::move(inj);
  j["annotations"] = r.annotations;
  return j;
}
inline StepRecord step_from_json(const json& j) {
  StepRecord r;
  r.step_index = j.at("step_index").get<int>();
  r.prompt_digest = j.at("prompt_digest").get<std::string>();
  r.model_output = j.at("model_output").get<std::string>();
  if (!j.at("action").is_null()) {
    auto parsed = parse_grounded_action(j.at("action").get<std::string>());
    if (!parsed.ok()) throw LoadError("unreadable action in step record: " + parsed.error().message);
    r.parsed_action = parsed.value();
  }
  r.pre_obs = observation_from_json(j.at("pre_obs"));
  r.post_obs = observation_from_json(j.at("post_obs"));
  if (!j.at("micro_verify").is_null()) r.micro_verify = micro_from_json(j.at("micro_verify"));
  if (!j.at("loop_note").is_null()) r.loop_note = loop_decision_from_json(j.at("loop_note"));
  if (j.contains("gate_note") && !j.at("gate_note").is_null())
    r.gate_note = gate_from_json(j.at("gate_note"));
  if (!j.at("verifier_note").is_null()) r.verifier_note = judge_from_json(j.at("verifier_note"));
  for (const auto& i : j.at("injected"))
    r.injected.push_back({i.at("kind").get<std::string>(), i.at("text").get<std::string>()});
  for (const auto& a : j.at("annotations")) r.annotations.push_back(a.get<std::string>());
  return r;
}

inline json to_json(const TerminationRecord& t) {
  return json{{"kind", to_string(t.kind)}, {"step_index", t.step_index}, {"reason", t.reason}};
}
inline TerminationRecord termination_from_json(const json& j) {
  TerminationRecord t;
  t.kind = termination_kind_from(j.at("kind").get<std::string>());
  t.step_index = j.at("step_index").get<int>();
  t.reason = j.value("reason", std::string{});
  return t;
}

// --- trajectory files --------------------------------------------------------
// One JSON object per line: a header carrying the task and config snapshot,
// then step records, then a trailer with the termination ruling (or an abort
// marker when the backend died mid-run).

struct Trajectory {
  json header;  // {"type":"header","task":...,"config":...}
  std::vector<StepRecord> steps;
  json trailer;  // {"type":"trailer",...} or {"type":"aborted",...}
};

inline std::string trajectory_to_jsonl(const Trajectory& t) {
  std::string out = t.header.dump() + "\n";
  for (const auto& s : t.steps) out += to_json(s).dump() + "\n";
  if (!t.trailer.is_null()) out += t.trailer.dump() + "\n";
  return out;
}

inline void save_trajectory(const std::string& path, const Trajectory& t) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw LoadError("cannot open for write: " + path);
  f << trajectory_to_jsonl(t);
}

inline Trajectory load_trajectory(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw LoadError("cannot open: " + path);
  Trajectory t;
  t.trailer = nullptr;
  std::string line;
  bool saw_header = false;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw LoadError(path + ": bad JSONL line: " + e.what());
    }
    std::string type = j.value("type", std::string{});
    if (type == "header") {
      t.header = std::move(j);
      saw_header = true;
    } else if (type == "step") {
      t.steps.push_back(step_from_json(j));
    } else if (type == "trailer" || type == "aborted") {
      t.trailer = std::move(j);
    } else {
      throw LoadError(path + ": unknown record type '" + type + "'");
    }
  }
  if (!saw_header) throw LoadError(path + ": missing header line");
  return t;
}

}  // namespace guipilot
