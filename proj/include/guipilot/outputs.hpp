#pragma once

#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "guipilot/core.hpp"
#include "guipilot/grammar.hpp"

namespace guipilot {

// --- manager output ----------------------------------------------------------

struct ManagerOutput {
  std::string completion_gate;
  GateValue gate_decision = GateValue::Continue;
  bool gate_ambiguous = false;  // conflicting tokens, coerced to CONTINUE
  std::string prev_verification;
  std::string screenshot_analysis;
  std::string next_action;
  std::string grounded_action_text;
  Action grounded_action = DoneAction{};
};

namespace detail {

inline size_t ifind(std::string_view haystack, std::string_view needle, size_t from = 0) {
  if (needle.empty() || haystack.size() < needle.size()) return std::string_view::npos;
  for (size_t i = from; i + needle.size() <= haystack.size(); ++i) {
    size_t j = 0;
    while (j < needle.size() &&
           std::tolower(static_cast<unsigned char>(haystack[i + j])) ==
               std::tolower(static_cast<unsigned char>(needle[j]))) {
      ++j;
    }
    if (j == needle.size()) return i;
  }
  return std::string_view::npos;
}

inline bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Collects which of the uppercase decision tokens appear as whole words.
// Case-sensitive on purpose: criteria prose may mention "done" freely.
inline void scan_gate_tokens(std::string_view text, bool& done, bool& fail, bool& cont) {
  static constexpr std::array<std::string_view, 3> tokens = {"DONE", "FAIL", "CONTINUE"};
  for (size_t ti = 0; ti < tokens.size(); ++ti) {
    std::string_view tok = tokens[ti];
    size_t pos = 0;
    while ((pos = text.find(tok, pos)) != std::string_view::npos) {
      bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
      size_t end = pos + tok.size();
      bool right_ok = end >= text.size() || !is_word_char(text[end]);
      if (left_ok && right_ok) {
        if (ti == 0) done = true;
        else if (ti == 1) fail = true;
        else cont = true;
        break;
      }
      pos = end;
    }
  }
}

}  // namespace detail

// Splits the Manager's reply into its five parenthesized sections and extracts
// the gate decision plus the single grounded call. Conflicting gate tokens are
// coerced to CONTINUE with gate_ambiguous set so the orchestrator can log it.
inline Result<ManagerOutput> parse_manager_output(const std::string& text) {
  static constexpr std::array<std::string_view, 5> headers = {
      "(completion gate)", "(previous action verification)", "(screenshot analysis)",
      "(next action)", "(grounded action)"};

  std::array<size_t, 5> at{};
  for (size_t i = 0; i < headers.size(); ++i) {
    at[i] = detail::ifind(text, headers[i]);
    if (at[i] == std::string_view::npos) {
      return ParseError{ParseErrorKind::Malformed,
                        "missing section " + std::string(headers[i])};
    }
  }

  // section body = from end of its header to the nearest following header
  auto body = [&](size_t i) {
    size_t begin = at[i] + headers[i].size();
    size_t end = text.size();
    for (size_t k = 0; k < headers.size(); ++k) {
      if (k == i) continue;
      if (at[k] > at[i] && at[k] < end) end = at[k];
    }
    return detail::trim(std::string_view(text).substr(begin, end - begin));
  };

  ManagerOutput out;
  out.completion_gate = body(0);
  out.prev_verification = body(1);
  out.screenshot_analysis = body(2);
  out.next_action = body(3);
  out.grounded_action_text = body(4);

  bool done = false, fail = false, cont = false;
  detail::scan_gate_tokens(out.completion_gate, done, fail, cont);
  int distinct = (done ? 1 : 0) + (fail ? 1 : 0) + (cont ? 1 : 0);
  if (distinct == 0) {
    return ParseError{ParseErrorKind::Malformed, "no gate decision token in Completion Gate"};
  }
  if (distinct > 1) {
    out.gate_decision = GateValue::Continue;
    out.gate_ambiguous = true;
  } else {
    out.gate_decision = done ? GateValue::Done : fail ? GateValue::Fail : GateValue::Continue;
  }

  auto action = parse_grounded_action(out.grounded_action_text);
  if (!action.ok()) return action.error();
  out.grounded_action = action.value();
  return out;
}

// --- reflection signals ------------------------------------------------------

enum class Feasibility { Feasible, Uncertain, Impossible };
enum class StrategySignal { Keep, Switch };

struct ReflectionSignals {
  std::string progress;
  std::string outcome;
  bool loop_detected = false;
  std::string loop_evidence;
  Feasibility feasibility = Feasibility::Feasible;
  GateValue termination = GateValue::Continue;
  StrategySignal strategy = StrategySignal::Keep;
  std::string strategy_reason;
  int verdict_case = 2;  // Case 1 = intervene, Case 2 = on track
};

namespace detail {

// Finds "Label: value" at the start of a line (case-insensitive label).
inline bool labeled_line(std::string_view text, std::string_view label, std::string& value) {
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                           : eol - pos);
    size_t b = 0;
    while (b < line.size() && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
    line = line.substr(b);
    if (line.size() > label.size() && ifind(line.substr(0, label.size()), label) == 0 &&
        line[label.size()] == ':') {
      value = trim(line.substr(label.size() + 1));
      return true;
    }
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return false;
}

inline std::string first_word(const std::string& s) {
  size_t e = 0;
  while (e < s.size() && is_word_char(s[e])) ++e;
  return s.substr(0, e);
}

inline std::string after_first_word(const std::string& s) {
  size_t e = 0;
  while (e < s.size() && is_word_char(s[e])) ++e;
  while (e < s.size() &&
         (std::isspace(static_cast<unsigned char>(s[e])) || s[e] == '-' || s[e] == ':' ||
          s[e] == ',' || s[e] == '.' || s[e] == ';')) {
    ++e;
  }
  return s.substr(e);
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace detail

// Parses the seven labeled lines of the reflection judge. Any missing line is
// malformed; the orchestrator then falls back to strategy=KEEP with a warning.
inline Result<ReflectionSignals> parse_reflection(const std::string& text) {
  ReflectionSignals out;
  std::string v;

  if (!detail::labeled_line(text, "progress signal", v))
    return ParseError{ParseErrorKind::Malformed, "missing Progress signal"};
  out.progress = v;

  if (!detail::labeled_line(text, "outcome signal", v))
    return ParseError{ParseErrorKind::Malformed, "missing Outcome signal"};
  out.outcome = v;

  if (!detail::labeled_line(text, "loop signal", v))
    return ParseError{ParseErrorKind::Malformed, "missing Loop signal"};
  {
    std::string w = detail::lower(detail::first_word(v));
    if (w == "yes") out.loop_detected = true;
    else if (w == "no") out.loop_detected = false;
    else return ParseError{ParseErrorKind::Malformed, "Loop signal must start yes/no"};
    out.loop_evidence = detail::after_first_word(v);
  }

  if (!detail::labeled_line(text, "feasibility signal", v))
    return ParseError{ParseErrorKind::Malformed, "missing Feasibility signal"};
  {
    std::string w = detail::lower(detail::first_word(v));
    if (w == "feasible") out.feasibility = Feasibility::Feasible;
    else if (w == "uncertain") out.feasibility = Feasibility::Uncertain;
    else if (w == "impossible") out.feasibility = Feasibility::Impossible;
    else return ParseError{ParseErrorKind::Malformed, "bad Feasibility signal '" + w + "'"};
  }

  if (!detail::labeled_line(text, "termination signal", v))
    return ParseError{ParseErrorKind::Malformed, "missing Termination signal"};
  {
    std::string w = detail::lower(detail::first_word(v));
    if (w == "done") out.termination = GateValue::Done;
    else if (w == "fail") out.termination = GateValue::Fail;
    else if (w == "continue") out.termination = GateValue::Continue;
    else return ParseError{ParseErrorKind::Malformed, "bad Termination signal '" + w + "'"};
  }

  if (!detail::labeled_line(text, "strategy signal", v))
    return ParseError{ParseErrorKind::Malformed, "missing Strategy signal"};
  {
    std::string w = detail::lower(detail::first_word(v));
    if (w == "keep") out.strategy = StrategySignal::Keep;
    else if (w == "switch") out.strategy = StrategySignal::Switch;
    else return ParseError{ParseErrorKind::Malformed, "bad Strategy signal '" + w + "'"};
    out.strategy_reason = detail::after_first_word(v);
  }

  if (!detail::labeled_line(text, "verdict", v))
    return ParseError{ParseErrorKind::Malformed, "missing Verdict"};
  {
    std::string low = detail::lower(v);
    bool c1 = low.find("case 1") != std::string::npos;
    bool c2 = low.find("case 2") != std::string::npos;
    if (c1 == c2) return ParseError{ParseErrorKind::Malformed, "Verdict must name Case 1 or Case 2"};
    out.verdict_case = c1 ? 1 : 2;
  }

  return out;
}

// --- judge verdict -----------------------------------------------------------

inline std::vector<std::string> default_uncertainty_phrases() {
  return {"not sure", "unclear", "cannot verify"};
}

namespace detail {

// Extracts the first balanced {...} region, skipping braces inside strings.
inline bool first_json_object(std::string_view text, std::string& out) {
  for (size_t start = 0; start < text.size(); ++start) {
    if (text[start] != '{') continue;
    int depth = 0;
    bool in_string = false;
    for (size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (c == '\\') ++i;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}') {
        if (--depth == 0) {
          out = std::string(text.substr(start, i - start + 1));
          return true;
        }
      }
    }
  }
  return false;
}

}  // namespace detail

// Reads the verifier's JSON verdict out of possibly chatty output, then applies
// the conservative override: a "complete" verdict with leftover steps or an
// uncertain reason is flipped to incomplete.
inline Result<JudgeVerdict> parse_judge(
    const std::string& text,
    const std::vector<std::string>& uncertainty_phrases = default_uncertainty_phrases()) {
  std::string blob;
  std::string_view scope = text;
  size_t from = 0;
  json parsed;
  bool got = false;
  while (detail::first_json_object(scope.substr(from), blob)) {
    size_t at = scope.substr(from).find(blob);
    try {
      parsed = json::parse(blob);
      got = true;
      break;
    } catch (const std::exception&) {
      from += at + 1;  // resync past a brace-balanced non-JSON region
    }
  }
  if (!got) return ParseError{ParseErrorKind::Malformed, "no JSON object in judge output"};
  if (!parsed.is_object() || !parsed.contains("complete")) {
    return ParseError{ParseErrorKind::Malformed, "judge JSON lacks 'complete'"};
  }

  JudgeVerdict v;
  const auto& c = parsed.at("complete");
  if (c.is_boolean()) v.complete = c.get<bool>();
  else if (c.is_string() && detail::lower(c.get<std::string>()) == "true") v.complete = true;
  else if (c.is_string() && detail::lower(c.get<std::string>()) == "false") v.complete = false;
  else return ParseError{ParseErrorKind::Malformed, "'complete' must be a boolean"};

  if (parsed.contains("reason") && parsed.at("reason").is_string())
    v.reason = parsed.at("reason").get<std::string>();
  if (parsed.contains("missing_steps")) {
    const auto& m = parsed.at("missing_steps");
    if (m.is_string()) {
      v.missing_steps = m.get<std::string>();
    } else if (m.is_array()) {
      for (const auto& item : m) {
        if (!v.missing_steps.empty()) v.missing_steps += "; ";
        v.missing_steps += item.is_string() ? item.get<std::string>() : item.dump();
      }
    } else if (!m.is_null()) {
      v.missing_steps = m.dump();
    }
  }

  if (v.complete) {
    bool uncertain = false;
    std::string low_reason = detail::lower(v.reason);
    for (const auto& p : uncertainty_phrases) {
      if (!p.empty() && low_reason.find(detail::lower(p)) != std::string::npos) {
        uncertain = true;
        break;
      }
    }
    if (!detail::trim(v.missing_steps).empty() || uncertain) {
      v.complete = false;
      v.overridden = true;
    }
  }
  return v;
}

}  // namespace guipilot
