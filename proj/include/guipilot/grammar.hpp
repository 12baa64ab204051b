#pragma once

#include <cctype>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "guipilot/actions.hpp"

namespace guipilot {

enum class ParseErrorKind { Malformed, UnknownAction, BadArguments };

struct ParseError {
  ParseErrorKind kind = ParseErrorKind::Malformed;
  std::string message;
};

// Tiny either-type; std::expected is not available under -std=c++20.
template <class T>
class Result {
 public:
  Result(T v) : value_(std::move(v)) {}
  Result(ParseError e) : error_(std::move(e)) {}
  bool ok() const { return value_.has_value(); }
  explicit operator bool() const { return ok(); }
  T& value() { return *value_; }
  const T& value() const { return *value_; }
  const ParseError& error() const { return *error_; }

 private:
  std::optional<T> value_;
  std::optional<ParseError> error_;
};

inline std::string quote_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

namespace detail {

inline std::string join_plus(const std::vector<std::string>& keys) {
  std::string out;
  for (size_t i = 0; i < keys.size(); ++i) {
    if (i) out.push_back('+');
    out += keys[i];
  }
  return out;
}

}  // namespace detail

// Canonical single-line call, e.g. `agent.click("OK", 2, "left")`. Feeding the
// result back through parse_grounded_action yields the same Action.
inline std::string serialize_action(const Action& a) {
  struct V {
    std::string operator()(const ClickAction& x) const {
      std::string s = "agent.click(" + quote_string(x.target) + ", " + std::to_string(x.count) +
                      ", " + quote_string(button_name(x.button));
      for (const auto& m : x.modifiers) s += ", " + quote_string(m);
      return s + ")";
    }
    std::string operator()(const DoubleClickAction& x) const {
      return "agent.double_click(" + quote_string(x.target) + ")";
    }
    std::string operator()(const TypeAction& x) const {
      return "agent.type(" + quote_string(x.target) + ", " + quote_string(x.text) + ", " +
             (x.overwrite ? "1" : "0") + ", " + (x.submit ? "1" : "0") + ")";
    }
    std::string operator()(const DragAndDropAction& x) const {
      return "agent.drag_and_drop(" + quote_string(x.source) + ", " + quote_string(x.dest) + ")";
    }
    std::string operator()(const HighlightTextSpanAction& x) const {
      return "agent.highlight_text_span(" + quote_string(x.start_phrase) + ", " +
             quote_string(x.end_phrase) + ")";
    }
    std::string operator()(const ScrollAction& x) const {
      return "agent.scroll(" + quote_string(x.target) + ", " + quote_string(axis_name(x.axis)) +
             ", " + std::to_string(x.amount) + ")";
    }
    std::string operator()(const OpenAction& x) const {
      return "agent.open(" + quote_string(x.name) + ")";
    }
    std::string operator()(const SwitchApplicationsAction& x) const {
      return "agent.switch_applications(" + quote_string(x.name) + ")";
    }
    std::string operator()(const HotkeyAction& x) const {
      std::string s = "agent.hotkey(";
      for (size_t i = 0; i < x.keys.size(); ++i) {
        if (i) s += ", ";
        s += quote_string(x.keys[i]);
      }
      return s + ")";
    }
    std::string operator()(const HoldAndPressAction& x) const {
      return "agent.hold_and_press(" + quote_string(detail::join_plus(x.held_keys)) + ", " +
             quote_string(detail::join_plus(x.pressed_keys)) + ")";
    }
    std::string operator()(const CallCodeAgentAction& x) const {
      return "agent.call_code_agent(" + quote_string(x.task) + ")";
    }
    std::string operator()(const CallSearchAgentAction& x) const {
      return "agent.call_search_agent(" + quote_string(x.query) + ")";
    }
    std::string operator()(const SetCellValuesAction& x) const {
      std::string s = "agent.set_cell_values(";
      for (size_t i = 0; i < x.cells.size(); ++i) {
        if (i) s += ", ";
        s += quote_string(x.cells[i].first) + ", " + quote_string(x.cells[i].second);
      }
      return s + ")";
    }
    std::string operator()(const WaitAction& x) const {
      return "agent.wait(" + std::to_string(x.seconds) + ")";
    }
    std::string operator()(const DoneAction&) const { return "agent.done()"; }
    std::string operator()(const FailAction&) const { return "agent.fail()"; }
  };
  return std::visit(V{}, a);
}

// Loop detection compares actions modulo target phrasing: lowercased,
// whitespace-collapsed locators, sorted cell pairs, payload text untouched.
inline std::string action_fingerprint(const Action& a) {
  return serialize_action(detail::normalized_copy(a));
}

namespace detail {

struct RawArg {
  bool is_string = false;
  std::string text;  // unescaped for strings, trimmed token otherwise
};

inline void skip_ws(std::string_view s, size_t& i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
}

// Reads a quoted string starting at s[i] (a ' or " character). Returns false on
// an unterminated literal.
inline bool read_quoted(std::string_view s, size_t& i, std::string& out) {
  char quote = s[i];
  ++i;
  out.clear();
  while (i < s.size()) {
    char c = s[i];
    if (c == '\\') {
      if (i + 1 >= s.size()) return false;
      char e = s[i + 1];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        default: out.push_back(e);  // \" \\ \' and any unknown escape
      }
      i += 2;
      continue;
    }
    if (c == quote) {
      ++i;
      return true;
    }
    out.push_back(c);
    ++i;
  }
  return false;
}

// Parses the argument list of a call whose '(' sits at s[i]. On success i is
// left one past the closing ')'.
inline bool read_call_args(std::string_view s, size_t& i, std::vector<RawArg>& args,
                           std::string& err) {
  ++i;  // consume '('
  args.clear();
  std::string bare;
  bool have_string = false;
  std::string str_val;
  bool any_token = false;

  auto flush = [&]() -> bool {
    // trim the bare token
    size_t b = 0, e = bare.size();
    while (b < e && std::isspace(static_cast<unsigned char>(bare[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(bare[e - 1]))) --e;
    std::string token = bare.substr(b, e - b);
    if (have_string) {
      if (!token.empty()) {
        err = "junk after string literal";
        return false;
      }
      args.push_back({true, str_val});
    } else {
      if (token.empty()) {
        if (any_token || !args.empty()) {
          err = "empty argument";
          return false;
        }
        return true;  // nullary call
      }
      args.push_back({false, token});
    }
    bare.clear();
    have_string = false;
    return true;
  };

  while (i < s.size()) {
    char c = s[i];
    if (c == '"' || c == '\'') {
      if (have_string) {
        err = "two string literals in one argument";
        return false;
      }
      if (!read_quoted(s, i, str_val)) {
        err = "unterminated string literal";
        return false;
      }
      have_string = true;
      any_token = true;
      continue;
    }
    if (c == ',') {
      any_token = true;
      if (!flush()) return false;
      ++i;
      continue;
    }
    if (c == ')') {
      if (!flush()) return false;
      ++i;
      return true;
    }
    if (!std::isspace(static_cast<unsigned char>(c))) any_token = true;
    bare.push_back(c);
    ++i;
  }
  err = "unterminated call";
  return false;
}

inline bool parse_int_arg(const RawArg& a, int& out) {
  if (a.is_string || a.text.empty()) return false;
  const char* first = a.text.data();
  const char* last = first + a.text.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

inline bool parse_bool_arg(const RawArg& a, bool& out) {
  if (a.is_string) {
    // tolerate quoted "0"/"1"/"true"/"false"
    if (a.text == "1" || a.text == "true" || a.text == "True") { out = true; return true; }
    if (a.text == "0" || a.text == "false" || a.text == "False") { out = false; return true; }
    return false;
  }
  if (a.text == "1" || a.text == "true" || a.text == "True") { out = true; return true; }
  if (a.text == "0" || a.text == "false" || a.text == "False") { out = false; return true; }
  return false;
}

inline std::vector<std::string> split_plus(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == '+') {
      if (!normalize_target(cur).empty()) out.push_back(normalize_target(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!normalize_target(cur).empty()) out.push_back(normalize_target(cur));
  return out;
}

struct FoundCall {
  std::string name;
  std::vector<RawArg> args;
};

// Scans text for `agent.<ident>(...)` calls, consuming string literals so a
// call mentioned inside another call's argument is not double-counted.
// Unparseable argument lists are reported via bad_syntax.
inline std::vector<FoundCall> find_calls(std::string_view text, std::vector<std::string>& bad_syntax) {
  std::vector<FoundCall> calls;
  size_t i = 0;
  const std::string_view marker = "agent.";
  while (i < text.size()) {
    size_t at = text.find(marker, i);
    if (at == std::string_view::npos) break;
    size_t j = at + marker.size();
    std::string name;
    while (j < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) {
      name.push_back(text[j]);
      ++j;
    }
    skip_ws(text, j);
    if (name.empty() || j >= text.size() || text[j] != '(') {
      i = at + marker.size();
      continue;
    }
    std::vector<RawArg> args;
    std::string err;
    size_t k = j;
    if (!read_call_args(text, k, args, err)) {
      bad_syntax.push_back(name + ": " + err);
      i = j + 1;
      continue;
    }
    calls.push_back({std::move(name), std::move(args)});
    i = k;
  }
  return calls;
}

// Pulls out fenced ``` blocks. Returns the number of blocks found and
// concatenates the contents of the first one into `inner`.
inline int extract_fenced(std::string_view text, std::string& inner) {
  int count = 0;
  size_t i = 0;
  while (true) {
    size_t open = text.find("```", i);
    if (open == std::string_view::npos) break;
    size_t body = open + 3;
    // skip an optional language tag up to end of line
    size_t nl = text.find('\n', body);
    size_t close = text.find("```", body);
    if (close == std::string_view::npos) break;  // unterminated fence: ignore
    size_t start = (nl != std::string_view::npos && nl < close) ? nl + 1 : body;
    if (count == 0) inner = std::string(text.substr(start, close - start));
    ++count;
    i = close + 3;
  }
  return count;
}

}  // namespace detail

// Extracts the single `agent.<name>(...)` call from model output. With exactly
// one fenced code block, only the block is searched; zero or multiple calls is
// a malformed-output error so the orchestrator can re-query.
inline Result<Action> parse_grounded_action(const std::string& text) {
  using detail::RawArg;
  std::string scope = text;
  std::string inner;
  int fences = detail::extract_fenced(text, inner);
  if (fences > 1) {
    return ParseError{ParseErrorKind::Malformed, "multiple fenced code blocks"};
  }
  if (fences == 1) scope = inner;

  std::vector<std::string> bad;
  auto calls = detail::find_calls(scope, bad);
  if (calls.empty()) {
    std::string msg = bad.empty() ? "no grounded agent call found" : "broken call: " + bad.front();
    return ParseError{ParseErrorKind::Malformed, msg};
  }
  if (calls.size() > 1) {
    return ParseError{ParseErrorKind::Malformed, "multiple grounded agent calls"};
  }

  const auto& call = calls.front();
  const auto& args = call.args;
  auto bad_args = [&](const std::string& why) -> ParseError {
    return ParseError{ParseErrorKind::BadArguments, call.name + ": " + why};
  };
  auto want_string = [&](size_t idx, std::string& out) -> bool {
    if (idx >= args.size() || !args[idx].is_string) return false;
    out = args[idx].text;
    return true;
  };

  const std::string& n = call.name;
  if (n == "click") {
    ClickAction a;
    if (!want_string(0, a.target)) return bad_args("expects a quoted target");
    if (args.size() >= 2 && !detail::parse_int_arg(args[1], a.count))
      return bad_args("count must be an integer");
    if (a.count < 1) return bad_args("count must be positive");
    if (args.size() >= 3) {
      std::string b;
      if (!want_string(2, b)) return bad_args("button must be a quoted string");
      b = normalize_target(b);
      if (b == "left") a.button = MouseButton::Left;
      else if (b == "right") a.button = MouseButton::Right;
      else if (b == "middle") a.button = MouseButton::Middle;
      else return bad_args("unknown mouse button '" + b + "'");
    }
    for (size_t idx = 3; idx < args.size(); ++idx) {
      std::string m;
      if (!want_string(idx, m)) return bad_args("modifiers must be quoted strings");
      a.modifiers.push_back(normalize_target(m));
    }
    return Action{a};
  }
  if (n == "double_click") {
    DoubleClickAction a;
    if (args.size() != 1 || !want_string(0, a.target))
      return bad_args("expects exactly one quoted target");
    return Action{a};
  }
  if (n == "type") {
    TypeAction a;
    if (args.size() < 2 || args.size() > 4) return bad_args("expects 2 to 4 arguments");
    if (!want_string(0, a.target)) return bad_args("target must be a quoted string");
    if (!want_string(1, a.text)) return bad_args("text must be a quoted string");
    if (args.size() >= 3 && !detail::parse_bool_arg(args[2], a.overwrite))
      return bad_args("overwrite flag must be 0/1");
    if (args.size() >= 4 && !detail::parse_bool_arg(args[3], a.submit))
      return bad_args("submit flag must be 0/1");
    return Action{a};
  }
  if (n == "drag_and_drop") {
    DragAndDropAction a;
    if (args.size() != 2 || !want_string(0, a.source) || !want_string(1, a.dest))
      return bad_args("expects two quoted element descriptions");
    return Action{a};
  }
  if (n == "highlight_text_span") {
    HighlightTextSpanAction a;
    if (args.size() != 2 || !want_string(0, a.start_phrase) || !want_string(1, a.end_phrase))
      return bad_args("expects two quoted phrases");
    return Action{a};
  }
  if (n == "scroll") {
    ScrollAction a;
    if (args.size() == 2) {
      if (!want_string(0, a.target)) return bad_args("target must be a quoted string");
      if (!detail::parse_int_arg(args[1], a.amount)) return bad_args("amount must be an integer");
      return Action{a};
    }
    if (args.size() != 3) return bad_args("expects (target, axis, amount)");
    std::string axis;
    if (!want_string(0, a.target)) return bad_args("target must be a quoted string");
    if (!want_string(1, axis)) return bad_args("axis must be a quoted string");
    axis = normalize_target(axis);
    if (axis == "vertical") a.axis = ScrollAxis::Vertical;
    else if (axis == "horizontal") a.axis = ScrollAxis::Horizontal;
    else return bad_args("axis must be vertical or horizontal");
    if (!detail::parse_int_arg(args[2], a.amount)) return bad_args("amount must be an integer");
    return Action{a};
  }
  if (n == "open") {
    OpenAction a;
    if (args.size() != 1 || !want_string(0, a.name))
      return bad_args("expects one quoted application or file name");
    return Action{a};
  }
  if (n == "switch_applications") {
    SwitchApplicationsAction a;
    if (args.size() != 1 || !want_string(0, a.name))
      return bad_args("expects one quoted application name");
    return Action{a};
  }
  if (n == "hotkey") {
    HotkeyAction a;
    if (args.empty()) return bad_args("expects at least one key");
    for (size_t idx = 0; idx < args.size(); ++idx) {
      std::string k;
      if (!want_string(idx, k)) return bad_args("keys must be quoted strings");
      for (auto& part : detail::split_plus(k)) a.keys.push_back(std::move(part));
    }
    if (a.keys.empty()) return bad_args("no usable keys");
    return Action{a};
  }
  if (n == "hold_and_press") {
    HoldAndPressAction a;
    std::string held, pressed;
    if (args.size() != 2 || !want_string(0, held) || !want_string(1, pressed))
      return bad_args("expects (held_keys, pressed_keys) as quoted '+'-joined lists");
    a.held_keys = detail::split_plus(held);
    a.pressed_keys = detail::split_plus(pressed);
    if (a.held_keys.empty() || a.pressed_keys.empty())
      return bad_args("both key lists must be non-empty");
    return Action{a};
  }
  if (n == "call_code_agent") {
    CallCodeAgentAction a;
    if (args.size() != 1 || !want_string(0, a.task))
      return bad_args("expects one quoted task description");
    return Action{a};
  }
  if (n == "call_search_agent") {
    CallSearchAgentAction a;
    if (args.size() != 1 || !want_string(0, a.query))
      return bad_args("expects one quoted query");
    return Action{a};
  }
  if (n == "set_cell_values") {
    SetCellValuesAction a;
    if (args.empty() || args.size() % 2 != 0)
      return bad_args("expects an even number of quoted cell/value arguments");
    for (size_t idx = 0; idx + 1 < args.size(); idx += 2) {
      std::string cell, val;
      if (!want_string(idx, cell) || !want_string(idx + 1, val))
        return bad_args("cells and values must be quoted strings");
      a.cells.emplace_back(std::move(cell), std::move(val));
    }
    std::sort(a.cells.begin(), a.cells.end());
    return Action{a};
  }
  if (n == "wait") {
    WaitAction a;
    if (args.size() > 1) return bad_args("expects at most one integer");
    if (args.size() == 1) {
      if (!detail::parse_int_arg(args[0], a.seconds)) return bad_args("seconds must be an integer");
      if (a.seconds < 1) return bad_args("seconds must be positive");
    }
    return Action{a};
  }
  if (n == "done") {
    if (!args.empty()) return bad_args("takes no arguments");
    return Action{DoneAction{}};
  }
  if (n == "fail") {
    if (!args.empty()) return bad_args("takes no arguments");
    return Action{FailAction{}};
  }
  return ParseError{ParseErrorKind::UnknownAction, "unknown action '" + n + "'"};
}

}  // namespace guipilot
