#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace guipilot {

enum class MouseButton { Left, Right, Middle };
enum class ScrollAxis { Vertical, Horizontal };

// One struct per row of the Manager's action space. Targets are free-text
// element descriptions that the grounder resolves to coordinates later.
struct ClickAction {
  std::string target;
  int count = 1;
  MouseButton button = MouseButton::Left;
  std::vector<std::string> modifiers;
  bool operator==(const ClickAction&) const = default;
};

struct DoubleClickAction {
  std::string target;
  bool operator==(const DoubleClickAction&) const = default;
};

struct TypeAction {
  std::string target;
  std::string text;
  bool overwrite = false;
  bool submit = false;
  bool operator==(const TypeAction&) const = default;
};

struct DragAndDropAction {
  std::string source;
  std::string dest;
  bool operator==(const DragAndDropAction&) const = default;
};

struct HighlightTextSpanAction {
  std::string start_phrase;
  std::string end_phrase;
  bool operator==(const HighlightTextSpanAction&) const = default;
};

struct ScrollAction {
  std::string target;
  ScrollAxis axis = ScrollAxis::Vertical;
  int amount = 0;
  bool operator==(const ScrollAction&) const = default;
};

struct OpenAction {
  std::string name;
  bool operator==(const OpenAction&) const = default;
};

struct SwitchApplicationsAction {
  std::string name;
  bool operator==(const SwitchApplicationsAction&) const = default;
};

struct HotkeyAction {
  std::vector<std::string> keys;  // canonical lowercase, e.g. {"ctrl","s"}
  bool operator==(const HotkeyAction&) const = default;
};

struct HoldAndPressAction {
  std::vector<std::string> held_keys;
  std::vector<std::string> pressed_keys;
  bool operator==(const HoldAndPressAction&) const = default;
};

struct CallCodeAgentAction {
  std::string task;
  bool operator==(const CallCodeAgentAction&) const = default;
};

struct CallSearchAgentAction {
  std::string query;
  bool operator==(const CallSearchAgentAction&) const = default;
};

struct SetCellValuesAction {
  // kept sorted by cell key so the canonical form is stable
  std::vector<std::pair<std::string, std::string>> cells;
  bool operator==(const SetCellValuesAction&) const = default;
};

struct WaitAction {
  int seconds = 1;
  bool operator==(const WaitAction&) const = default;
};

struct DoneAction {
  bool operator==(const DoneAction&) const = default;
};

struct FailAction {
  bool operator==(const FailAction&) const = default;
};

using Action = std::variant<ClickAction, DoubleClickAction, TypeAction, DragAndDropAction,
                            HighlightTextSpanAction, ScrollAction, OpenAction,
                            SwitchApplicationsAction, HotkeyAction, HoldAndPressAction,
                            CallCodeAgentAction, CallSearchAgentAction, SetCellValuesAction,
                            WaitAction, DoneAction, FailAction>;

inline const char* button_name(MouseButton b) {
  switch (b) {
    case MouseButton::Left: return "left";
    case MouseButton::Right: return "right";
    case MouseButton::Middle: return "middle";
  }
  return "left";
}

inline const char* axis_name(ScrollAxis a) {
  return a == ScrollAxis::Vertical ? "vertical" : "horizontal";
}

// API function name as the Manager writes it, e.g. "click", "call_search_agent".
inline std::string action_name(const Action& a) {
  struct V {
    std::string operator()(const ClickAction&) const { return "click"; }
    std::string operator()(const DoubleClickAction&) const { return "double_click"; }
    std::string operator()(const TypeAction&) const { return "type"; }
    std::string operator()(const DragAndDropAction&) const { return "drag_and_drop"; }
    std::string operator()(const HighlightTextSpanAction&) const { return "highlight_text_span"; }
    std::string operator()(const ScrollAction&) const { return "scroll"; }
    std::string operator()(const OpenAction&) const { return "open"; }
    std::string operator()(const SwitchApplicationsAction&) const { return "switch_applications"; }
    std::string operator()(const HotkeyAction&) const { return "hotkey"; }
    std::string operator()(const HoldAndPressAction&) const { return "hold_and_press"; }
    std::string operator()(const CallCodeAgentAction&) const { return "call_code_agent"; }
    std::string operator()(const CallSearchAgentAction&) const { return "call_search_agent"; }
    std::string operator()(const SetCellValuesAction&) const { return "set_cell_values"; }
    std::string operator()(const WaitAction&) const { return "wait"; }
    std::string operator()(const DoneAction&) const { return "done"; }
    std::string operator()(const FailAction&) const { return "fail"; }
  };
  return std::visit(V{}, a);
}

inline bool is_terminal(const Action& a) {
  return std::holds_alternative<DoneAction>(a) || std::holds_alternative<FailAction>(a);
}

inline bool is_tool_call(const Action& a) {
  return std::holds_alternative<CallCodeAgentAction>(a) ||
         std::holds_alternative<CallSearchAgentAction>(a);
}

// UI variants touch the environment and therefore go through micro-verification
// and the loop breaker; tool calls and terminals do not.
inline bool is_ui_action(const Action& a) {
  return !is_terminal(a) && !is_tool_call(a);
}

// Lowercase + collapse runs of whitespace + trim. Used for target descriptions
// so trivially different strings compare equal in loop detection.
inline std::string normalize_target(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

namespace detail {

inline std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline Action normalized_copy(const Action& a) {
  Action c = a;
  struct V {
    void operator()(ClickAction& x) const {
      x.target = normalize_target(x.target);
      for (auto& m : x.modifiers) m = normalize_target(m);
    }
    void operator()(DoubleClickAction& x) const { x.target = normalize_target(x.target); }
    void operator()(TypeAction& x) const { x.target = normalize_target(x.target); }
    void operator()(DragAndDropAction& x) const {
      x.source = normalize_target(x.source);
      x.dest = normalize_target(x.dest);
    }
    void operator()(HighlightTextSpanAction& x) const {
      x.start_phrase = normalize_target(x.start_phrase);
      x.end_phrase = normalize_target(x.end_phrase);
    }
    void operator()(ScrollAction& x) const { x.target = normalize_target(x.target); }
    void operator()(OpenAction& x) const { x.name = normalize_target(x.name); }
    void operator()(SwitchApplicationsAction& x) const { x.name = normalize_target(x.name); }
    void operator()(HotkeyAction& x) const {
      for (auto& k : x.keys) k = normalize_target(k);
    }
    void operator()(HoldAndPressAction& x) const {
      for (auto& k : x.held_keys) k = normalize_target(k);
      for (auto& k : x.pressed_keys) k = normalize_target(k);
    }
    void operator()(CallCodeAgentAction&) const {}
    void operator()(CallSearchAgentAction&) const {}
    void operator()(SetCellValuesAction& x) const {
      std::sort(x.cells.begin(), x.cells.end());
    }
    void operator()(WaitAction&) const {}
    void operator()(DoneAction&) const {}
    void operator()(FailAction&) const {}
  };
  std::visit(V{}, c);
  return c;
}

}  // namespace detail

}  // namespace guipilot
