#pragma once

// Random generator for grammar actions in the canonical domain: every value it
// produces is expected to survive parse(serialize(a)) == a exactly. Stays in
// domain by construction: key lists are pre-normalized (the parser lowercases
// and splits them), counts are positive, and free-text strings avoid the one
// sequence the fence scanner reserves (```)

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "guipilot/grammar.hpp"

namespace testing {

using guipilot::Action;

inline std::string random_text(std::mt19937& rng, bool spicy) {
  static const std::vector<std::string> plain = {
      "OK", "Save", "File menu", "dark mode", "the big red button", "entry 12",
      "user@example.com", "C:/temp/report.pdf", "Sheet 2", "Done button",
  };
  static const std::vector<std::string> chunks = {
      "\"", "\\", "\n", "\t", "\r", "'", ",", "(", ")", "{", "}", "[", "]",
      "héllo", "日本語", "«quoted»", "a + b", "50%", "#tag", "`code`", "$HOME",
      "agent.done()", "semi;colon", "  spaced  ", "line\nbreak", "tab\tstop",
  };
  if (!spicy) return plain[rng() % plain.size()];
  std::string s;
  int parts = 1 + static_cast<int>(rng() % 4);
  for (int i = 0; i < parts; ++i) {
    if (rng() % 2) s += plain[rng() % plain.size()];
    else s += chunks[rng() % chunks.size()];
    if (i + 1 < parts && rng() % 2) s += " ";
  }
  return s;
}

inline std::string random_key(std::mt19937& rng) {
  static const std::vector<std::string> keys = {
      "ctrl", "alt", "shift", "cmd", "tab", "escape", "enter", "space",
      "a", "b", "c", "k", "o", "s", "f5", "delete", "home", "end",
  };
  return keys[rng() % keys.size()];
}

inline Action random_action(std::mt19937& rng) {
  bool spicy = rng() % 2 == 0;
  switch (rng() % 16) {
    case 0: {
      guipilot::ClickAction a;
      a.target = random_text(rng, spicy);
      a.count = 1 + static_cast<int>(rng() % 3);
      a.button = static_cast<guipilot::MouseButton>(rng() % 3);
      int mods = static_cast<int>(rng() % 3);
      for (int i = 0; i < mods; ++i) a.modifiers.push_back(random_key(rng));
      return a;
    }
    case 1: return guipilot::DoubleClickAction{random_text(rng, spicy)};
    case 2: {
      guipilot::TypeAction a;
      a.target = random_text(rng, spicy);
      a.text = random_text(rng, true);
      a.overwrite = rng() % 2;
      a.submit = rng() % 2;
      return a;
    }
    case 3: return guipilot::DragAndDropAction{random_text(rng, spicy), random_text(rng, spicy)};
    case 4:
      return guipilot::HighlightTextSpanAction{random_text(rng, spicy), random_text(rng, spicy)};
    case 5: {
      guipilot::ScrollAction a;
      a.target = random_text(rng, spicy);
      a.axis = rng() % 2 ? guipilot::ScrollAxis::Vertical : guipilot::ScrollAxis::Horizontal;
      a.amount = static_cast<int>(rng() % 21) - 10;
      return a;
    }
    case 6: return guipilot::OpenAction{random_text(rng, spicy)};
    case 7: return guipilot::SwitchApplicationsAction{random_text(rng, spicy)};
    case 8: {
      guipilot::HotkeyAction a;
      int n = 1 + static_cast<int>(rng() % 3);
      for (int i = 0; i < n; ++i) a.keys.push_back(random_key(rng));
      return a;
    }
    case 9: {
      guipilot::HoldAndPressAction a;
      int nh = 1 + static_cast<int>(rng() % 2), np = 1 + static_cast<int>(rng() % 2);
      for (int i = 0; i < nh; ++i) a.held_keys.push_back(random_key(rng));
      for (int i = 0; i < np; ++i) a.pressed_keys.push_back(random_key(rng));
      return a;
    }
    case 10: return guipilot::CallCodeAgentAction{random_text(rng, true)};
    case 11: return guipilot::CallSearchAgentAction{random_text(rng, true)};
    case 12: {
      guipilot::SetCellValuesAction a;
      int n = 1 + static_cast<int>(rng() % 3);
      for (int i = 0; i < n; ++i)
        a.cells.emplace_back(random_text(rng, false), random_text(rng, true));
      std::sort(a.cells.begin(), a.cells.end());
      return a;
    }
    case 13: return guipilot::WaitAction{1 + static_cast<int>(rng() % 9)};
    case 14: return guipilot::DoneAction{};
    default: return guipilot::FailAction{};
  }
}

// Random raw text with grammar-adjacent shrapnel for parser totality fuzzing.
inline std::string random_garbage(std::mt19937& rng) {
  static const std::vector<std::string> bits = {
      "agent.", "agent.click(", "click(\"x\"", "\"unterminated", ")", "(",
      "agent.done()", "agent.done() agent.fail()", "```", "```\nagent.wait(",
      "{", "}", "{\"complete\": ", "true", "false", "\"reason\":", "null",
      "DONE", "FAIL", "CONTINUE", "(Completion Gate)", "(Grounded Action)",
      "Progress signal:", "Strategy signal:", "Verdict:", "case 1", "case 2",
      "yes", "no", "\\", "\"", ",,", "  ", "\n", "\t", "missing_steps",
      "agent.hotkey(", "+", "''", "0x12", "-5", "1e9", "§¶•", "\xff\xfe",
  };
  std::string s;
  int parts = static_cast<int>(rng() % 12);
  for (int i = 0; i < parts; ++i) s += bits[rng() % bits.size()];
  return s;
}

}  // namespace testing
