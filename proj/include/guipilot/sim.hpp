#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "guipilot/env.hpp"
#include "guipilot/verifier.hpp"

namespace guipilot {

// --- world definition --------------------------------------------------------

struct WorldElement {
  std::string label;
  int x = 0, y = 0, w = 0, h = 0;
  std::string kind = "button";  // button | toggle | field | menu | text
  std::string state;
};

struct WorldEffect {
  enum class Kind {
    Goto,
    SetState,
    Toggle,
    SetFlag,
    ClearFlag,
    AddElement,
    RemoveElement,
    WriteFile,
    DeleteFile,
    SetStable,
  };
  Kind kind = Kind::Goto;
  std::string screen;  // empty = current screen
  std::string label;
  std::string value;  // new state / flag name / goto target / file content
  std::string path;   // file path
  WorldElement element;  // AddElement payload
  bool stable = true;    // SetStable payload
};

struct WorldTransition {
  std::string on;     // element label, chord, app/file name, or "*"
  std::string event;  // click | double_click | type | submit | drag | highlight |
                      // scroll | open | switch | hotkey | hold_press | wait
  std::string dst;    // optional drag-destination label filter
  std::vector<WorldEffect> effects;
};

struct WorldScreen {
  std::string id;
  bool stable = true;
  std::vector<WorldElement> elements;
  std::vector<WorldTransition> transitions;
};

struct SuccessCondition {
  enum class Kind {
    ScreenIs,
    ElementState,
    ElementExists,
    ElementAbsent,
    FileExists,
    FileContains,
    FlagSet,
  };
  Kind kind = Kind::ScreenIs;
  std::string screen;
  std::string label;
  std::string value;
  std::string path;
  std::string desc;  // human phrasing, reused by the oracle judge
};

struct World {
  std::string name;
  std::string initial;
  std::map<std::string, std::string> files;
  std::set<std::string> files_visible_on;
  std::vector<WorldScreen> screens;
  std::set<std::string> traps;  // labels that absorb events without any change
  std::vector<SuccessCondition> success;
};

// --- world loading -----------------------------------------------------------

namespace detail {

inline WorldElement element_from_json(const json& j, const std::string& where) {
  WorldElement e;
  if (!j.contains("label")) throw LoadError(where + ": element missing 'label'");
  e.label = j.at("label").get<std::string>();
  e.x = j.value("x", 0);
  e.y = j.value("y", 0);
  e.w = j.value("w", 10);
  e.h = j.value("h", 10);
  e.kind = j.value("kind", std::string("button"));
  e.state = j.value("state", std::string{});
  if (e.w <= 0 || e.h <= 0) throw LoadError(where + ".bbox: width/height must be positive");
  if (e.x < 0 || e.y < 0 || e.x + e.w > kFrameWidth || e.y + e.h > kFrameHeight) {
    throw LoadError(where + ".bbox: outside the " + std::to_string(kFrameWidth) + "x" +
                    std::to_string(kFrameHeight) + " frame");
  }
  return e;
}

inline WorldEffect effect_from_json(const json& j, const std::string& where) {
  WorldEffect e;
  if (j.contains("goto")) {
    e.kind = WorldEffect::Kind::Goto;
    e.value = j.at("goto").get<std::string>();
  } else if (j.contains("set_state")) {
    e.kind = WorldEffect::Kind::SetState;
    const auto& s = j.at("set_state");
    e.screen = s.value("screen", std::string{});
    e.label = s.at("label").get<std::string>();
    e.value = s.at("state").get<std::string>();
  } else if (j.contains("toggle")) {
    e.kind = WorldEffect::Kind::Toggle;
    e.label = j.at("toggle").get<std::string>();
  } else if (j.contains("set_flag")) {
    e.kind = WorldEffect::Kind::SetFlag;
    e.value = j.at("set_flag").get<std::string>();
  } else if (j.contains("clear_flag")) {
    e.kind = WorldEffect::Kind::ClearFlag;
    e.value = j.at("clear_flag").get<std::string>();
  } else if (j.contains("add_element")) {
    e.kind = WorldEffect::Kind::AddElement;
    const auto& s = j.at("add_element");
    e.screen = s.value("screen", std::string{});
    e.element = element_from_json(s.at("element"), where + ".add_element.element");
  } else if (j.contains("remove_element")) {
    e.kind = WorldEffect::Kind::RemoveElement;
    const auto& s = j.at("remove_element");
    e.screen = s.value("screen", std::string{});
    e.label = s.at("label").get<std::string>();
  } else if (j.contains("write_file")) {
    e.kind = WorldEffect::Kind::WriteFile;
    const auto& s = j.at("write_file");
    e.path = s.at("path").get<std::string>();
    e.value = s.value("content", std::string{});
  } else if (j.contains("delete_file")) {
    e.kind = WorldEffect::Kind::DeleteFile;
    e.path = j.at("delete_file").get<std::string>();
  } else if (j.contains("set_stable")) {
    e.kind = WorldEffect::Kind::SetStable;
    e.stable = j.at("set_stable").get<bool>();
  } else {
    throw LoadError(where + ": unknown effect " + j.dump());
  }
  return e;
}

inline SuccessCondition success_from_json(const json& j, const std::string& where) {
  SuccessCondition c;
  if (!j.contains("desc")) throw LoadError(where + ": success condition missing 'desc'");
  c.desc = j.at("desc").get<std::string>();
  if (j.contains("screen_is")) {
    c.kind = SuccessCondition::Kind::ScreenIs;
    c.screen = j.at("screen_is").get<std::string>();
  } else if (j.contains("element_state")) {
    c.kind = SuccessCondition::Kind::ElementState;
    const auto& s = j.at("element_state");
    c.screen = s.at("screen").get<std::string>();
    c.label = s.at("label").get<std::string>();
    c.value = s.at("equals").get<std::string>();
  } else if (j.contains("element_exists")) {
    c.kind = SuccessCondition::Kind::ElementExists;
    const auto& s = j.at("element_exists");
    c.screen = s.at("screen").get<std::string>();
    c.label = s.at("label").get<std::string>();
  } else if (j.contains("element_absent")) {
    c.kind = SuccessCondition::Kind::ElementAbsent;
    const auto& s = j.at("element_absent");
    c.screen = s.at("screen").get<std::string>();
    c.label = s.at("label").get<std::string>();
  } else if (j.contains("file_exists")) {
    c.kind = SuccessCondition::Kind::FileExists;
    c.path = j.at("file_exists").get<std::string>();
  } else if (j.contains("file_contains")) {
    c.kind = SuccessCondition::Kind::FileContains;
    const auto& s = j.at("file_contains");
    c.path = s.at("path").get<std::string>();
    c.value = s.at("text").get<std::string>();
  } else if (j.contains("flag_set")) {
    c.kind = SuccessCondition::Kind::FlagSet;
    c.value = j.at("flag_set").get<std::string>();
  } else {
    throw LoadError(where + ": unknown success condition " + j.dump());
  }
  return c;
}

}  // namespace detail

inline World world_from_json(const json& j) {
  World w;
  w.name = j.value("name", std::string("unnamed"));
  if (!j.contains("initial")) throw LoadError("world: missing 'initial'");
  w.initial = j.at("initial").get<std::string>();
  if (j.contains("files")) {
    for (const auto& [k, v] : j.at("files").items()) w.files[k] = v.get<std::string>();
  }
  if (j.contains("files_visible_on")) {
    for (const auto& s : j.at("files_visible_on")) w.files_visible_on.insert(s.get<std::string>());
  }
  if (j.contains("traps")) {
    for (const auto& s : j.at("traps")) w.traps.insert(s.get<std::string>());
  }
  if (!j.contains("screens")) throw LoadError("world: missing 'screens'");
  size_t si = 0;
  for (const auto& sj : j.at("screens")) {
    std::string swhere = "screens[" + std::to_string(si) + "]";
    WorldScreen s;
    if (!sj.contains("id")) throw LoadError(swhere + ": missing 'id'");
    s.id = sj.at("id").get<std::string>();
    s.stable = sj.value("stable", true);
    size_t ei = 0;
    for (const auto& ej : sj.value("elements", json::array())) {
      s.elements.push_back(
          detail::element_from_json(ej, swhere + ".elements[" + std::to_string(ei) + "]"));
      ++ei;
    }
    size_t ti = 0;
    for (const auto& tj : sj.value("transitions", json::array())) {
      std::string twhere = swhere + ".transitions[" + std::to_string(ti) + "]";
      WorldTransition t;
      if (!tj.contains("on")) throw LoadError(twhere + ": missing 'on'");
      t.on = tj.at("on").get<std::string>();
      if (!tj.contains("event")) throw LoadError(twhere + ": missing 'event'");
      t.event = tj.at("event").get<std::string>();
      t.dst = tj.value("dst", std::string{});
      const auto& eff = tj.at("effect");
      if (eff.is_array()) {
        size_t fi = 0;
        for (const auto& fj : eff) {
          t.effects.push_back(
              detail::effect_from_json(fj, twhere + ".effect[" + std::to_string(fi) + "]"));
          ++fi;
        }
      } else {
        t.effects.push_back(detail::effect_from_json(eff, twhere + ".effect"));
      }
      s.transitions.push_back(std::move(t));
      ++ti;
    }
    w.screens.push_back(std::move(s));
    ++si;
  }
  size_t ci = 0;
  for (const auto& cj : j.value("success", json::array())) {
    w.success.push_back(detail::success_from_json(cj, "success[" + std::to_string(ci) + "]"));
    ++ci;
  }

  // referential checks
  std::set<std::string> ids;
  for (const auto& s : w.screens) ids.insert(s.id);
  if (!ids.count(w.initial)) throw LoadError("initial: unknown screen '" + w.initial + "'");
  for (size_t i = 0; i < w.screens.size(); ++i) {
    for (size_t t = 0; t < w.screens[i].transitions.size(); ++t) {
      for (size_t f = 0; f < w.screens[i].transitions[t].effects.size(); ++f) {
        const auto& e = w.screens[i].transitions[t].effects[f];
        std::string where = "screens[" + std::to_string(i) + "].transitions[" + std::to_string(t) +
                            "].effect[" + std::to_string(f) + "]";
        if (e.kind == WorldEffect::Kind::Goto && !ids.count(e.value))
          throw LoadError(where + ".goto: unknown screen '" + e.value + "'");
        if (!e.screen.empty() && !ids.count(e.screen))
          throw LoadError(where + ".screen: unknown screen '" + e.screen + "'");
      }
    }
  }
  for (size_t i = 0; i < w.success.size(); ++i) {
    const auto& c = w.success[i];
    if (!c.screen.empty() && !ids.count(c.screen))
      throw LoadError("success[" + std::to_string(i) + "].screen: unknown screen '" + c.screen +
                      "'");
  }
  return w;
}

inline World load_world(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw LoadError("cannot open world: " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const std::exception& e) {
    throw LoadError(path + ": " + e.what());
  }
  try {
    return world_from_json(j);
  } catch (const LoadError& e) {
    throw LoadError(path + ": " + e.what());
  }
}

// --- the simulator -----------------------------------------------------------

class SimDesktop : public Environment {
 public:
  explicit SimDesktop(World world) : world_(std::move(world)) {
    for (const auto& s : world_.screens) screens_[s.id] = s;
    current_ = world_.initial;
    files_ = world_.files;
  }

  Observation observe(int step_index) override {
    const WorldScreen& s = screens_.at(current_);
    Observation o;
    o.step_index = step_index;
    o.stable = s.stable;
    for (const auto& e : s.elements) {
      o.elements.push_back({e.label, e.x, e.y, e.w, e.h, e.kind, e.state});
    }
    o.screen_digest = compute_digest();
    o.image_ref = "sim://" + o.screen_digest;
    return o;
  }

  ExecResult execute(const ResolvedEvent& ev) override {
    uint64_t before = fnv1a64(state_string());
    ExecResult r = dispatch(ev);
    r.changed = fnv1a64(state_string()) != before;
    return r;
  }

  bool success() override {
    for (const auto& c : world_.success) {
      if (!holds(c)) return false;
    }
    return !world_.success.empty();
  }

  std::vector<std::string> unmet_conditions() const {
    std::vector<std::string> out;
    for (const auto& c : world_.success) {
      if (!holds(c)) out.push_back(c.desc);
    }
    return out;
  }

  // earliest element whose bbox contains the point
  const WorldElement* hit_test(int x, int y) const {
    for (const auto& e : screens_.at(current_).elements) {
      if (x >= e.x && x < e.x + e.w && y >= e.y && y < e.y + e.h) return &e;
    }
    return nullptr;
  }

  // label-match grounding: exact normalized match first, then substring either
  // way; earliest element wins a tie
  std::optional<std::pair<int, int>> locate(const std::string& description) const {
    std::string want = normalize_target(description);
    if (want.empty()) return std::nullopt;  // "" would substring-match everything
    const WorldElement* best = nullptr;
    for (const auto& e : screens_.at(current_).elements) {
      if (normalize_target(e.label) == want) {
        best = &e;
        break;
      }
    }
    if (!best) {
      for (const auto& e : screens_.at(current_).elements) {
        std::string have = normalize_target(e.label);
        if (have.empty()) continue;
        if (want.find(have) != std::string::npos || have.find(want) != std::string::npos) {
          best = &e;
          break;
        }
      }
    }
    if (!best) return std::nullopt;
    return std::make_pair(best->x + best->w / 2, best->y + best->h / 2);
  }

  const std::string& current_screen() const { return current_; }
  const std::map<std::string, std::string>& files() const { return files_; }
  const std::set<std::string>& flags() const { return flags_; }

 private:
  ExecResult dispatch(const ResolvedEvent& ev) {
    if (!ev.grounded) return {false, "not-grounded"};
    const Action& a = ev.action;

    if (const auto* w = std::get_if<WaitAction>(&a)) {
      (void)w;
      bool was = screens_.at(current_).stable;
      screens_.at(current_).stable = true;
      if (fire("*", "wait")) return {false, "ok"};
      return {false, was ? "no-op" : "stabilized"};
    }
    if (std::holds_alternative<ClickAction>(a) || std::holds_alternative<DoubleClickAction>(a)) {
      if (!ev.point) return {false, "not-grounded"};
      const WorldElement* el = hit_test(ev.point->first, ev.point->second);
      if (!el) return {false, "missed-click"};
      std::string label = el->label;
      if (world_.traps.count(label)) return {false, "trap-absorbed"};
      const char* kind = std::holds_alternative<ClickAction>(a) ? "click" : "double_click";
      if (fire(label, kind)) return {false, "ok"};
      // default toggle behavior
      if (el->kind == "toggle") {
        WorldElement* mut = find_mutable(current_, label);
        mut->state = (mut->state == "on") ? "off" : "on";
        return {false, "toggled"};
      }
      return {false, "no-op"};
    }
    if (const auto* t = std::get_if<TypeAction>(&a)) {
      if (!ev.point) return {false, "not-grounded"};
      const WorldElement* el = hit_test(ev.point->first, ev.point->second);
      if (!el) return {false, "missed-click"};
      if (world_.traps.count(el->label)) return {false, "trap-absorbed"};
      std::string label = el->label;
      bool fired = fire(label, "type");
      if (!fired && el->kind == "field") {
        WorldElement* mut = find_mutable(current_, label);
        mut->state = t->overwrite ? t->text : mut->state + t->text;
      }
      if (t->submit) fire(label, "submit");
      return {false, "ok"};
    }
    if (std::holds_alternative<DragAndDropAction>(a)) {
      if (!ev.point || !ev.point2) return {false, "not-grounded"};
      const WorldElement* src = hit_test(ev.point->first, ev.point->second);
      if (!src) return {false, "missed-click"};
      if (world_.traps.count(src->label)) return {false, "trap-absorbed"};
      const WorldElement* dst = hit_test(ev.point2->first, ev.point2->second);
      if (fire_drag(src->label, dst ? dst->label : "")) return {false, "ok"};
      return {false, "no-op"};
    }
    if (const auto* h = std::get_if<HighlightTextSpanAction>(&a)) {
      if (fire(h->start_phrase, "highlight", true)) return {false, "ok"};
      return {false, "no-op"};
    }
    if (const auto* s = std::get_if<ScrollAction>(&a)) {
      (void)s;
      if (!ev.point) return {false, "not-grounded"};
      const WorldElement* el = hit_test(ev.point->first, ev.point->second);
      if (!el) return {false, "missed-click"};
      if (world_.traps.count(el->label)) return {false, "trap-absorbed"};
      if (fire(el->label, "scroll")) return {false, "ok"};
      return {false, "no-op"};
    }
    if (const auto* o = std::get_if<OpenAction>(&a)) {
      if (fire(o->name, "open", true)) return {false, "ok"};
      return {false, "no-op"};
    }
    if (const auto* sw = std::get_if<SwitchApplicationsAction>(&a)) {
      if (fire(sw->name, "switch", true)) return {false, "ok"};
      return {false, "no-op"};
    }
    if (const auto* hk = std::get_if<HotkeyAction>(&a)) {
      std::string chord;
      for (size_t i = 0; i < hk->keys.size(); ++i) {
        if (i) chord += "+";
        chord += hk->keys[i];
      }
      if (fire(chord, "hotkey", true)) return {false, "ok"};
      return {false, "no-op"};
    }
    if (const auto* hp = std::get_if<HoldAndPressAction>(&a)) {
      std::string chord;
      for (size_t i = 0; i < hp->held_keys.size(); ++i) {
        if (i) chord += "+";
        chord += hp->held_keys[i];
      }
      chord += "&";
      for (size_t i = 0; i < hp->pressed_keys.size(); ++i) {
        if (i) chord += "+";
        chord += hp->pressed_keys[i];
      }
      if (fire(chord, "hold_press", true)) return {false, "ok"};
      return {false, "no-op"};
    }
    if (const auto* sc = std::get_if<SetCellValuesAction>(&a)) {
      int updated = 0;
      for (const auto& [cell, value] : sc->cells) {
        if (WorldElement* el = find_mutable(current_, cell)) {
          if (el->kind == "field") {
            el->state = value;
            ++updated;
          }
        }
      }
      return {false, updated > 0 ? "ok" : "no-op"};
    }
    return {false, "no-op"};  // terminals and tool calls never reach the env
  }

  // first transition on the current screen matching (on, event); normalized
  // comparison optional for name-like slots
  bool fire(const std::string& on, const std::string& event, bool normalized = false) {
    auto& screen = screens_.at(current_);
    for (const auto& t : screen.transitions) {
      if (t.event != event) continue;
      bool match = t.on == "*" || t.on == on ||
                   (normalized && normalize_target(t.on) == normalize_target(on));
      if (!match) continue;
      apply_effects(t.effects);
      return true;
    }
    return false;
  }

  bool fire_drag(const std::string& src, const std::string& dst) {
    auto& screen = screens_.at(current_);
    for (const auto& t : screen.transitions) {
      if (t.event != "drag") continue;
      if (t.on != "*" && t.on != src) continue;
      if (!t.dst.empty() && t.dst != dst) continue;
      apply_effects(t.effects);
      return true;
    }
    return false;
  }

  void apply_effects(const std::vector<WorldEffect>& effects) {
    for (const auto& e : effects) {
      std::string target_screen = e.screen.empty() ? current_ : e.screen;
      switch (e.kind) {
        case WorldEffect::Kind::Goto:
          current_ = e.value;
          break;
        case WorldEffect::Kind::SetState:
          if (WorldElement* el = find_mutable(target_screen, e.label)) el->state = e.value;
          break;
        case WorldEffect::Kind::Toggle:
          if (WorldElement* el = find_mutable(target_screen, e.label))
            el->state = (el->state == "on") ? "off" : "on";
          break;
        case WorldEffect::Kind::SetFlag:
          flags_.insert(e.value);
          break;
        case WorldEffect::Kind::ClearFlag:
          flags_.erase(e.value);
          break;
        case WorldEffect::Kind::AddElement: {
          auto& els = screens_.at(target_screen).elements;
          bool exists = false;
          for (const auto& x : els) {
            if (x.label == e.element.label) exists = true;
          }
          if (!exists) els.push_back(e.element);
          break;
        }
        case WorldEffect::Kind::RemoveElement: {
          auto& els = screens_.at(target_screen).elements;
          els.erase(std::remove_if(els.begin(), els.end(),
                                   [&](const WorldElement& x) { return x.label == e.label; }),
                    els.end());
          break;
        }
        case WorldEffect::Kind::WriteFile:
          files_[e.path] = e.value;
          break;
        case WorldEffect::Kind::DeleteFile:
          files_.erase(e.path);
          break;
        case WorldEffect::Kind::SetStable:
          screens_.at(current_).stable = e.stable;
          break;
      }
    }
  }

  WorldElement* find_mutable(const std::string& screen_id, const std::string& label) {
    for (auto& e : screens_.at(screen_id).elements) {
      if (e.label == label) return &e;
    }
    return nullptr;
  }

  bool holds(const SuccessCondition& c) const {
    switch (c.kind) {
      case SuccessCondition::Kind::ScreenIs:
        return current_ == c.screen;
      case SuccessCondition::Kind::ElementState: {
        auto it = screens_.find(c.screen);
        if (it == screens_.end()) return false;
        for (const auto& e : it->second.elements) {
          if (e.label == c.label) return e.state == c.value;
        }
        return false;
      }
      case SuccessCondition::Kind::ElementExists: {
        auto it = screens_.find(c.screen);
        if (it == screens_.end()) return false;
        for (const auto& e : it->second.elements) {
          if (e.label == c.label) return true;
        }
        return false;
      }
      case SuccessCondition::Kind::ElementAbsent: {
        auto it = screens_.find(c.screen);
        if (it == screens_.end()) return true;
        for (const auto& e : it->second.elements) {
          if (e.label == c.label) return false;
        }
        return true;
      }
      case SuccessCondition::Kind::FileExists:
        return files_.count(c.path) > 0;
      case SuccessCondition::Kind::FileContains: {
        auto it = files_.find(c.path);
        return it != files_.end() && it->second.find(c.value) != std::string::npos;
      }
      case SuccessCondition::Kind::FlagSet:
        return flags_.count(c.value) > 0;
    }
    return false;
  }

  // Visible state only: screen id, stability, element inventory, and the file
  // tree when the current screen is a file view. Session flags stay hidden.
  std::string visible_string() const {
    const WorldScreen& s = screens_.at(current_);
    std::string acc = s.id;
    acc += s.stable ? "|stable|" : "|pending|";
    for (const auto& e : s.elements) {
      acc += e.label + "|" + e.kind + "|" + e.state + "|" + std::to_string(e.x) + "," +
             std::to_string(e.y) + "," + std::to_string(e.w) + "," + std::to_string(e.h) + ";";
    }
    if (world_.files_visible_on.count(current_)) {
      for (const auto& [path, content] : files_) {
        acc += "file:" + path + "=" + hex64(fnv1a64(content)) + ";";
      }
    }
    return acc;
  }

  // Full session state, for change detection across any mutation.
  std::string state_string() const {
    std::string acc = current_ + "#";
    for (const auto& [id, s] : screens_) {
      acc += id;
      acc += s.stable ? "|1|" : "|0|";
      for (const auto& e : s.elements) acc += e.label + "=" + e.state + ";";
      acc += "#";
    }
    for (const auto& [path, content] : files_) acc += path + "=" + content + ";";
    for (const auto& f : flags_) acc += "!" + f;
    return acc;
  }

  std::string compute_digest() const { return digest_hex(visible_string()); }

  World world_;
  std::map<std::string, WorldScreen> screens_;  // mutable session copies
  std::string current_;
  std::map<std::string, std::string> files_;
  std::set<std::string> flags_;
};

// Ground-truth judge for the synthetic suite: accepts only when the world's
// success predicate holds, phrasing rejections from the unmet condition descs.
class OracleJudge : public CompletionJudge {
 public:
  explicit OracleJudge(SimDesktop& env) : env_(env) {}

  JudgeVerdict judge(const TaskSpec&, const Observation&, const BeliefState&) override {
    JudgeVerdict v;
    auto unmet = env_.unmet_conditions();
    if (unmet.empty()) {
      v.complete = true;
      v.reason = "all completion requirements are visibly satisfied";
    } else {
      v.complete = false;
      v.reason = "not complete: " + unmet.front();
      for (size_t i = 0; i < unmet.size(); ++i) {
        if (i) v.missing_steps += "; ";
        v.missing_steps += unmet[i];
      }
    }
    return v;
  }

 private:
  SimDesktop& env_;
};

}  // namespace guipilot
