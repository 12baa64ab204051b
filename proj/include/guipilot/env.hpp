#pragma once

#include <optional>
#include <string>
#include <utility>

#include "guipilot/core.hpp"

namespace guipilot {

inline constexpr int kFrameWidth = 1920;
inline constexpr int kFrameHeight = 1080;

// A grounded action ready for the environment: the original payload plus any
// resolved coordinates. grounded=false means resolution failed and the
// environment should treat the event as a no-op.
struct ResolvedEvent {
  Action action = WaitAction{};
  std::optional<std::pair<int, int>> point;   // click/type/scroll anchor
  std::optional<std::pair<int, int>> point2;  // drag destination
  bool grounded = true;
};

struct ExecResult {
  bool changed = false;
  std::string note;  // "ok", "missed-click", "trap-absorbed", "no-op", ...
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual Observation observe(int step_index) = 0;
  virtual ExecResult execute(const ResolvedEvent& ev) = 0;
  // Ground-truth evaluation; harness/metrics only, never shown to the Manager.
  virtual bool success() = 0;
};

// Placeholder for a real OS driver. Wiring to an actual desktop (VM screenshot
// capture + input injection) is deployment work outside this repo's test path.
class LiveEnvironmentStub : public Environment {
 public:
  Observation observe(int) override {
    throw std::runtime_error("live environment driver not wired in this build");
  }
  ExecResult execute(const ResolvedEvent&) override {
    throw std::runtime_error("live environment driver not wired in this build");
  }
  bool success() override { return false; }
};

}  // namespace guipilot
