#pragma once

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "guipilot/core.hpp"
#include "guipilot/prompt.hpp"

namespace guipilot {

struct BackendError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BackendUnavailable : BackendError {
  using BackendError::BackendError;
};
struct EmptyOutput : BackendError {
  using BackendError::BackendError;
};

inline double default_temperature(Role r) { return r == Role::Verifier ? 0.2 : 1.0; }

struct RequestPart {
  bool is_image = false;
  std::string content;  // text, or an image ref for image parts
};

struct CompletionRequest {
  Role role = Role::Manager;
  std::string system_text;
  std::vector<RequestPart> user_parts;
  double temperature = 1.0;
  int max_output = 4096;

  std::string user_text() const {
    std::string out;
    for (const auto& p : user_parts) {
      if (p.is_image) continue;
      if (!out.empty()) out += "\n";
      out += p.content;
    }
    return out;
  }
  std::vector<std::string> image_refs() const {
    std::vector<std::string> out;
    for (const auto& p : user_parts) {
      if (p.is_image) out.push_back(p.content);
    }
    return out;
  }
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const CompletionRequest& req) = 0;
};

// --- transcript --------------------------------------------------------------

struct TranscriptEntry {
  std::string role;
  int role_index = 0;  // per-role call counter, 0-based
  int step = -1;       // manager step during which the call happened
  double temperature = 1.0;
  int max_output = 0;
  std::string system_text;
  std::string user_text;
  std::vector<std::string> images;
  std::string response;
};

inline json to_json(const TranscriptEntry& e) {
  return json{{"role", e.role},
              {"role_index", e.role_index},
              {"step", e.step},
              {"temperature", e.temperature},
              {"max_output", e.max_output},
              {"system", e.system_text},
              {"user", e.user_text},
              {"images", e.images},
              {"response", e.response}};
}

inline TranscriptEntry transcript_entry_from_json(const json& j) {
  TranscriptEntry e;
  e.role = j.at("role").get<std::string>();
  e.role_index = j.at("role_index").get<int>();
  e.step = j.at("step").get<int>();
  e.temperature = j.at("temperature").get<double>();
  e.max_output = j.at("max_output").get<int>();
  e.system_text = j.at("system").get<std::string>();
  e.user_text = j.at("user").get<std::string>();
  for (const auto& i : j.at("images")) e.images.push_back(i.get<std::string>());
  e.response = j.at("response").get<std::string>();
  return e;
}

inline void save_transcript(const std::string& path, const std::vector<TranscriptEntry>& entries) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw LoadError("cannot open for write: " + path);
  for (const auto& e : entries) f << to_json(e).dump() << "\n";
}

inline std::vector<TranscriptEntry> load_transcript(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw LoadError("cannot open: " + path);
  std::vector<TranscriptEntry> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(transcript_entry_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw LoadError(path + ": bad transcript line: " + e.what());
    }
  }
  return out;
}

// Wraps any backend and records every exchange. One recorder per task run;
// the orchestrator announces the current step via set_step.
class RecordingBackend : public Backend {
 public:
  explicit RecordingBackend(Backend& inner) : inner_(inner) {}

  void set_step(int step) { step_ = step; }
  const std::vector<TranscriptEntry>& entries() const { return entries_; }

  std::string complete(const CompletionRequest& req) override {
    TranscriptEntry e;
    e.role = to_string(req.role);
    e.role_index = counters_[e.role]++;
    e.step = step_;
    e.temperature = req.temperature;
    e.max_output = req.max_output;
    e.system_text = req.system_text;
    e.user_text = req.user_text();
    e.images = req.image_refs();
    std::string resp = inner_.complete(req);  // errors propagate, call not recorded
    e.response = resp;
    entries_.push_back(std::move(e));
    return resp;
  }

 private:
  Backend& inner_;
  int step_ = -1;
  std::map<std::string, int> counters_;
  std::vector<TranscriptEntry> entries_;
};

// --- scripted backend --------------------------------------------------------

inline constexpr const char* kUnavailableSentinel = "<<BACKEND_UNAVAILABLE>>";
inline constexpr const char* kEmptySentinel = "<<EMPTY>>";

// Fixture responses keyed by (role, per-role call index), with ordered override
// rules that fire when the rendered prompt contains a given substring. A rule
// holds its own response sequence and never advances the main track.
struct ScriptBook {
  std::map<std::string, std::vector<std::string>> main;
  struct Override {
    std::string role;
    std::string when;
    std::vector<std::string> responses;
  };
  std::vector<Override> overrides;
};

// Script files are a sequence of sections:
//   === role:manager ===
//   <response body>
//   === role:verifier when:some substring ===
//   <override body>
// Bodies run to the next separator; one trailing newline is stripped.
inline ScriptBook load_script(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw LoadError("cannot open script: " + path);
  ScriptBook book;
  std::string line;
  std::string cur_role, cur_when;
  bool in_section = false;
  std::string body;

  auto flush = [&]() {
    if (!in_section) return;
    if (!body.empty() && body.back() == '\n') body.pop_back();
    if (cur_when.empty()) {
      book.main[cur_role].push_back(body);
    } else {
      // append to an existing rule with the same (role, when), else new rule
      bool appended = false;
      for (auto& o : book.overrides) {
        if (o.role == cur_role && o.when == cur_when) {
          o.responses.push_back(body);
          appended = true;
          break;
        }
      }
      if (!appended) book.overrides.push_back({cur_role, cur_when, {body}});
    }
    body.clear();
  };

  while (std::getline(f, line)) {
    if (line.rfind("=== role:", 0) == 0) {
      flush();
      std::string rest = line.substr(9);
      size_t end = rest.rfind("===");
      if (end == std::string::npos) throw LoadError(path + ": bad section header: " + line);
      rest = detail::trim(rest.substr(0, end));
      size_t when_at = rest.find(" when:");
      if (when_at == std::string::npos) {
        cur_role = detail::trim(rest);
        cur_when.clear();
      } else {
        cur_role = detail::trim(rest.substr(0, when_at));
        cur_when = detail::trim(rest.substr(when_at + 6));
        if (cur_when.empty()) throw LoadError(path + ": empty when: clause");
      }
      role_from(cur_role);  // validates the name
      in_section = true;
      continue;
    }
    if (in_section) body += line + "\n";
  }
  flush();
  return book;
}

class ScriptedBackend : public Backend {
 public:
  ScriptedBackend() = default;
  explicit ScriptedBackend(ScriptBook book) : book_(std::move(book)) {}

  // convenience for tests building scripts in code
  void push(Role role, std::string response) {
    book_.main[to_string(role)].push_back(std::move(response));
  }
  void push_override(Role role, std::string when, std::vector<std::string> responses) {
    book_.overrides.push_back({to_string(role), std::move(when), std::move(responses)});
  }

  std::string complete(const CompletionRequest& req) override {
    std::string role = to_string(req.role);
    std::string prompt = req.system_text + "\n" + req.user_text();

    for (size_t i = 0; i < book_.overrides.size(); ++i) {
      auto& o = book_.overrides[i];
      if (o.role != role) continue;
      if (prompt.find(o.when) == std::string::npos) continue;
      size_t idx = std::min(override_used_[i], o.responses.size() - 1);
      ++override_used_[i];
      return deliver(o.responses[idx], role);
    }

    auto it = book_.main.find(role);
    if (it == book_.main.end() || it->second.empty()) {
      throw BackendUnavailable("no scripted responses for role " + role);
    }
    size_t idx = std::min(main_used_[role], it->second.size() - 1);
    ++main_used_[role];
    return deliver(it->second[idx], role);
  }

 private:
  std::string deliver(const std::string& text, const std::string& role) {
    if (text == kUnavailableSentinel) throw BackendUnavailable("scripted outage for " + role);
    if (text == kEmptySentinel || text.empty()) throw EmptyOutput("scripted empty for " + role);
    return text;
  }

  ScriptBook book_;
  std::map<std::string, size_t> main_used_;
  std::map<size_t, size_t> override_used_;
};

// --- replay backend ----------------------------------------------------------

// Replays a recorded transcript by (role, call order). Divergence shows up as
// either an exhausted role (abort) or a byte-different trajectory downstream.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(std::vector<TranscriptEntry> entries) {
    for (auto& e : entries) by_role_[e.role].push_back(std::move(e.response));
  }

  std::string complete(const CompletionRequest& req) override {
    std::string role = to_string(req.role);
    auto it = by_role_.find(role);
    if (it == by_role_.end() || used_[role] >= it->second.size()) {
      throw BackendUnavailable("transcript exhausted for role " + role);
    }
    return it->second[used_[role]++];
  }

 private:
  std::map<std::string, std::vector<std::string>> by_role_;
  std::map<std::string, size_t> used_;
};

// --- retry wrapper -----------------------------------------------------------

struct RetryPolicy {
  int attempts = 3;
  int backoff_ms = 250;  // doubled per retry
};

// Retries transient transport failures with exponential backoff. Requests are
// idempotent completions, so re-sending is safe.
class RetryingBackend : public Backend {
 public:
  RetryingBackend(Backend& inner, RetryPolicy policy) : inner_(inner), policy_(policy) {}

  std::string complete(const CompletionRequest& req) override {
    int delay = policy_.backoff_ms;
    for (int attempt = 1;; ++attempt) {
      try {
        return inner_.complete(req);
      } catch (const BackendUnavailable& e) {
        if (attempt >= policy_.attempts) {
          throw BackendUnavailable(std::string(e.what()) + " (after " +
                                   std::to_string(attempt) + " attempts)");
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        delay *= 2;
      }
    }
  }

 private:
  Backend& inner_;
  RetryPolicy policy_;
};

// --- search helper -----------------------------------------------------------

// Single-query search: one backend round-trip, plain text back.
inline std::string search_grounded_query(const std::string& query, Backend& backend,
                                         double temperature = 1.0) {
  if (query.empty()) throw std::invalid_argument("search query must be nonempty");
  CompletionRequest req;
  req.role = Role::Search;
  req.system_text =
      "You retrieve concise step-by-step GUI tutorials. Answer the question directly "
      "with numbered steps and any caveats that affect whether the procedure applies.";
  req.user_parts.push_back({false, query});
  req.temperature = temperature;
  return backend.complete(req);
}

// Parses "x,y" or "(x, y)" style coordinates from a grounder-model reply.
inline bool parse_coordinates(const std::string& text, int& x, int& y) {
  size_t i = 0;
  auto read_int = [&](int& out) {
    while (i < text.size() && !(std::isdigit(static_cast<unsigned char>(text[i])) ||
                                (text[i] == '-' && i + 1 < text.size() &&
                                 std::isdigit(static_cast<unsigned char>(text[i + 1]))))) {
      ++i;
    }
    if (i >= text.size()) return false;
    size_t start = i;
    if (text[i] == '-') ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    out = std::stoi(text.substr(start, i - start));
    return true;
  };
  return read_int(x) && read_int(y);
}

}  // namespace guipilot
