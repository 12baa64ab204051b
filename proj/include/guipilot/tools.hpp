#pragma once

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <chrono>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "guipilot/backend.hpp"
#include "guipilot/env.hpp"
#include "guipilot/prompt.hpp"

namespace guipilot {

// --- grounding ---------------------------------------------------------------

class Grounder {
 public:
  virtual ~Grounder() = default;
  virtual std::optional<std::pair<int, int>> ground(const std::string& description,
                                                    const Observation& obs) = 0;
};

// Model-free resolution by element label: exact normalized match first, then
// substring containment either way; the earliest listed element wins ties.
class SimGrounder : public Grounder {
 public:
  std::optional<std::pair<int, int>> ground(const std::string& description,
                                            const Observation& obs) override {
    std::string want = normalize_target(description);
    if (want.empty()) return std::nullopt;  // "" would substring-match everything
    const ObsElement* best = nullptr;
    for (const auto& e : obs.elements) {
      if (normalize_target(e.label) == want) {
        best = &e;
        break;
      }
    }
    if (!best) {
      for (const auto& e : obs.elements) {
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
};

// Asks the grounder-role model for "x,y" given the description and the frame.
class BackendGrounder : public Grounder {
 public:
  explicit BackendGrounder(Backend& backend) : backend_(backend) {}

  std::optional<std::pair<int, int>> ground(const std::string& description,
                                            const Observation& obs) override {
    if (description.empty()) return std::nullopt;
    CompletionRequest req;
    req.role = Role::Grounder;
    req.system_text =
        "You locate UI elements. Given a screenshot and a target description, reply with "
        "the pixel coordinates of the element's center as two integers: x,y";
    req.user_parts.push_back({false, "Target: " + description});
    if (!obs.image_ref.empty()) req.user_parts.push_back({true, obs.image_ref});
    std::string reply = backend_.complete(req);
    int x = 0, y = 0;
    if (!parse_coordinates(reply, x, y)) return std::nullopt;
    if (x < 0 || y < 0 || x >= kFrameWidth || y >= kFrameHeight) return std::nullopt;
    return std::make_pair(x, y);
  }

 private:
  Backend& backend_;
};

// Rewrites a UI action into a coordinate-level event. Resolution failures mark
// the event ungrounded; the environment then records a no-op and the loop
// breaker sees an unchanged screen.
inline ResolvedEvent resolve_target(const Action& a, const Observation& obs, Grounder& grounder) {
  ResolvedEvent ev;
  ev.action = a;
  auto need = [&](const std::string& desc, std::optional<std::pair<int, int>>& slot) {
    slot = grounder.ground(desc, obs);
    if (!slot) ev.grounded = false;
  };
  if (const auto* c = std::get_if<ClickAction>(&a)) need(c->target, ev.point);
  else if (const auto* d = std::get_if<DoubleClickAction>(&a)) need(d->target, ev.point);
  else if (const auto* t = std::get_if<TypeAction>(&a)) need(t->target, ev.point);
  else if (const auto* g = std::get_if<DragAndDropAction>(&a)) {
    need(g->source, ev.point);
    need(g->dest, ev.point2);
  } else if (const auto* s = std::get_if<ScrollAction>(&a)) need(s->target, ev.point);
  return ev;  // open/switch/hotkey/highlight/cells/wait carry no coordinates
}

// --- search ------------------------------------------------------------------

// One query, one round-trip; the tutorial text lands in the belief state and
// every later prompt.
inline std::string run_search(const std::string& query, BeliefState& belief, Backend& backend) {
  std::string text = search_grounded_query(query, backend);
  inject_knowledge(belief, text);
  return text;
}

// --- sandboxed command execution ---------------------------------------------

struct SandboxPolicy {
  std::string working_dir;
  int command_timeout_s = 30;
  bool network_allowed = false;
};

// Textual jail check: no parent-directory escapes, no absolute paths outside
// the working dir, no network tools unless allowed. The command then runs with
// the working dir as cwd. This is a harness guard, not a security boundary.
inline std::optional<std::string> policy_violation(const std::string& command,
                                                   const SandboxPolicy& policy) {
  if (command.find("..") != std::string::npos) {
    return "path traversal ('..') is not allowed";
  }
  std::istringstream ss(command);
  std::string token;
  static const std::vector<std::string> net_tools = {"curl", "wget",   "nc",  "ncat",
                                                     "ssh",  "scp",    "ftp", "telnet",
                                                     "ping", "rsync"};
  while (ss >> token) {
    // strip common shell punctuation around the token
    while (!token.empty() && (token.front() == '(' || token.front() == '"' ||
                              token.front() == '\'' || token.front() == ';')) {
      token.erase(token.begin());
    }
    while (!token.empty() && (token.back() == ')' || token.back() == '"' ||
                              token.back() == '\'' || token.back() == ';')) {
      token.pop_back();
    }
    if (token.empty()) continue;
    if (token[0] == '~' || token.rfind("$HOME", 0) == 0) {
      return "home-directory access is not allowed";
    }
    if (token[0] == '/' && token != "/dev/null" &&
        token.rfind(policy.working_dir, 0) != 0) {
      return "absolute path outside the working directory: " + token;
    }
    if (!policy.network_allowed) {
      std::string bare = token;
      size_t slash = bare.rfind('/');
      if (slash != std::string::npos) bare = bare.substr(slash + 1);
      for (const auto& t : net_tools) {
        if (bare == t) return "network egress is disabled (" + t + ")";
      }
    }
  }
  return std::nullopt;
}

struct CommandResult {
  std::string output;  // stdout and stderr, merged
  int exit_code = -1;
  bool timed_out = false;
};

// Runs `sh -c command` in its own process group under the policy's working
// dir; on timeout the whole group is killed.
inline CommandResult run_sandboxed(const std::string& command, const SandboxPolicy& policy) {
  CommandResult result;
  int pipefd[2];
  if (pipe(pipefd) != 0) {
    result.output = "sandbox error: pipe failed";
    return result;
  }
  pid_t pid = fork();
  if (pid < 0) {
    close(pipefd[0]);
    close(pipefd[1]);
    result.output = "sandbox error: fork failed";
    return result;
  }
  if (pid == 0) {
    setpgid(0, 0);
    close(pipefd[0]);
    dup2(pipefd[1], STDOUT_FILENO);
    dup2(pipefd[1], STDERR_FILENO);
    close(pipefd[1]);
    if (!policy.working_dir.empty() && chdir(policy.working_dir.c_str()) != 0) _exit(127);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);
  close(pipefd[1]);
  fcntl(pipefd[0], F_SETFL, O_NONBLOCK);

  auto deadline =
      std::chrono::steady_clock::now() + std::chrono::seconds(policy.command_timeout_s);
  bool done = false;
  int status = 0;
  char buf[4096];
  while (!done) {
    ssize_t n;
    while ((n = read(pipefd[0], buf, sizeof(buf))) > 0) result.output.append(buf, n);
    pid_t r = waitpid(pid, &status, WNOHANG);
    if (r == pid) {
      done = true;
      break;
    }
    if (std::chrono::steady_clock::now() > deadline) {
      kill(-pid, SIGKILL);
      waitpid(pid, &status, 0);
      result.timed_out = true;
      done = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  ssize_t n;
  while ((n = read(pipefd[0], buf, sizeof(buf))) > 0) result.output.append(buf, n);
  close(pipefd[0]);

  if (result.timed_out) {
    result.exit_code = -1;
    result.output += "\n[killed: exceeded " + std::to_string(policy.command_timeout_s) +
                     "s timeout]";
  } else if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else {
    result.exit_code = -1;
  }
  return result;
}

// --- coding agent ------------------------------------------------------------

struct CodeSession {
  std::string goal;
  int budget = 20;
  struct Entry {
    std::string command;
    std::string output;
    int exit_code = -1;
  };
  std::vector<Entry> transcript;
  std::string summary;
  bool completed = false;  // model declared completion within budget
};

inline json to_json(const CodeSession& s) {
  json entries = json::array();
  for (const auto& e : s.transcript) {
    entries.push_back(json{{"command", e.command}, {"output", e.output}, {"exit_code", e.exit_code}});
  }
  return json{{"goal", s.goal},
              {"budget", s.budget},
              {"completed", s.completed},
              {"summary", s.summary},
              {"entries", std::move(entries)}};
}

namespace detail {

// The coder model either runs one fenced shell block per turn or finishes with
// a line starting "REPORT:".
inline bool extract_report(const std::string& reply, std::string& report) {
  size_t pos = 0;
  while (pos <= reply.size()) {
    size_t eol = reply.find('\n', pos);
    std::string line = trim(reply.substr(pos, eol == std::string::npos ? std::string::npos
                                                                        : eol - pos));
    if (line.rfind("REPORT:", 0) == 0) {
      report = trim(line.substr(7));
      if (eol != std::string::npos) {
        std::string rest = trim(reply.substr(eol + 1));
        if (!rest.empty()) report += report.empty() ? rest : "\n" + rest;
      }
      return true;
    }
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  return false;
}

}  // namespace detail

// Inner execution loop with its own budget: propose command, run under the
// sandbox, feed the output back, until the model reports or steps run out.
// The Manager sees only the returned summary.
inline CodeSession run_code_session(const std::string& goal, const SandboxPolicy& policy,
                                    Backend& backend, int budget = 20) {
  CodeSession session;
  session.goal = goal;
  session.budget = budget;

  std::string feedback;
  for (int step = 0; step < budget; ++step) {
    CompletionRequest req;
    req.role = Role::Coder;
    req.system_text =
        "You drive a shell inside a jailed working directory to accomplish a goal. "
        "Each turn, either reply with exactly one fenced code block containing one shell "
        "command, or finish with a line 'REPORT: <what you accomplished>'. Stay inside the "
        "working directory; network access is unavailable.";
    std::string user = "Goal: " + goal + "\n";
    user += "Steps used: " + std::to_string(step) + " of " + std::to_string(budget) + "\n";
    if (!feedback.empty()) user += "Last command output:\n" + feedback + "\n";
    req.user_parts.push_back({false, user});
    std::string reply = backend.complete(req);

    std::string report;
    if (detail::extract_report(reply, report)) {
      session.summary = report.empty() ? "coding agent reported completion" : report;
      session.completed = true;
      break;
    }

    std::string block;
    int fences = detail::extract_fenced(reply, block);
    if (fences < 1) {
      feedback = "no command found; reply with one fenced shell block or 'REPORT: <summary>'";
      session.transcript.push_back({"", feedback, -1});
      continue;
    }
    std::string command = detail::trim(block);
    if (auto why = policy_violation(command, policy)) {
      CodeSession::Entry e;
      e.command = command;
      e.output = "refused by sandbox policy: " + *why;
      e.exit_code = -1;
      feedback = e.output;
      session.transcript.push_back(std::move(e));
      continue;
    }
    CommandResult r = run_sandboxed(command, policy);
    CodeSession::Entry e;
    e.command = command;
    e.output = r.output;
    e.exit_code = r.exit_code;
    feedback = "exit " + std::to_string(r.exit_code) + "\n" + r.output;
    session.transcript.push_back(std::move(e));
  }

  if (session.summary.empty()) {
    std::string last;
    if (!session.transcript.empty()) {
      last = "; last exit code " + std::to_string(session.transcript.back().exit_code);
    }
    session.summary = "incomplete: code budget of " + std::to_string(budget) +
                      " steps exhausted before the goal was reported done" + last;
  }
  return session;
}

}  // namespace guipilot
