#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "guipilot/backend.hpp"
#include "guipilot/config.hpp"
#include "guipilot/core.hpp"
#include "guipilot/loop_breaker.hpp"
#include "guipilot/metrics.hpp"
#include "guipilot/outputs.hpp"
#include "guipilot/prompt.hpp"
#include "guipilot/sim.hpp"
#include "guipilot/tools.hpp"
#include "guipilot/verifier.hpp"

namespace guipilot {

struct RunResult {
  std::string trajectory_path;
  std::string transcript_path;
  std::optional<TerminationRecord> termination;
  bool aborted = false;
  std::string abort_reason;
  bool env_success = false;
  int step_count = 0;
};

struct PromptSet {
  PromptTemplate manager;
  PromptTemplate reflection;
  PromptTemplate verifier;
};

inline PromptSet load_prompts(const std::string& dir) {
  PromptSet p;
  p.manager = load_template(dir + "/manager.txt", Role::Manager);
  p.reflection = load_template(dir + "/reflection.txt", Role::Reflection);
  p.verifier = load_template(dir + "/verifier.txt", Role::Verifier);
  return p;
}

// One task, one environment, one sequential perceive-reason-act loop.
class TaskRunner {
 public:
  TaskRunner(TaskSpec task, Environment& env, Backend& backend, Grounder& grounder,
             const RunConfig& cfg, PromptSet prompts, CompletionJudge* oracle_judge)
      : env_(env),
        recorder_(backend),
        grounder_(grounder),
        cfg_(cfg),
        prompts_(std::move(prompts)),
        oracle_judge_(oracle_judge) {
    task.flags = cfg.flags;
    task.step_budget = cfg.budget;
    belief_.task = std::move(task);
  }

  RunResult run() {
    std::filesystem::path dir = std::filesystem::path(cfg_.out_dir) / belief_.task.id;
    std::filesystem::create_directories(dir);
    trajectory_.header = json{{"type", "header"},
                              {"task", to_json(belief_.task)},
                              {"config", config_snapshot(cfg_)}};

    RunResult result;
    result.trajectory_path = (dir / "trajectory.jsonl").string();
    result.transcript_path = (dir / "transcript.jsonl").string();

    std::optional<TerminationRecord> termination;
    for (int t = 0; t < cfg_.budget && !termination; ++t) {
      try {
        termination = step(t, dir);
      } catch (const BackendUnavailable& e) {
        result.aborted = true;
        result.abort_reason = e.what();
        trajectory_.trailer = json{{"type", "aborted"},
                                   {"reason", result.abort_reason},
                                   {"at_step", t},
                                   {"env_success", env_.success()}};
        break;
      }
    }
    if (!result.aborted) {
      if (!termination) {
        termination = TerminationRecord{
            TerminationKind::BudgetExhausted, cfg_.budget - 1,
            "step budget of " + std::to_string(cfg_.budget) + " exhausted without a terminal"};
      }
      result.termination = termination;
      trajectory_.trailer = json{{"type", "trailer"},
                                 {"termination", to_json(*termination)},
                                 {"env_success", env_.success()}};
    }
    result.env_success = env_.success();
    result.step_count = static_cast<int>(belief_.history.size());

    trajectory_.steps = belief_.history;
    save_trajectory(result.trajectory_path, trajectory_);
    save_transcript(result.transcript_path, recorder_.entries());
    return result;
  }

  const BeliefState& belief() const { return belief_; }

 private:
  // ---- prompt composition ----

  static std::string render_observation(const Observation& o) {
    std::string s = "frame: " + o.image_ref + "\n";
    s += std::string("stable: ") + (o.stable ? "yes" : "no") + "\n";
    s += "elements:\n";
    if (o.elements.empty()) s += "  (none)\n";
    for (const auto& e : o.elements) {
      s += "  - " + e.label + " [" + e.kind;
      if (!e.state.empty()) s += ", state: " + e.state;
      s += "] @ (" + std::to_string(e.x) + "," + std::to_string(e.y) + "," +
           std::to_string(e.w) + "x" + std::to_string(e.h) + ")\n";
    }
    return s;
  }

  std::string render_criteria() const {
    if (belief_.criteria.empty()) return "(none yet — derive 1-3 success criteria now)";
    std::string s;
    for (const auto& c : belief_.criteria) {
      s += std::to_string(c.index) + ". " + c.statement;
      if (c.exact_check) s += " [EXACT CHECK]";
      s += " — status: ";
      if (c.status == CriterionStatus::MetWithEvidence) s += "met (" + c.evidence + ")";
      else s += "unmet";
      s += "\n";
    }
    return s;
  }

  std::string render_history() const {
    if (belief_.history.empty()) return "(no steps yet)";
    size_t from = belief_.history.size() > static_cast<size_t>(cfg_.history_window)
                      ? belief_.history.size() - cfg_.history_window
                      : 0;
    std::string s;
    for (size_t i = from; i < belief_.history.size(); ++i) {
      const auto& r = belief_.history[i];
      s += "step " + std::to_string(r.step_index) + ": ";
      s += r.parsed_action ? serialize_action(*r.parsed_action) : "(no action)";
      if (r.micro_verify) {
        s += " | check: " + std::string(to_string(r.micro_verify->rule)) + "=" +
             to_string(r.micro_verify->satisfied);
        if (!r.micro_verify->evidence.empty()) s += " (" + r.micro_verify->evidence + ")";
      }
      for (const auto& a : r.annotations) {
        if (a.rfind("tool-result: ", 0) == 0 || a.rfind("env: ", 0) == 0 ||
            a.rfind("blocked-by-blacklist", 0) == 0 || a.rfind("search-disabled", 0) == 0 ||
            a.rfind("coder-disabled", 0) == 0) {
          s += " | " + a;
        }
      }
      for (const auto& inj : r.injected) {
        if (inj.kind == "rejection-reason") s += " | rejected: " + inj.text;
      }
      s += "\n";
    }
    return s;
  }

  std::string render_knowledge() const {
    if (belief_.knowledge.empty()) return "(none)";
    std::string s;
    for (size_t i = 0; i < belief_.knowledge.size(); ++i) {
      s += "[" + std::to_string(i + 1) + "] " + belief_.knowledge[i] + "\n";
    }
    return s;
  }

  std::string render_rejections() const {
    if (belief_.rejection_reasons.empty()) return "(none)";
    std::string s;
    for (size_t i = 0; i < belief_.rejection_reasons.size(); ++i) {
      s += "[" + std::to_string(i + 1) + "] " + belief_.rejection_reasons[i] + "\n";
    }
    return s;
  }

  std::string render_directives() const {
    if (belief_.active_directives.empty()) return "(none)";
    std::string s;
    for (const auto& d : belief_.active_directives) s += d + "\n";
    return s;
  }

  std::map<std::string, std::string> common_bindings(int t, const Observation& obs) const {
    return {{"TASK_DESCRIPTION", belief_.task.instruction},
            {"STEP_INDEX", std::to_string(t)},
            {"STEP_BUDGET", std::to_string(cfg_.budget)},
            {"CRITERIA", render_criteria()},
            {"HISTORY", render_history()},
            {"OBSERVATION", render_observation(obs)},
            {"KNOWLEDGE", render_knowledge()},
            {"DIRECTIVES", render_directives()},
            {"REJECTIONS", render_rejections()}};
  }

  CompletionRequest make_request(Role role, const RenderedPrompt& rp,
                                 const std::string& image_ref) {
    CompletionRequest req;
    req.role = role;
    req.system_text = rp.system_text;
    req.user_parts.push_back({false, rp.user_text});
    if (!image_ref.empty()) req.user_parts.push_back({true, image_ref});
    req.temperature = role == Role::Verifier ? cfg_.verifier.verifier_temperature
                                             : default_temperature(role);
    req.max_output = cfg_.max_output_tokens;
    return req;
  }

  // ---- judge ----

  JudgeVerdict run_judge(const Observation& obs, const std::string& claim_text,
                         StepRecord& rec) {
    if (cfg_.judge_mode == "oracle") {
      if (!oracle_judge_) throw LoadError("judge_mode=oracle but no oracle judge wired");
      return oracle_judge_->judge(belief_.task, obs, belief_);
    }
    auto bindings = common_bindings(obs.step_index, obs);
    bindings["CLAIM"] = claim_text;
    RenderedPrompt rp = render_prompt(prompts_.verifier, bindings);
    std::string resp;
    try {
      resp = recorder_.complete(make_request(Role::Verifier, rp, obs.image_ref));
    } catch (const EmptyOutput&) {
      resp.clear();
    }
    auto parsed = parse_judge(resp, cfg_.verifier.uncertainty_phrases);
    if (!parsed.ok()) {
      rec.annotations.push_back("judge-malformed: " + parsed.error().message +
                                " (rejected conservatively)");
      JudgeVerdict v;
      v.complete = false;
      v.reason = "verifier output was unreadable; rejecting rather than accepting";
      return v;
    }
    return parsed.value();
  }

  // ---- one step ----

  std::optional<TerminationRecord> step(int t, const std::filesystem::path& dir) {
    StepRecord rec;
    rec.step_index = t;

    if (pending_wait_) {
      ResolvedEvent ev;
      ev.action = WaitAction{1};
      env_.execute(ev);
      pending_wait_ = false;
      rec.annotations.push_back("implicit-wait: re-checked the screen after 1s");
    }
    Observation pre = env_.observe(t);
    rec.pre_obs = pre;

    for (const auto& d : belief_.active_directives) rec.injected.push_back({"directive", d});

    // -- query the Manager, with bounded malformed and blacklist retries --
    std::vector<std::string> corrections;
    int malformed_left = cfg_.malformed_retry_cap;
    int blacklist_left = cfg_.loop.blacklist_retry_budget;
    bool criteria_retry_done = false;
    ManagerOutput mo;
    bool have_mo = false;
    bool blocked = false;
    std::string blocked_action;
    std::string raw;

    while (true) {
      auto bindings = common_bindings(t, pre);
      std::string extra;
      for (const auto& c : corrections) extra += "\n\n" + c;
      RenderedPrompt rp = render_prompt(prompts_.manager, bindings);
      rp.user_text += extra;
      rec.prompt_digest = digest_hex(rp.system_text + "\n" + rp.user_text);
      recorder_.set_step(t);
      try {
        raw = recorder_.complete(make_request(Role::Manager, rp, pre.image_ref));
      } catch (const EmptyOutput& e) {
        raw.clear();
        rec.annotations.push_back(std::string("empty-output: ") + e.what());
      }
      Result<ManagerOutput> parsed =
          raw.empty() ? Result<ManagerOutput>(ParseError{ParseErrorKind::Malformed, "empty"})
                      : parse_manager_output(raw);
      if (!parsed.ok()) {
        --malformed_left;
        rec.annotations.push_back("malformed-output: " + parsed.error().message);
        if (malformed_left <= 0) break;
        corrections.push_back(
            "[format reminder] Your previous reply could not be used (" +
            parsed.error().message +
            "). Reply with all five sections and exactly one grounded agent call.");
        continue;
      }
      mo = parsed.value();
      have_mo = true;

      // first-step criteria derivation happens inside the retry loop so a
      // criteria-free reply can be re-queried once
      if (t == 0 && cfg_.flags.verifier && belief_.criteria.empty()) {
        auto derived = parse_criteria(mo.completion_gate);
        if (derived.empty() && !criteria_retry_done) {
          criteria_retry_done = true;
          corrections.push_back(
              "[reminder] Your Completion Gate section must list 1-3 numbered, "
              "UI-observable success criteria before anything else.");
          have_mo = false;
          continue;
        }
        if (derived.empty()) {
          SuccessCriterion c;
          c.index = 1;
          c.statement = "The task is visibly complete on screen: " + belief_.task.instruction;
          belief_.criteria = {c};
          rec.annotations.push_back("criteria-fallback: synthesized from the instruction");
        } else {
          if (derived.size() > 3) {
            derived.resize(3);
            rec.annotations.push_back("criteria-truncated: kept the first 3");
          }
          belief_.criteria = derived;
        }
      }

      if (enforce_blacklist(belief_, mo.grounded_action) == BlacklistRuling::Reject) {
        std::string shown = serialize_action(mo.grounded_action);
        if (blacklist_left > 0) {
          --blacklist_left;
          rec.annotations.push_back("blacklist-reject: " + shown);
          corrections.push_back("[refusal] The action " + shown +
                                " is blacklisted for this step by a hard directive. You must "
                                "choose a different action.");
          have_mo = false;
          continue;
        }
        blocked = true;
        blocked_action = shown;
        break;
      }
      break;
    }
    rec.model_output = raw;

    if (!have_mo && !blocked) {
      // malformed step: budget consumed, nothing executed
      rec.post_obs = env_.observe(t + 1);
      rec.annotations.push_back("step-malformed: no usable Manager output after " +
                                std::to_string(cfg_.malformed_retry_cap) + " attempts");
      finish_step(std::move(rec), std::nullopt, std::nullopt);
      return std::nullopt;
    }

    if (have_mo && mo.gate_ambiguous) {
      rec.annotations.push_back("gate-ambiguous: conflicting decision tokens, treated as CONTINUE");
    }

    if (blocked) {
      rec.annotations.push_back("blocked-by-blacklist: " + blocked_action + " (retry budget " +
                                std::to_string(cfg_.loop.blacklist_retry_budget) + " exhausted)");
      rec.post_obs = env_.observe(t + 1);
      std::optional<LoopDecision> decision;
      if (cfg_.flags.loop_breaker) {
        auto views = loop_views(belief_.history);
        views.push_back({"<blocked:" + std::to_string(t) + ">", "(blocked)",
                         rec.pre_obs.screen_digest, rec.post_obs.screen_digest});
        decision = evaluate_loop(views, t, std::nullopt, cfg_.loop);
        rec.loop_note = decision;
      }
      finish_step(std::move(rec), decision, std::nullopt);
      return std::nullopt;
    }

    // apply later-step criteria claims before the gate looks at them
    if (cfg_.flags.verifier && t > 0) {
      auto redefined = parse_criteria(mo.completion_gate);
      if (!redefined.empty()) {
        bool differs = redefined.size() != belief_.criteria.size();
        for (size_t i = 0; !differs && i < redefined.size(); ++i) {
          differs = redefined[i].statement != belief_.criteria[i].statement;
        }
        if (differs) {
          if (redefined.size() > 3) redefined.resize(3);
          belief_.criteria = redefined;
          rec.annotations.push_back("criteria-rewritten by the Manager");
        }
      }
      apply_criteria_claims(mo.completion_gate, belief_.criteria);
    }

    const Action& action = mo.grounded_action;
    rec.parsed_action = action;

    // -- execute --
    if (is_ui_action(action)) {
      ResolvedEvent ev = resolve_target(action, pre, grounder_);
      ExecResult er = env_.execute(ev);
      if (er.note != "ok") rec.annotations.push_back("env: " + er.note);
    } else if (std::holds_alternative<CallSearchAgentAction>(action)) {
      if (!cfg_.flags.search) {
        rec.annotations.push_back("search-disabled: tool call consumed the step with no effect");
      } else {
        try {
          std::string text =
              run_search(std::get<CallSearchAgentAction>(action).query, belief_, recorder_);
          rec.injected.push_back({"knowledge", text});
        } catch (const BackendError& e) {
          rec.annotations.push_back(std::string("search-failed: ") + e.what() +
                                    " (continuing without knowledge)");
        }
      }
    } else if (std::holds_alternative<CallCodeAgentAction>(action)) {
      if (!cfg_.flags.coder) {
        rec.annotations.push_back("coder-disabled: tool call consumed the step with no effect");
      } else {
        SandboxPolicy policy;
        policy.working_dir = (dir / "sandbox").string();
        policy.command_timeout_s = cfg_.command_timeout_s;
        policy.network_allowed = cfg_.network_allowed;
        std::filesystem::create_directories(policy.working_dir);
        try {
          CodeSession session = run_code_session(std::get<CallCodeAgentAction>(action).task,
                                                 policy, recorder_, cfg_.coder_budget);
          std::filesystem::path sess_dir = dir / "code_sessions";
          std::filesystem::create_directories(sess_dir);
          std::ofstream f(sess_dir / (std::to_string(code_sessions_++) + ".json"),
                          std::ios::binary);
          f << to_json(session).dump(2) << "\n";
          rec.annotations.push_back("tool-result: " + session.summary);
        } catch (const BackendError& e) {
          rec.annotations.push_back(std::string("coder-failed: ") + e.what());
        }
      }
    }
    rec.post_obs = env_.observe(t + 1);

    // -- micro-verification (mandatory with the verifier on) --
    if (cfg_.flags.verifier && is_ui_action(action)) {
      rec.micro_verify =
          micro_verify(action, pre, rec.post_obs, true, cfg_.loop.similarity_epsilon);
      if (rec.micro_verify->rule == MicroRule::NoChangeWait) pending_wait_ = true;
    }

    // -- reflection + loop evaluation (mandatory with the loop breaker on) --
    std::optional<LoopDecision> decision;
    if (cfg_.flags.loop_breaker && is_ui_action(action)) {
      std::optional<ReflectionSignals> signals;
      if (cfg_.loop.reflection_every_step) {
        auto bindings = common_bindings(t, rec.post_obs);
        bindings["LAST_ACTION"] = serialize_action(action);
        bindings["CHECK_RESULT"] =
            rec.micro_verify ? std::string(to_string(rec.micro_verify->rule)) + "=" +
                                   to_string(rec.micro_verify->satisfied)
                             : "(none)";
        RenderedPrompt rp = render_prompt(prompts_.reflection, bindings);
        std::string resp;
        try {
          resp = recorder_.complete(make_request(Role::Reflection, rp, rec.post_obs.image_ref));
        } catch (const EmptyOutput&) {
          resp.clear();
        }
        auto parsed = parse_reflection(resp);
        if (parsed.ok()) {
          signals = parsed.value();
          if (signals->termination == GateValue::Done) {
            rec.annotations.push_back("reflection-advisory: termination signal DONE (no claim)");
          }
        } else {
          rec.annotations.push_back("reflection-malformed: " + parsed.error().message +
                                    " (strategy treated as KEEP)");
        }
      }
      auto views = loop_views(belief_.history);
      views.push_back({action_fingerprint(action), serialize_action(action),
                       rec.pre_obs.screen_digest, rec.post_obs.screen_digest});
      decision = evaluate_loop(views, t, signals, cfg_.loop);
      rec.loop_note = decision;
      if (decision->tier != LoopTier::None) {
        loop_state_.last_trigger = {decision->tier, t};
      }
      loop_state_.n_a = decision->n_a;
      loop_state_.n_o = decision->n_o;
    }

    // -- completion gate --
    std::optional<GateDecision> gate;
    if (cfg_.flags.verifier) {
      gate = compute_gate(belief_.criteria, rec.post_obs.stable, pending_wait_,
                          mo.gate_decision);
      rec.gate_note = gate;
      if (gate->value == GateValue::Done && !std::holds_alternative<DoneAction>(action)) {
        rec.annotations.push_back(
            "contract-violation: gate DONE but the grounded action is not agent.done()");
      }
    }

    // -- terminals --
    std::optional<TerminationRecord> termination;
    if (std::holds_alternative<DoneAction>(action)) {
      if (!cfg_.flags.verifier) {
        termination = TerminationRecord{TerminationKind::DoneAccepted, t,
                                        "verifier disabled: completion claim accepted unexamined"};
        rec.annotations.push_back("ablation: done() accepted without verification");
      } else {
        JudgeVerdict jv = run_judge(rec.post_obs, mo.completion_gate, rec);
        rec.verifier_note = jv;
        termination = final_termination(*gate, jv, t);
        if (!termination) {
          ++rejected_claims_;
          std::string reason = "Completion claim rejected";
          if (gate->value != GateValue::Done) {
            reason += "; completion gate: not every success criterion is met with a stable UI";
          }
          if (!jv.complete) {
            if (!jv.reason.empty()) reason += "; judge: " + jv.reason;
            if (!jv.missing_steps.empty()) reason += "; missing steps: " + jv.missing_steps;
            if (jv.overridden) reason += " (claim overridden for uncertainty)";
          }
          belief_.rejection_reasons.push_back(reason);
          rec.injected.push_back({"rejection-reason", reason});
          if (rejected_claims_ > cfg_.verifier.rejection_warning_cap) {
            rec.annotations.push_back(
                "rejection-warning: " + std::to_string(rejected_claims_) +
                " completion claims rejected in this run");
          }
        }
      }
    } else if (std::holds_alternative<FailAction>(action)) {
      termination = TerminationRecord{TerminationKind::FailDeclared, t,
                                      "Manager declared the task infeasible or blocked"};
    }

    finish_step(std::move(rec), decision, termination);
    return termination;
  }

  // Appends the record and rotates directive/blacklist scope: what was shown
  // this step expires; a fresh trigger arms the next step.
  void finish_step(StepRecord rec, const std::optional<LoopDecision>& decision,
                   const std::optional<TerminationRecord>&) {
    bool executed = rec.parsed_action.has_value();
    append_step(belief_, std::move(rec));
    if (executed && !belief_.blacklist.empty()) belief_.blacklist.clear();
    belief_.active_directives.clear();
    if (decision && decision->tier != LoopTier::None) {
      belief_.active_directives.push_back(decision->directive);
      if (decision->blacklisted) belief_.blacklist.insert(*decision->blacklisted);
    }
  }

  Environment& env_;
  RecordingBackend recorder_;
  Grounder& grounder_;
  RunConfig cfg_;
  PromptSet prompts_;
  CompletionJudge* oracle_judge_;

  BeliefState belief_;
  Trajectory trajectory_;
  LoopState loop_state_;
  bool pending_wait_ = false;
  int rejected_claims_ = 0;
  int code_sessions_ = 0;
};

// --- single-task convenience -------------------------------------------------

// Builds the standard sim wiring (scripted or replay backend, label grounder,
// oracle or model judge) and runs one task.
inline RunResult run_task(const TaskSpec& task, const std::string& world_path,
                          const RunConfig& cfg) {
  World world = load_world(world_path);
  SimDesktop env(world);

  std::unique_ptr<Backend> backend;
  if (cfg.backend_mode == "scripted") {
    if (cfg.script_path.empty()) throw LoadError("scripted backend needs backend.script");
    backend = std::make_unique<ScriptedBackend>(load_script(cfg.script_path));
  } else if (cfg.backend_mode == "replay") {
    if (cfg.transcript_path.empty()) throw LoadError("replay backend needs backend.transcript");
    backend = std::make_unique<ReplayBackend>(load_transcript(cfg.transcript_path));
  } else {
    throw LoadError("run_task: unsupported backend mode '" + cfg.backend_mode +
                    "' (live runs need explicit wiring)");
  }

  SimGrounder grounder;
  OracleJudge judge(env);
  PromptSet prompts = load_prompts(cfg.prompts_dir);
  TaskRunner runner(task, env, *backend, grounder, cfg, std::move(prompts),
                    cfg.judge_mode == "oracle" ? &judge : nullptr);
  return runner.run();
}

// --- suite -------------------------------------------------------------------

struct SuiteTask {
  TaskSpec task;
  std::string world_path;
  std::string script_path;
  bool expected_solvable = true;
};

inline std::vector<SuiteTask> load_manifest(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw LoadError("cannot open manifest: " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const std::exception& e) {
    throw LoadError(path + ": " + e.what());
  }
  std::filesystem::path base = std::filesystem::path(path).parent_path();
  std::vector<SuiteTask> out;
  for (const auto& tj : j.value("tasks", json::array())) {
    SuiteTask st;
    st.task.id = tj.at("id").get<std::string>();
    st.task.instruction = tj.at("instruction").get<std::string>();
    st.task.step_budget = tj.value("budget", 50);
    st.task.tag = tj.value("tag", std::string{});
    st.world_path = (base / tj.at("world").get<std::string>()).string();
    st.script_path = (base / tj.at("script").get<std::string>()).string();
    st.expected_solvable = tj.value("expected_solvable", true);
    out.push_back(std::move(st));
  }
  return out;
}

struct SuiteOutcome {
  SuiteTask task;
  RunResult result;
  RunOutcomeRow row;
};

struct SuiteReport {
  std::vector<SuiteOutcome> outcomes;
  std::optional<MetricsReport> metrics;
  int aborts = 0;
  int expected_total = 0;
  int expected_solved = 0;
};

inline SuiteReport run_suite(const std::string& manifest_path, const RunConfig& base_cfg,
                             std::optional<int> budget_override = std::nullopt,
                             int parallel = 1) {
  auto tasks = load_manifest(manifest_path);
  SuiteReport report;
  report.outcomes.resize(tasks.size());

  auto run_one = [&](size_t i) {
    const SuiteTask& st = tasks[i];
    RunConfig cfg = base_cfg;
    cfg.backend_mode = "scripted";
    cfg.script_path = st.script_path;
    cfg.budget = budget_override.value_or(st.task.step_budget);
    RunResult result;
    try {
      result = run_task(st.task, st.world_path, cfg);
    } catch (const std::exception& e) {
      result.aborted = true;
      result.abort_reason = e.what();
    }
    SuiteOutcome outcome;
    outcome.task = st;
    outcome.result = result;
    if (!result.trajectory_path.empty() && std::filesystem::exists(result.trajectory_path)) {
      outcome.row = row_from_trajectory(load_trajectory(result.trajectory_path));
    } else {
      outcome.row.task_id = st.task.id;
      outcome.row.terminal_kind = "aborted";
    }
    report.outcomes[i] = std::move(outcome);
  };

  if (parallel <= 1) {
    for (size_t i = 0; i < tasks.size(); ++i) run_one(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int w = 0; w < parallel; ++w) {
      pool.emplace_back([&]() {
        for (size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) run_one(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<RunOutcomeRow> rows;
  for (const auto& o : report.outcomes) {
    rows.push_back(o.row);
    if (o.result.aborted) ++report.aborts;
    if (o.task.expected_solvable) {
      ++report.expected_total;
      if (o.row.claimed_done && o.row.ground_success) ++report.expected_solved;
    }
  }
  if (!rows.empty()) report.metrics = compute_metrics(rows);
  return report;
}

inline json suite_report_to_json(const SuiteReport& report) {
  json tasks = json::array();
  for (const auto& o : report.outcomes) {
    tasks.push_back(json{{"id", o.task.task.id},
                         {"terminal", o.row.terminal_kind},
                         {"claimed_done", o.row.claimed_done},
                         {"env_success", o.row.ground_success},
                         {"steps", o.row.total_steps},
                         {"expected_solvable", o.task.expected_solvable},
                         {"aborted", o.result.aborted}});
  }
  json j{{"tasks", std::move(tasks)},
         {"aborts", report.aborts},
         {"expected_solvable", report.expected_total},
         {"expected_solved", report.expected_solved}};
  j["metrics"] = report.metrics ? report_to_json(*report.metrics) : json(nullptr);
  return j;
}

}  // namespace guipilot
