// End-to-end control loop: run_task over small in-code worlds and scripts,
// plus the shipped fixtures, checking retries, blacklists, injections, and the
// written trajectory/transcript artifacts.
#include <filesystem>
#include <string>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "guipilot/orchestrator.hpp"
#include "support.hpp"

using namespace guipilot;
using namespace testing;
namespace fs = std::filesystem;

namespace {

std::string mgr(const std::string& gate, const std::string& call,
                const std::string& analysis = "surveying the screen") {
  return "(Completion Gate)\n" + gate +
         "\n\n(Previous Action Verification)\nchecked the previous step\n\n"
         "(Screenshot Analysis)\n" +
         analysis + "\n\n(Next Action)\nproceed as planned\n\n(Grounded Action)\n```\n" + call +
         "\n```";
}

const char* kReflectKeep =
    "Progress signal: steady progress toward the goal\n"
    "Outcome signal: the last action had a visible effect\n"
    "Loop signal: no\n"
    "Feasibility signal: feasible\n"
    "Termination signal: CONTINUE\n"
    "Strategy signal: KEEP\n"
    "Verdict: case 2 — on track";

// a script file from section bodies; empty `when` means a main-track section
struct Section {
  std::string role;
  std::string when;
  std::string body;
};

std::string script_text(const std::vector<Section>& sections) {
  std::string s;
  for (const auto& sec : sections) {
    s += "=== role:" + sec.role;
    if (!sec.when.empty()) s += " when:" + sec.when;
    s += " ===\n" + sec.body + "\n";
  }
  return s;
}

// toggle world: click "dark mode" to win
const char* kToggleWorld = R"JSON({
  "name": "mini-toggle",
  "initial": "main",
  "screens": [{
    "id": "main",
    "elements": [
      {"label": "Settings header", "x": 40, "y": 20, "w": 300, "h": 40, "kind": "text"},
      {"label": "dark mode", "x": 100, "y": 200, "w": 220, "h": 44, "kind": "toggle", "state": "off"}
    ],
    "transitions": []
  }],
  "success": [{"element_state": {"screen": "main", "label": "dark mode", "equals": "on"},
               "desc": "the dark mode toggle must be switched on"}]
})JSON";

// dead-end world: the only button does nothing
const char* kDeadWorld = R"JSON({
  "name": "mini-dead",
  "initial": "main",
  "screens": [{
    "id": "main",
    "elements": [{"label": "dead button", "x": 100, "y": 100, "w": 200, "h": 40, "kind": "button"}],
    "transitions": []
  }],
  "success": [{"flag_set": "never", "desc": "unreachable"}]
})JSON";

struct Fixture {
  TempDir tmp;
  std::string world_path;
  RunConfig cfg;

  Fixture(const std::string& world_json, const std::vector<Section>& sections) {
    world_path = tmp.file("world.json");
    write_file(world_path, world_json);
    write_file(tmp.file("script.txt"), script_text(sections));
    cfg.backend_mode = "scripted";
    cfg.script_path = tmp.file("script.txt");
    cfg.judge_mode = "oracle";
    cfg.prompts_dir = data_path("prompts");
    cfg.out_dir = tmp.file("out");
    cfg.budget = 10;
  }

  RunResult run(const std::string& id = "t") {
    TaskSpec task;
    task.id = id;
    task.instruction = "finish the job";
    return run_task(task, world_path, cfg);
  }
};

std::vector<json> read_jsonl(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<json> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(json::parse(line));
  }
  return lines;
}

bool has_annotation(const json& step, const std::string& needle) {
  for (const auto& a : step.at("annotations")) {
    if (a.get<std::string>().find(needle) != std::string::npos) return true;
  }
  return false;
}

// transcript entries for one role at one manager step
std::vector<json> calls_at(const std::vector<json>& transcript, const std::string& role,
                           int step) {
  std::vector<json> out;
  for (const auto& e : transcript) {
    if (e.at("role") == role && e.at("step") == step) out.push_back(e);
  }
  return out;
}

}  // namespace

TEST_CASE("a two-step run terminates, verifies, and writes both artifacts") {
  Fixture fx(kToggleWorld,
             {{"manager", "",
               mgr("1. the dark mode toggle shows state on\nCONTINUE",
                   "agent.click(\"dark mode\")")},
              {"manager", "dark mode [toggle, state: on]",
               mgr("1. met — the dark mode toggle [toggle, state: on] is visible\nDONE",
                   "agent.done()")},
              {"reflection", "", kReflectKeep}});
  RunResult r = fx.run("mini");

  CHECK_FALSE(r.aborted);
  REQUIRE(r.termination);
  CHECK(r.termination->kind == TerminationKind::DoneAccepted);
  CHECK(r.termination->step_index == 1);
  CHECK(r.env_success);
  CHECK(r.step_count == 2);
  CHECK(fs::exists(r.trajectory_path));
  CHECK(fs::exists(r.transcript_path));

  auto lines = read_jsonl(r.trajectory_path);
  REQUIRE(lines.size() == 4);  // header, 2 steps, trailer
  CHECK(lines[0].at("type") == "header");
  CHECK(lines[0].at("task").at("id") == "mini");
  CHECK(lines[0].at("config").at("budget") == 10);
  CHECK(lines[1].at("type") == "step");
  CHECK(lines[1].at("action") == "agent.click(\"dark mode\", 1, \"left\")");
  CHECK(lines[1].at("micro_verify").at("rule") == "toggle-state-changed");
  CHECK(lines[1].at("micro_verify").at("satisfied") == "yes");
  CHECK(lines[2].at("action") == "agent.done()");
  CHECK(lines[2].at("verifier_note").at("complete") == true);
  CHECK(lines[3].at("type") == "trailer");
  CHECK(lines[3].at("termination").at("kind") == "done-accepted");
  CHECK(lines[3].at("env_success") == true);

  // row extraction agrees with the live result
  RunOutcomeRow row = row_from_trajectory(load_trajectory(r.trajectory_path));
  CHECK(row.terminal_kind == "done-accepted");
  CHECK(row.claimed_done);
  CHECK(row.ground_success);
  CHECK(row.total_steps == 2);

  // transcript: 2 manager calls, 1 reflection (the terminal is not a UI step)
  auto transcript = read_jsonl(r.transcript_path);
  CHECK(calls_at(transcript, "manager", 0).size() == 1);
  CHECK(calls_at(transcript, "manager", 1).size() == 1);
  CHECK(calls_at(transcript, "reflection", 0).size() == 1);
  CHECK(calls_at(transcript, "reflection", 1).empty());
  for (const auto& e : transcript) CHECK(e.at("role") != "verifier");  // oracle judge
}

TEST_CASE("malformed manager replies get one retry with a format reminder") {
  Fixture fx(kToggleWorld,
             {{"manager", "", "I will click things now."},  // unusable: no sections
              {"reflection", "", kReflectKeep}});
  // after the junk reply, the clamped main track would repeat it; steer the
  // retry with an override keyed on the reminder text
  write_file(fx.tmp.file("script.txt"),
             script_text({{"manager", "", "I will click things now."},
                          {"manager", "format reminder",
                           mgr("1. the dark mode toggle shows state on\nCONTINUE",
                               "agent.click(\"dark mode\")")},
                          {"manager", "dark mode [toggle, state: on]",
                           mgr("1. met — toggle is on\nDONE", "agent.done()")},
                          {"reflection", "", kReflectKeep}}));
  RunResult r = fx.run();

  REQUIRE(r.termination);
  CHECK(r.termination->kind == TerminationKind::DoneAccepted);
  CHECK(r.step_count == 2);

  auto lines = read_jsonl(r.trajectory_path);
  CHECK(has_annotation(lines[1], "malformed-output:"));
  CHECK(lines[1].at("action") == "agent.click(\"dark mode\", 1, \"left\")");

  auto transcript = read_jsonl(r.transcript_path);
  auto step0 = calls_at(transcript, "manager", 0);
  REQUIRE(step0.size() == 2);
  CHECK(step0[0].at("user").get<std::string>().find("[format reminder]") == std::string::npos);
  CHECK(step0[1].at("user").get<std::string>().find("[format reminder]") != std::string::npos);
}

TEST_CASE("a step with no usable output is annotated and consumes budget") {
  Fixture fx(kDeadWorld, {{"manager", "", "still thinking..."}});
  fx.cfg.budget = 2;
  RunResult r = fx.run();

  CHECK_FALSE(r.aborted);
  REQUIRE(r.termination);
  CHECK(r.termination->kind == TerminationKind::BudgetExhausted);
  CHECK(r.step_count == 2);

  auto lines = read_jsonl(r.trajectory_path);
  for (int i : {1, 2}) {
    CHECK(lines[i].at("action").is_null());
    CHECK(has_annotation(lines[i], "step-malformed: no usable Manager output after 3 attempts"));
  }
  auto transcript = read_jsonl(r.transcript_path);
  CHECK(calls_at(transcript, "manager", 0).size() == 3);  // malformed_retry_cap
  CHECK(calls_at(transcript, "manager", 1).size() == 3);
}

TEST_CASE("empty backend output is treated as malformed, not a crash") {
  Fixture fx(kDeadWorld, {{"manager", "", "<<EMPTY>>"}});
  fx.cfg.budget = 1;
  RunResult r = fx.run();
  REQUIRE(r.termination);
  CHECK(r.termination->kind == TerminationKind::BudgetExhausted);
  auto lines = read_jsonl(r.trajectory_path);
  CHECK(has_annotation(lines[1], "empty-output:"));
  CHECK(has_annotation(lines[1], "step-malformed"));
}

TEST_CASE("criteria: reminder retry then synthesized fallback") {
  Fixture fx(kToggleWorld,
             {{"manager", "", mgr("CONTINUE", "agent.click(\"dark mode\")")},  // no criteria
              {"reflection", "", kReflectKeep}});
  fx.cfg.budget = 2;
  RunResult r = fx.run();

  auto lines = read_jsonl(r.trajectory_path);
  CHECK(has_annotation(lines[1], "criteria-fallback: synthesized from the instruction"));

  auto transcript = read_jsonl(r.transcript_path);
  auto step0 = calls_at(transcript, "manager", 0);
  REQUIRE(step0.size() == 2);  // criteria reminder costs one retry
  CHECK(step0[1].at("user").get<std::string>().find(
            "[reminder] Your Completion Gate section must list") != std::string::npos);
  // the synthesized criterion shows up in the next step's prompt
  auto step1 = calls_at(transcript, "manager", 1);
  REQUIRE(step1.size() == 1);
  CHECK(step1[0].at("user").get<std::string>().find(
            "The task is visibly complete on screen: finish the job") != std::string::npos);
}

TEST_CASE("criteria lists longer than three are truncated") {
  Fixture fx(kToggleWorld,
             {{"manager", "",
               mgr("1. first thing\n2. second thing\n3. third thing\n4. fourth thing\nCONTINUE",
                   "agent.click(\"dark mode\")")},
              {"reflection", "", kReflectKeep}});
  fx.cfg.budget = 2;
  RunResult r = fx.run();
  auto lines = read_jsonl(r.trajectory_path);
  CHECK(has_annotation(lines[1], "criteria-truncated: kept the first 3"));
  auto transcript = read_jsonl(r.transcript_path);
  std::string prompt = calls_at(transcript, "manager", 1)[0].at("user").get<std::string>();
  CHECK(prompt.find("3. third thing") != std::string::npos);
  CHECK(prompt.find("fourth thing") == std::string::npos);
}

TEST_CASE("an insistent manager is refused and the step blocked") {
  Fixture fx(kDeadWorld,
             {{"manager", "",
               mgr("1. the unreachable flag is set\nCONTINUE", "agent.click(\"dead button\")")},
              {"reflection", "", kReflectKeep}});
  fx.cfg.budget = 3;
  RunResult r = fx.run();

  REQUIRE(r.termination);
  CHECK(r.termination->kind == TerminationKind::BudgetExhausted);
  CHECK(r.step_count == 3);

  auto lines = read_jsonl(r.trajectory_path);
  // steps 0 and 1: the click runs but changes nothing
  CHECK(has_annotation(lines[1], "env: no-op"));
  CHECK(lines[2].at("loop_note").at("tier") == "modality-switch");
  CHECK(lines[2].at("loop_note").at("n_a") == 2);

  // step 2: directive armed, the same action is refused twice, then blocked
  const json& blocked = lines[3];
  CHECK(has_annotation(blocked, "blacklist-reject: agent.click(\"dead button\", 1, \"left\")"));
  CHECK(has_annotation(blocked, "blocked-by-blacklist: agent.click(\"dead button\", 1, \"left\") (retry budget 2 exhausted)"));
  CHECK(blocked.at("action").is_null());
  bool saw_directive = false;
  for (const auto& inj : blocked.at("injected")) {
    if (inj.at("kind") == "directive") saw_directive = true;
  }
  CHECK(saw_directive);

  auto transcript = read_jsonl(r.transcript_path);
  auto step2 = calls_at(transcript, "manager", 2);
  REQUIRE(step2.size() == 3);  // 1 + blacklist_retry_budget
  std::string first = step2[0].at("user").get<std::string>();
  CHECK(first.find("produced no visible change 2 times") != std::string::npos);
  CHECK(first.find("interaction modality") != std::string::npos);
  CHECK(step2[2].at("user").get<std::string>().find("[refusal] The action agent.click(\"dead button\", 1, \"left\") is blacklisted") != std::string::npos);
}

TEST_CASE("shipped trap fixture: directive lands in the next prompt and the run escapes") {
  TempDir tmp;
  RunConfig cfg;
  cfg.backend_mode = "scripted";
  cfg.script_path = data_path("scripts/trap-menu-click.script");
  cfg.prompts_dir = data_path("prompts");
  cfg.out_dir = tmp.file("out");
  cfg.budget = 50;
  TaskSpec task;
  task.id = "trap-menu-click";
  task.instruction = "Open the network settings panel.";
  RunResult r = run_task(task, data_path("worlds/trap-menu-click.json"), cfg);

  REQUIRE(r.termination);
  CHECK(r.termination->kind == TerminationKind::DoneAccepted);
  CHECK(r.env_success);
  CHECK(r.step_count == 5);

  auto lines = read_jsonl(r.trajectory_path);
  CHECK(lines[2].at("loop_note").at("tier") == "modality-switch");
  auto transcript = read_jsonl(r.transcript_path);
  std::string prompt = calls_at(transcript, "manager", 2)[0].at("user").get<std::string>();
  CHECK(prompt.find("Switch to a different interaction modality") != std::string::npos);
}

TEST_CASE("shipped premature fixture: the rejected claim is explained to the manager") {
  TempDir tmp;
  RunConfig cfg;
  cfg.backend_mode = "scripted";
  cfg.script_path = data_path("scripts/premature-form-submit.script");
  cfg.prompts_dir = data_path("prompts");
  cfg.out_dir = tmp.file("out");
  TaskSpec task;
  task.id = "premature-form-submit";
  task.instruction = "Fill in the form and submit it.";
  RunResult r = run_task(task, data_path("worlds/premature-form-submit.json"), cfg);

  REQUIRE(r.termination);
  CHECK(r.termination->kind == TerminationKind::DoneAccepted);
  CHECK(r.step_count == 4);

  auto lines = read_jsonl(r.trajectory_path);
  const json& claim_step = lines[2];  // step 1: the premature agent.done()
  CHECK(claim_step.at("action") == "agent.done()");
  CHECK(claim_step.at("verifier_note").at("complete") == false);
  bool saw_reject = false;
  std::string reject_text;
  for (const auto& inj : claim_step.at("injected")) {
    if (inj.at("kind") == "rejection-reason") {
      saw_reject = true;
      reject_text = inj.at("text").get<std::string>();
    }
  }
  REQUIRE(saw_reject);
  CHECK(reject_text.find("Completion claim rejected") != std::string::npos);
  CHECK(reject_text.find("judge: not complete:") != std::string::npos);

  auto transcript = read_jsonl(r.transcript_path);
  std::string prompt = calls_at(transcript, "manager", 2)[0].at("user").get<std::string>();
  CHECK(prompt.find("Completion claim rejected") != std::string::npos);
}

TEST_CASE("a no-change click schedules an implicit wait before the next step") {
  const char* world = R"JSON({
    "name": "mini-delayed",
    "initial": "main",
    "screens": [{
      "id": "main",
      "elements": [{"label": "slow button", "x": 100, "y": 100, "w": 200, "h": 40, "kind": "button"}],
      "transitions": [
        {"on": "*", "event": "wait",
         "effect": {"add_element": {"element": {"label": "Result ready", "x": 100, "y": 200, "w": 200, "h": 40, "kind": "text"}}}}
      ]
    }],
    "success": [{"element_exists": {"screen": "main", "label": "Result ready"},
                 "desc": "the result ready banner must be visible"}]
  })JSON";
  Fixture fx(world,
             {{"manager", "",
               mgr("1. the result ready banner is visible\nCONTINUE",
                   "agent.click(\"slow button\")")},
              {"manager", "Result ready [text",
               mgr("1. met — Result ready [text] is on screen\nDONE", "agent.done()")},
              {"reflection", "", kReflectKeep}});
  RunResult r = fx.run();

  REQUIRE(r.termination);
  CHECK(r.termination->kind == TerminationKind::DoneAccepted);
  CHECK(r.env_success);

  auto lines = read_jsonl(r.trajectory_path);
  CHECK(lines[1].at("micro_verify").at("rule") == "no-change-wait");
  CHECK(has_annotation(lines[2], "implicit-wait: re-checked the screen after 1s"));
  // the waited-for element is already visible in step 1's pre-observation
  bool visible = false;
  for (const auto& e : lines[2].at("pre_obs").at("elements")) {
    if (e.at("label") == "Result ready") visible = true;
  }
  CHECK(visible);
}

TEST_CASE("search knowledge is injected and quoted back in later prompts") {
  const char* world = R"JSON({
    "name": "mini-search",
    "initial": "main",
    "screens": [{
      "id": "main",
      "elements": [{"label": "code field", "x": 100, "y": 100, "w": 200, "h": 40, "kind": "field", "state": ""}],
      "transitions": []
    }],
    "success": [{"element_state": {"screen": "main", "label": "code field", "equals": "4242"},
                 "desc": "the code field must contain the unlock code"}]
  })JSON";
  std::vector<Section> sections = {
      {"manager", "", mgr("1. the code field shows the unlock code\nCONTINUE",
                          "agent.call_search_agent(\"what is the unlock code\")")},
      {"manager", "The unlock code is 4242",
       mgr("1. the code field shows the unlock code\nCONTINUE",
           "agent.type(\"code field\", \"4242\", 1, 0)")},
      {"manager", "code field [field, state: 4242",
       mgr("1. met — code field [field, state: 4242] visible\nDONE", "agent.done()")},
      {"search", "", "The unlock code is 4242."},
      {"reflection", "", kReflectKeep}};
  // claim-first override ordering: check the typed state before the knowledge marker
  std::swap(sections[1], sections[2]);
  Fixture fx(world, sections);
  RunResult r = fx.run();

  REQUIRE(r.termination);
  CHECK(r.termination->kind == TerminationKind::DoneAccepted);
  CHECK(r.env_success);
  CHECK(r.step_count == 3);

  auto lines = read_jsonl(r.trajectory_path);
  bool saw_knowledge = false;
  for (const auto& inj : lines[1].at("injected")) {
    if (inj.at("kind") == "knowledge") saw_knowledge = true;
  }
  CHECK(saw_knowledge);
  auto transcript = read_jsonl(r.transcript_path);
  CHECK(calls_at(transcript, "search", 0).size() == 1);
  std::string prompt = calls_at(transcript, "manager", 1)[0].at("user").get<std::string>();
  CHECK(prompt.find("[1] The unlock code is 4242.") != std::string::npos);
}

TEST_CASE("disabling search turns the tool call into an inert step") {
  const char* world = R"JSON({
    "name": "mini-search-off",
    "initial": "main",
    "screens": [{"id": "main", "elements": [
      {"label": "anything", "x": 0, "y": 0, "w": 10, "h": 10}]}],
    "success": [{"flag_set": "never", "desc": "unreachable"}]
  })JSON";
  Fixture fx(world, {{"manager", "",
                      mgr("1. something visible\nCONTINUE",
                          "agent.call_search_agent(\"help\")")},
                     {"reflection", "", kReflectKeep}});
  fx.cfg.flags.search = false;
  fx.cfg.budget = 1;
  RunResult r = fx.run();
  auto lines = read_jsonl(r.trajectory_path);
  CHECK(has_annotation(lines[1], "search-disabled: tool call consumed the step with no effect"));
  CHECK(lines[1].at("injected").empty());
  auto transcript = read_jsonl(r.transcript_path);
  CHECK(calls_at(transcript, "search", 0).empty());
}

TEST_CASE("shipped coder fixture: the session runs in a sandbox and reports back") {
  TempDir tmp;
  RunConfig cfg;
  cfg.backend_mode = "scripted";
  cfg.script_path = data_path("scripts/straight-coder-report.script");
  cfg.prompts_dir = data_path("prompts");
  cfg.out_dir = tmp.file("out");
  TaskSpec task;
  task.id = "straight-coder-report";
  task.instruction = "Produce the report file.";
  RunResult r = run_task(task, data_path("worlds/straight-coder-report.json"), cfg);

  REQUIRE(r.termination);
  CHECK(r.termination->kind == TerminationKind::DoneAccepted);
  CHECK(r.env_success);

  auto lines = read_jsonl(r.trajectory_path);
  bool saw_tool_result = false;
  for (size_t i = 1; i + 1 < lines.size(); ++i) {
    if (has_annotation(lines[i], "tool-result: wrote report.txt")) saw_tool_result = true;
  }
  CHECK(saw_tool_result);

  fs::path task_dir = fs::path(cfg.out_dir) / task.id;
  CHECK(fs::exists(task_dir / "code_sessions" / "0.json"));
  CHECK(read_file((task_dir / "sandbox" / "report.txt").string()) == "DONE");
  json session = json::parse(read_file((task_dir / "code_sessions" / "0.json").string()));
  CHECK(session.at("completed") == true);
  CHECK(session.at("entries").size() == 1);
}

TEST_CASE("gate DONE without agent.done() is flagged as a contract violation") {
  Fixture fx(kToggleWorld,
             {{"manager", "",
               mgr("1. the dark mode toggle shows state on\nCONTINUE",
                   "agent.click(\"dark mode\")")},
              {"manager", "dark mode [toggle, state: on]",
               mgr("1. met — the toggle [toggle, state: on] is visible\nCONTINUE",
                   "agent.click(\"dark mode\")")},
              {"reflection", "", kReflectKeep}});
  fx.cfg.budget = 2;
  RunResult r = fx.run();

  REQUIRE(r.termination);
  CHECK(r.termination->kind == TerminationKind::BudgetExhausted);
  auto lines = read_jsonl(r.trajectory_path);
  CHECK(lines[2].at("gate_note").at("value") == "DONE");
  CHECK(has_annotation(lines[2], "contract-violation: gate DONE but the grounded action is not agent.done()"));
}

TEST_CASE("a backend outage aborts the run with an aborted trailer") {
  Fixture fx(kToggleWorld,
             {{"manager", "",
               mgr("1. the dark mode toggle shows state on\nCONTINUE",
                   "agent.click(\"dark mode\")")},
              {"reflection", "", kReflectKeep}});
  // override fires once the toggle is on, i.e. from step 1 onward
  write_file(fx.tmp.file("script.txt"),
             script_text({{"manager", "",
                           mgr("1. the dark mode toggle shows state on\nCONTINUE",
                               "agent.click(\"dark mode\")")},
                          {"manager", "dark mode [toggle, state: on]", "<<BACKEND_UNAVAILABLE>>"},
                          {"reflection", "", kReflectKeep}}));
  RunResult r = fx.run();

  CHECK(r.aborted);
  CHECK_FALSE(r.termination);
  CHECK_FALSE(r.abort_reason.empty());
  CHECK(r.step_count == 1);

  auto lines = read_jsonl(r.trajectory_path);
  REQUIRE(lines.size() == 3);  // header, step 0, aborted trailer
  CHECK(lines[2].at("type") == "aborted");
  CHECK(lines[2].at("at_step") == 1);
  CHECK(lines[2].at("reason") == r.abort_reason);
  CHECK(lines[2].contains("env_success"));
}

TEST_CASE("run_task validates its backend wiring") {
  TempDir tmp;
  write_file(tmp.file("world.json"), kToggleWorld);
  TaskSpec task;
  task.id = "x";
  RunConfig cfg;
  cfg.prompts_dir = data_path("prompts");
  cfg.out_dir = tmp.file("out");

  cfg.backend_mode = "scripted";
  cfg.script_path.clear();
  CHECK_THROWS_AS(run_task(task, tmp.file("world.json"), cfg), LoadError);

  cfg.backend_mode = "replay";
  cfg.transcript_path.clear();
  CHECK_THROWS_AS(run_task(task, tmp.file("world.json"), cfg), LoadError);

  cfg.backend_mode = "live";
  CHECK_THROWS_AS(run_task(task, tmp.file("world.json"), cfg), LoadError);
}

TEST_CASE("load_manifest resolves task paths relative to the manifest file") {
  TempDir tmp;
  fs::create_directories(fs::path(tmp.str()) / "worlds");
  write_file(tmp.file("worlds/w.json"), kToggleWorld);
  write_file(tmp.file("s.script"), "=== role:manager ===\nx\n");
  json manifest = {{"tasks", json::array({json{{"id", "a"},
                                               {"world", "worlds/w.json"},
                                               {"script", "s.script"},
                                               {"instruction", "do it"},
                                               {"budget", 25},
                                               {"tag", "straight"}}})}};
  write_file(tmp.file("m.json"), manifest.dump());

  auto tasks = load_manifest(tmp.file("m.json"));
  REQUIRE(tasks.size() == 1);
  CHECK(tasks[0].task.id == "a");
  CHECK(tasks[0].task.step_budget == 25);
  CHECK(tasks[0].task.tag == "straight");
  CHECK(tasks[0].expected_solvable);
  CHECK(tasks[0].world_path == tmp.file("worlds/w.json"));
  CHECK(tasks[0].script_path == tmp.file("s.script"));

  CHECK_THROWS_AS(load_manifest(tmp.file("missing.json")), LoadError);
  write_file(tmp.file("bad.json"), "{broken");
  CHECK_THROWS_AS(load_manifest(tmp.file("bad.json")), LoadError);

  // the shipped suite resolves everything against the data directory
  auto suite = load_manifest(data_path("suite.json"));
  CHECK(suite.size() == 20);
  for (const auto& st : suite) {
    CHECK(fs::exists(st.world_path));
    CHECK(fs::exists(st.script_path));
    CHECK(st.expected_solvable);
  }
}

TEST_CASE("run_suite executes a manifest and pools metrics") {
  TempDir tmp;
  // absolute paths pass straight through the manifest-relative resolution
  json manifest = {{"tasks", json::array({
                       json{{"id", "straight-settings-toggle"},
                            {"world", data_path("worlds/straight-settings-toggle.json")},
                            {"instruction", "Turn on dark mode."},
                            {"script", data_path("scripts/straight-settings-toggle.script")}},
                       json{{"id", "straight-compose-save"},
                            {"world", data_path("worlds/straight-compose-save.json")},
                            {"instruction", "Compose the note and save it."},
                            {"script", data_path("scripts/straight-compose-save.script")}},
                   })}};
  write_file(tmp.file("m.json"), manifest.dump());

  RunConfig cfg;
  cfg.prompts_dir = data_path("prompts");
  cfg.out_dir = tmp.file("out");
  SuiteReport report = run_suite(tmp.file("m.json"), cfg, std::nullopt, 2);

  REQUIRE(report.outcomes.size() == 2);
  CHECK(report.aborts == 0);
  CHECK(report.expected_total == 2);
  CHECK(report.expected_solved == 2);
  for (const auto& o : report.outcomes) {
    CHECK(o.row.terminal_kind == "done-accepted");
    CHECK(o.row.ground_success);
  }
  REQUIRE(report.metrics);

  json j = suite_report_to_json(report);
  CHECK(j.at("tasks").size() == 2);
  CHECK(j.at("expected_solved") == 2);
  CHECK(j.at("metrics").is_object());
  CHECK(j.at("tasks")[0].at("id") == "straight-settings-toggle");
}
