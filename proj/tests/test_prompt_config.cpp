#include "catch2/catch_amalgamated.hpp"
#include "guipilot/config.hpp"
#include "guipilot/prompt.hpp"
#include "support.hpp"

using namespace guipilot;

TEST_CASE("templates split on the user separator and collect placeholders") {
  testing::TempDir tmp;
  testing::write_file(tmp.file("t.txt"),
                      "You are a careful agent.\n===USER===\nTask: {TASK_DESCRIPTION}\n"
                      "Step {STEP_INDEX} of {STEP_BUDGET}.\nJSON stays {literal}.\n");
  auto tpl = load_template(tmp.file("t.txt"), Role::Manager);
  CHECK(tpl.system_body == "You are a careful agent.");
  CHECK(tpl.user_body.find("Task: {TASK_DESCRIPTION}") == 0);
  CHECK(tpl.required_placeholders ==
        std::set<std::string>{"TASK_DESCRIPTION", "STEP_INDEX", "STEP_BUDGET"});

  auto r = render_prompt(tpl, {{"TASK_DESCRIPTION", "do a thing"},
                               {"STEP_INDEX", "3"},
                               {"STEP_BUDGET", "50"}});
  CHECK(r.system_text == "You are a careful agent.");
  CHECK(r.user_text.find("Task: do a thing") == 0);
  CHECK(r.user_text.find("Step 3 of 50.") != std::string::npos);
  CHECK(r.user_text.find("{literal}") != std::string::npos);  // lowercase is not a placeholder

  // identical bindings, identical bytes
  auto again = render_prompt(tpl, {{"TASK_DESCRIPTION", "do a thing"},
                                   {"STEP_INDEX", "3"},
                                   {"STEP_BUDGET", "50"}});
  CHECK(again.user_text == r.user_text);
}

TEST_CASE("rendering fails loudly on unbound placeholders; extras are fine") {
  testing::TempDir tmp;
  testing::write_file(tmp.file("t.txt"), "{NEEDED}\n");
  auto tpl = load_template(tmp.file("t.txt"), Role::Verifier);
  CHECK_THROWS_AS(render_prompt(tpl, {}), RenderError);
  CHECK_NOTHROW(render_prompt(tpl, {{"NEEDED", "x"}, {"EXTRA", "y"}}));
  CHECK_THROWS_AS(load_template(tmp.file("missing.txt"), Role::Manager), LoadError);
}

TEST_CASE("the shipped prompt templates load and declare the engine's bindings") {
  auto manager = load_template(testing::data_path("prompts/manager.txt"), Role::Manager);
  std::set<std::string> common = {"TASK_DESCRIPTION", "STEP_INDEX", "STEP_BUDGET", "CRITERIA",
                                  "HISTORY", "OBSERVATION", "KNOWLEDGE", "DIRECTIVES",
                                  "REJECTIONS"};
  for (const auto& p : manager.required_placeholders) {
    CAPTURE(p);
    CHECK(common.count(p) == 1);
  }
  CHECK_FALSE(manager.system_body.empty());

  auto reflection = load_template(testing::data_path("prompts/reflection.txt"),
                                  Role::Reflection);
  std::set<std::string> reflection_ok = common;
  reflection_ok.insert("LAST_ACTION");
  reflection_ok.insert("CHECK_RESULT");
  for (const auto& p : reflection.required_placeholders) {
    CAPTURE(p);
    CHECK(reflection_ok.count(p) == 1);
  }

  auto verifier = load_template(testing::data_path("prompts/verifier.txt"), Role::Verifier);
  std::set<std::string> verifier_ok = common;
  verifier_ok.insert("CLAIM");
  for (const auto& p : verifier.required_placeholders) {
    CAPTURE(p);
    CHECK(verifier_ok.count(p) == 1);
  }
}

TEST_CASE("role names round-trip") {
  for (Role r : {Role::Manager, Role::Reflection, Role::Verifier, Role::Search, Role::Coder,
                 Role::Grounder}) {
    CHECK(role_from(to_string(r)) == r);
  }
  CHECK_THROWS(role_from("astronaut"));
}

TEST_CASE("config parses sections, applies defaults, and validates bounds") {
  json j = {
      {"backend", {{"mode", "scripted"}, {"script", "s.script"}}},
      {"loop", {{"tau_a", 3}, {"tau_o", 4}, {"similarity_epsilon", 1}}},
      {"verifier", {{"temperature", 0.5}, {"rejection_warning_cap", 2}}},
      {"features", {{"search", false}}},
      {"run", {{"budget", 15}, {"history_window", 7}, {"seed", 42}}},
      {"tools", {{"coder_budget", 5}, {"command_timeout_s", 3}}},
  };
  auto cfg = config_from_json(j);
  CHECK(cfg.backend_mode == "scripted");
  CHECK(cfg.script_path == "s.script");
  CHECK(cfg.loop.tau_a == 3);
  CHECK(cfg.loop.tau_o == 4);
  CHECK(cfg.loop.similarity_epsilon == 1);
  CHECK(cfg.verifier.verifier_temperature == 0.5);
  CHECK(cfg.verifier.rejection_warning_cap == 2);
  CHECK_FALSE(cfg.flags.search);
  CHECK(cfg.flags.verifier);  // untouched default
  CHECK(cfg.budget == 15);
  CHECK(cfg.history_window == 7);
  CHECK(cfg.seed == 42);
  CHECK(cfg.coder_budget == 5);
  CHECK(cfg.command_timeout_s == 3);

  CHECK_THROWS_AS(config_from_json({{"run", {{"budget", 0}}}}), LoadError);
  CHECK_THROWS_AS(config_from_json({{"loop", {{"tau_a", 1}}}}), LoadError);
  CHECK_THROWS_AS(config_from_json({{"loop", {{"similarity_epsilon", -1}}}}), LoadError);
}

TEST_CASE("config snapshot restores into a fresh config") {
  RunConfig cfg;
  cfg.judge_mode = "model";
  cfg.loop.tau_a = 5;
  cfg.loop.similarity_epsilon = 2;
  cfg.verifier.verifier_temperature = 0.9;
  cfg.verifier.uncertainty_phrases = {"perhaps", "maybe"};
  cfg.flags.loop_breaker = false;
  cfg.budget = 100;
  cfg.history_window = 9;
  cfg.seed = 77;

  json snap = config_snapshot(cfg);
  RunConfig fresh;
  apply_snapshot(fresh, snap);
  CHECK(fresh.judge_mode == "model");
  CHECK(fresh.loop.tau_a == 5);
  CHECK(fresh.loop.similarity_epsilon == 2);
  CHECK(fresh.verifier.verifier_temperature == 0.9);
  CHECK(fresh.verifier.uncertainty_phrases == std::vector<std::string>{"perhaps", "maybe"});
  CHECK_FALSE(fresh.flags.loop_breaker);
  CHECK(fresh.budget == 100);
  CHECK(fresh.history_window == 9);
  CHECK(fresh.seed == 77);

  // round-trip stability: snapshot of the restored config is identical
  CHECK(config_snapshot(fresh) == snap);
}

TEST_CASE("budget tiers accepted by config validation") {
  for (int b : {15, 50, 100}) {
    json j = {{"run", {{"budget", b}}}};
    CHECK(config_from_json(j).budget == b);
  }
}
