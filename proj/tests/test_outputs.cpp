#include <random>

#include "catch2/catch_amalgamated.hpp"
#include "gen_actions.hpp"
#include "guipilot/outputs.hpp"

using namespace guipilot;

namespace {

std::string five_sections(const std::string& gate, const std::string& call) {
  return "(Completion Gate)\n" + gate +
         "\n\n(Previous Action Verification)\nlooks fine\n\n(Screenshot Analysis)\na screen\n\n"
         "(Next Action)\ndo the thing\n\n(Grounded Action)\n```\n" + call + "\n```\n";
}

}  // namespace

TEST_CASE("manager parser reads all five sections and the grounded call") {
  auto r = parse_manager_output(five_sections("1. unmet\nCONTINUE", "agent.click(\"OK\")"));
  REQUIRE(r.ok());
  const auto& m = r.value();
  CHECK(m.gate_decision == GateValue::Continue);
  CHECK_FALSE(m.gate_ambiguous);
  CHECK(m.completion_gate.find("1. unmet") != std::string::npos);
  CHECK(m.prev_verification == "looks fine");
  CHECK(m.screenshot_analysis == "a screen");
  CHECK(m.next_action == "do the thing");
  CHECK(m.grounded_action == Action{ClickAction{"OK"}});
}

TEST_CASE("manager section headers match case-insensitively and in any order") {
  std::string text =
      "(GROUNDED ACTION)\n```\nagent.wait(1)\n```\n\n(completion gate)\nDONE ok\n\n"
      "(Previous action verification)\np\n\n(screenshot analysis)\ns\n\n(next action)\nn\n";
  auto r = parse_manager_output(text);
  REQUIRE(r.ok());
  CHECK(r.value().gate_decision == GateValue::Done);
  CHECK(r.value().grounded_action == Action{WaitAction{1}});
}

TEST_CASE("gate decision tokens are case-sensitive whole words in the gate section only") {
  // lowercase "done" is not a token; a token in another section does not count
  auto none = parse_manager_output(five_sections("everything looks done here", "agent.done()"));
  REQUIRE_FALSE(none.ok());
  CHECK(none.error().message.find("gate decision") != std::string::npos);

  auto wordy = parse_manager_output(five_sections("ABANDONED plans. CONTINUE", "agent.wait(1)"));
  REQUIRE(wordy.ok());  // ABANDONED must not read as DONE
  CHECK(wordy.value().gate_decision == GateValue::Continue);

  auto fail = parse_manager_output(five_sections("FAIL: impossible", "agent.fail()"));
  REQUIRE(fail.ok());
  CHECK(fail.value().gate_decision == GateValue::Fail);
}

TEST_CASE("conflicting gate tokens coerce to CONTINUE with the ambiguity flag") {
  auto r = parse_manager_output(five_sections("DONE but also FAIL", "agent.wait(1)"));
  REQUIRE(r.ok());
  CHECK(r.value().gate_decision == GateValue::Continue);
  CHECK(r.value().gate_ambiguous);

  // repeating the same token is not a conflict
  auto same = parse_manager_output(five_sections("DONE DONE", "agent.done()"));
  REQUIRE(same.ok());
  CHECK(same.value().gate_decision == GateValue::Done);
  CHECK_FALSE(same.value().gate_ambiguous);
}

TEST_CASE("manager parser propagates grounded-action failures and missing sections") {
  auto missing = parse_manager_output("(Completion Gate)\nCONTINUE\nno other sections");
  REQUIRE_FALSE(missing.ok());

  auto bad_call = parse_manager_output(five_sections("CONTINUE", "agent.click(42)"));
  REQUIRE_FALSE(bad_call.ok());
  CHECK(bad_call.error().kind == ParseErrorKind::BadArguments);

  auto two_calls =
      parse_manager_output(five_sections("CONTINUE", "agent.done()\nagent.fail()"));
  REQUIRE_FALSE(two_calls.ok());
}

TEST_CASE("reflection parser reads the seven labeled lines") {
  std::string text =
      "Progress signal: steady progress\n"
      "Outcome signal: the click opened the dialog\n"
      "Loop signal: no repeats seen\n"
      "Feasibility signal: feasible\n"
      "Termination signal: CONTINUE\n"
      "Strategy signal: KEEP the current plan\n"
      "Verdict: case 2 — on track\n";
  auto r = parse_reflection(text);
  REQUIRE(r.ok());
  const auto& s = r.value();
  CHECK(s.progress == "steady progress");
  CHECK_FALSE(s.loop_detected);
  CHECK(s.feasibility == Feasibility::Feasible);
  CHECK(s.termination == GateValue::Continue);
  CHECK(s.strategy == StrategySignal::Keep);
  CHECK(s.strategy_reason == "the current plan");
  CHECK(s.verdict_case == 2);
}

TEST_CASE("reflection switch and loop-yes variants parse") {
  std::string text =
      "progress signal: stalled\n"
      "outcome signal: nothing changed\n"
      "loop signal: YES the same click repeats\n"
      "feasibility signal: uncertain at best\n"
      "termination signal: continue\n"
      "strategy signal: SWITCH to the command line\n"
      "verdict: Case 1, stuck\n";
  auto r = parse_reflection(text);
  REQUIRE(r.ok());
  CHECK(r.value().loop_detected);
  CHECK(r.value().loop_evidence == "the same click repeats");
  CHECK(r.value().feasibility == Feasibility::Uncertain);
  CHECK(r.value().strategy == StrategySignal::Switch);
  CHECK(r.value().strategy_reason == "to the command line");
  CHECK(r.value().verdict_case == 1);
}

TEST_CASE("reflection parser rejects missing or unreadable signals") {
  CHECK_FALSE(parse_reflection("").ok());
  CHECK_FALSE(parse_reflection("Progress signal: fine").ok());

  std::string both_cases =
      "Progress signal: p\nOutcome signal: o\nLoop signal: no\nFeasibility signal: feasible\n"
      "Termination signal: continue\nStrategy signal: keep\nVerdict: case 1 or case 2\n";
  auto r = parse_reflection(both_cases);
  REQUIRE_FALSE(r.ok());
  CHECK(r.error().message.find("Verdict") != std::string::npos);

  std::string bad_loop = both_cases;
  bad_loop.replace(bad_loop.find("no"), 2, "perhaps");
  CHECK_FALSE(parse_reflection(bad_loop).ok());
}

TEST_CASE("judge parser accepts chatty output and array missing_steps") {
  auto r = parse_judge(
      "Sure, here is my verdict:\n"
      "{\"complete\": false, \"reason\": \"no banner\", \"missing_steps\": [\"press save\", "
      "\"check toast\"]}\nhope that helps");
  REQUIRE(r.ok());
  CHECK_FALSE(r.value().complete);
  CHECK(r.value().reason == "no banner");
  CHECK(r.value().missing_steps == "press save; check toast");
  CHECK_FALSE(r.value().overridden);
}

TEST_CASE("judge parser resyncs past brace-balanced non-JSON regions") {
  auto r = parse_judge("{not json at all} {\"complete\": true, \"reason\": \"all set\"}");
  REQUIRE(r.ok());
  CHECK(r.value().complete);
}

TEST_CASE("judge conservative override flips complete on leftovers or uncertainty") {
  auto leftovers = parse_judge(
      "{\"complete\": true, \"reason\": \"fine\", \"missing_steps\": \"verify the toast\"}");
  REQUIRE(leftovers.ok());
  CHECK_FALSE(leftovers.value().complete);
  CHECK(leftovers.value().overridden);

  for (std::string phrase : {"not sure", "unclear", "cannot verify"}) {
    auto r = parse_judge("{\"complete\": true, \"reason\": \"I am " + phrase +
                         " about the result\", \"missing_steps\": \"\"}");
    CAPTURE(phrase);
    REQUIRE(r.ok());
    CHECK_FALSE(r.value().complete);
    CHECK(r.value().overridden);
  }

  // matching is case-insensitive, and "none" is still a nonempty leftover
  auto icase = parse_judge("{\"complete\": true, \"reason\": \"Not Sure it saved\"}");
  REQUIRE(icase.ok());
  CHECK(icase.value().overridden);

  auto none = parse_judge("{\"complete\": true, \"reason\": \"ok\", \"missing_steps\": \"none\"}");
  REQUIRE(none.ok());
  CHECK_FALSE(none.value().complete);

  // a clean confident accept is not touched
  auto clean = parse_judge("{\"complete\": true, \"reason\": \"the toast is visible\"}");
  REQUIRE(clean.ok());
  CHECK(clean.value().complete);
  CHECK_FALSE(clean.value().overridden);

  // incomplete verdicts are never "overridden"
  auto already = parse_judge(
      "{\"complete\": false, \"reason\": \"not sure\", \"missing_steps\": \"a lot\"}");
  REQUIRE(already.ok());
  CHECK_FALSE(already.value().complete);
  CHECK_FALSE(already.value().overridden);
}

TEST_CASE("judge parser returns typed errors on unusable output") {
  CHECK_FALSE(parse_judge("").ok());
  CHECK_FALSE(parse_judge("no json here").ok());
  CHECK_FALSE(parse_judge("{\"verdict\": true}").ok());
  CHECK_FALSE(parse_judge("{\"complete\": 3}").ok());
  CHECK_FALSE(parse_judge("{\"complete\": ").ok());
}

TEST_CASE("all three structured parsers survive fuzz input") {
  std::mt19937 rng(20260823);
  for (int i = 0; i < 12000; ++i) {
    std::string junk = testing::random_garbage(rng);
    CAPTURE(i, junk);
    REQUIRE_NOTHROW(parse_manager_output(junk));
    REQUIRE_NOTHROW(parse_reflection(junk));
    REQUIRE_NOTHROW(parse_judge(junk));
  }
}
