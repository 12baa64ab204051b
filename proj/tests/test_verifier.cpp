#include "catch2/catch_amalgamated.hpp"
#include "guipilot/verifier.hpp"
#include "support.hpp"

using namespace guipilot;
using testing::elem;
using testing::obs;

TEST_CASE("criteria parse from numbered and bulleted lines, claims are skipped") {
  std::string gate =
      "Here are the targets.\n"
      "1. The toggle shows state on [EXACT CHECK]\n"
      "2) A saved toast is visible\n"
      "- The file list shows the new name\n"
      "1. met: this is a claim, not a definition\n"
      "2. unmet\n"
      "not a criterion line\n";
  auto cs = parse_criteria(gate);
  REQUIRE(cs.size() == 3);
  CHECK(cs[0].statement == "The toggle shows state on");
  CHECK(cs[0].exact_check);
  CHECK(cs[1].statement == "A saved toast is visible");
  CHECK_FALSE(cs[1].exact_check);
  CHECK(cs[2].statement == "The file list shows the new name");
  CHECK(cs[0].index == 1);
  CHECK(cs[2].index == 3);
  for (const auto& c : cs) CHECK(c.status == CriterionStatus::Unmet);
}

TEST_CASE("claims update status; met without evidence is ignored") {
  auto cs = parse_criteria("1. A\n2. B\n3. C\n");
  apply_criteria_claims("1. met: the banner is visible\n2. met\n3. unmet\n", cs);
  CHECK(cs[0].status == CriterionStatus::MetWithEvidence);
  CHECK(cs[0].evidence == "the banner is visible");
  CHECK(cs[1].status == CriterionStatus::Unmet);  // bare "met" carries no evidence
  CHECK(cs[2].status == CriterionStatus::Unmet);

  apply_criteria_claims("2. met: state on\n", cs);
  CHECK(cs[1].status == CriterionStatus::MetWithEvidence);
  apply_criteria_claims("2. unmet\n", cs);
  CHECK(cs[1].status == CriterionStatus::Unmet);
  CHECK(cs[1].evidence.empty());

  // out-of-range indices are ignored rather than thrown
  apply_criteria_claims("9. met: ghost\n0. met: ghost\n", cs);
  CHECK(cs.size() == 3);
}

TEST_CASE("gate is DONE only when all criteria are met with evidence on a calm screen") {
  auto cs = parse_criteria("1. A\n2. B\n");
  CHECK(compute_gate(cs, true, false, GateValue::Done).value == GateValue::Continue);

  apply_criteria_claims("1. met: x\n2. met: y\n", cs);
  CHECK(compute_gate(cs, true, false, GateValue::Done).value == GateValue::Done);
  CHECK(compute_gate(cs, true, false, GateValue::Continue).value == GateValue::Done);

  SECTION("an unstable frame blocks DONE") {
    auto g = compute_gate(cs, false, false, GateValue::Done);
    CHECK(g.value == GateValue::Continue);
    CHECK_FALSE(g.ui_stable);
  }
  SECTION("a pending no-change wait blocks DONE") {
    CHECK(compute_gate(cs, true, true, GateValue::Done).value == GateValue::Continue);
  }
  SECTION("empty criteria can never gate DONE") {
    CHECK(compute_gate({}, true, false, GateValue::Done).value == GateValue::Continue);
  }
  SECTION("an explicit FAIL ruling passes through") {
    CHECK(compute_gate(cs, true, false, GateValue::Fail).value == GateValue::Fail);
    CHECK(compute_gate({}, false, true, GateValue::Fail).value == GateValue::Fail);
  }
}

TEST_CASE("dual-gate termination needs both modules at the same step") {
  GateDecision done_gate;
  done_gate.value = GateValue::Done;
  GateDecision cont_gate;
  JudgeVerdict yes{true, "all satisfied", "", false};
  JudgeVerdict no{false, "not complete: missing save", "press save", false};

  auto t = final_termination(done_gate, yes, 4);
  REQUIRE(t.has_value());
  CHECK(t->kind == TerminationKind::DoneAccepted);
  CHECK(t->step_index == 4);
  CHECK_FALSE(final_termination(done_gate, no, 4).has_value());
  CHECK_FALSE(final_termination(cont_gate, yes, 4).has_value());
  CHECK_FALSE(final_termination(cont_gate, no, 4).has_value());
}

TEST_CASE("micro rule selection follows the action and the target's kind") {
  Observation pre = obs("1111222233334444", true,
                        {elem("dark mode", "toggle", "off"), elem("OK", "button")});
  CHECK(select_micro_rule(Action{ClickAction{"dark mode"}}, pre) ==
        MicroRule::ToggleStateChanged);
  CHECK(select_micro_rule(Action{DoubleClickAction{"Dark  Mode"}}, pre) ==
        MicroRule::ToggleStateChanged);
  CHECK(select_micro_rule(Action{ClickAction{"OK"}}, pre) == MicroRule::ClickNewElement);
  CHECK(select_micro_rule(Action{TypeAction{"OK", "x", false, false}}, pre) ==
        MicroRule::TypeFieldContains);
  CHECK(select_micro_rule(Action{HotkeyAction{{"ctrl", "s"}}}, pre) ==
        MicroRule::SaveArtifactVisible);
  CHECK(select_micro_rule(Action{HotkeyAction{{"cmd", "s"}}}, pre) ==
        MicroRule::SaveArtifactVisible);
  CHECK(select_micro_rule(Action{HotkeyAction{{"ctrl", "o"}}}, pre) ==
        MicroRule::ClickNewElement);
  CHECK(select_micro_rule(Action{OpenAction{"Save dialog"}}, pre) ==
        MicroRule::SaveArtifactVisible);
  CHECK(select_micro_rule(Action{OpenAction{"terminal"}}, pre) == MicroRule::ClickNewElement);
  CHECK_FALSE(select_micro_rule(Action{DoneAction{}}, pre).has_value());
  CHECK_FALSE(select_micro_rule(Action{CallSearchAgentAction{"q"}}, pre).has_value());
}

TEST_CASE("an unchanged screen trumps every rule and schedules a wait") {
  Observation pre = obs("aaaa111100000000", true, {elem("dark mode", "toggle", "off")});
  Observation post = pre;
  auto out = micro_verify(Action{ClickAction{"dark mode"}}, pre, post, true);
  CHECK(out.rule == MicroRule::NoChangeWait);
  CHECK(out.satisfied == MicroStatus::No);
  CHECK(out.evidence.find("wait(1)") != std::string::npos);

  // epsilon widens "unchanged" to near-identical digests
  post.screen_digest = "aaaa111100000001";
  auto strict = micro_verify(Action{ClickAction{"dark mode"}}, pre, post, true, 0);
  CHECK(strict.rule == MicroRule::ToggleStateChanged);
  auto loose = micro_verify(Action{ClickAction{"dark mode"}}, pre, post, true, 1);
  CHECK(loose.rule == MicroRule::NoChangeWait);
}

TEST_CASE("micro outcomes grade the observation delta") {
  Observation pre = obs("1010101010101010", true,
                        {elem("dark mode", "toggle", "off"), elem("name box", "field", "old")});

  SECTION("toggle flip is a yes with before/after evidence") {
    Observation post = obs("2020202020202020", true,
                           {elem("dark mode", "toggle", "on"), elem("name box", "field", "old")});
    auto out = micro_verify(Action{ClickAction{"dark mode"}}, pre, post, true);
    CHECK(out.satisfied == MicroStatus::Yes);
    CHECK(out.evidence == "state off -> on");
  }
  SECTION("typed text present in the field is a yes") {
    Observation post = obs("3030303030303030", true,
                           {elem("dark mode", "toggle", "off"),
                            elem("name box", "field", "old plus typed")});
    auto out = micro_verify(Action{TypeAction{"name box", "typed", false, false}}, pre, post,
                            true);
    CHECK(out.satisfied == MicroStatus::Yes);
  }
  SECTION("typed text absent is a no") {
    Observation post = obs("4040404040404040", true,
                           {elem("dark mode", "toggle", "off"),
                            elem("name box", "field", "something else")});
    auto out = micro_verify(Action{TypeAction{"name box", "typed", false, false}}, pre, post,
                            true);
    CHECK(out.satisfied == MicroStatus::No);
  }
  SECTION("click yes needs a genuinely new element") {
    Observation post = obs("5050505050505050", true,
                           {elem("dark mode", "toggle", "off"),
                            elem("name box", "field", "old"), elem("popup", "text")});
    auto out = micro_verify(Action{ClickAction{"name box"}}, pre, post, true);
    CHECK(out.satisfied == MicroStatus::Yes);
    CHECK(out.evidence == "new element: popup");

    Observation shuffled = obs("6060606060606060", true,
                               {elem("name box", "field", "new content"),
                                elem("dark mode", "toggle", "off")});
    auto unknown = micro_verify(Action{ClickAction{"name box"}}, pre, shuffled, true);
    CHECK(unknown.satisfied == MicroStatus::Unknown);
  }
  SECTION("save chord wants a save-ish artifact") {
    Observation post = obs("7070707070707070", true,
                           {elem("dark mode", "toggle", "off"), elem("name box", "field", "old"),
                            elem("Saved toast", "text")});
    auto out = micro_verify(Action{HotkeyAction{{"ctrl", "s"}}}, pre, post, true);
    CHECK(out.satisfied == MicroStatus::Yes);
    CHECK(out.evidence == "artifact: Saved toast");

    Observation plain = obs("8080808080808080", true,
                            {elem("dark mode", "toggle", "off"), elem("name box", "field", "old"),
                             elem("random popup", "text")});
    auto miss = micro_verify(Action{HotkeyAction{{"ctrl", "s"}}}, pre, plain, true);
    CHECK(miss.satisfied == MicroStatus::Unknown);
  }
  SECTION("live mode degrades to an unknown self-check") {
    Observation post = obs("9090909090909090", true, {elem("popup", "text")});
    auto out = micro_verify(Action{ClickAction{"dark mode"}}, pre, post, false);
    CHECK(out.satisfied == MicroStatus::Unknown);
    CHECK(out.evidence.find("live mode") != std::string::npos);
  }
}
