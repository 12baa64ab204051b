#pragma once

#include <fstream>
#include <string>

#include "guipilot/backend.hpp"
#include "guipilot/core.hpp"
#include "guipilot/loop_breaker.hpp"
#include "guipilot/verifier.hpp"

namespace guipilot {

// Everything that shapes a run. The identity-relevant part is snapshotted into
// the trajectory header, so replays with altered settings are detectable.
struct RunConfig {
  // backend
  std::string backend_mode = "scripted";  // scripted | replay | live
  std::string script_path;
  std::string transcript_path;  // replay source
  RetryPolicy retry;
  json live_endpoints;  // role -> {base_url, model, api_key_env}, live mode only

  // judge
  std::string judge_mode = "oracle";  // oracle | backend

  LoopConfig loop;
  VerifierConfig verifier;
  FeatureFlags flags;

  int budget = 50;
  int history_window = 5;
  int malformed_retry_cap = 3;
  int max_output_tokens = 4096;
  unsigned seed = 0;

  // tools
  int coder_budget = 20;
  int command_timeout_s = 30;
  bool network_allowed = false;

  std::string prompts_dir = "data/prompts";
  std::string out_dir = "out";
};

inline json config_snapshot(const RunConfig& cfg) {
  return json{
      {"judge_mode", cfg.judge_mode},
      {"loop",
       json{{"tau_a", cfg.loop.tau_a},
            {"tau_o", cfg.loop.tau_o},
            {"similarity_epsilon", cfg.loop.similarity_epsilon},
            {"reflection_every_step", cfg.loop.reflection_every_step},
            {"blacklist_retry_budget", cfg.loop.blacklist_retry_budget}}},
      {"verifier",
       json{{"temperature", cfg.verifier.verifier_temperature},
            {"uncertainty_phrases", cfg.verifier.uncertainty_phrases},
            {"rejection_warning_cap", cfg.verifier.rejection_warning_cap}}},
      {"features", to_json(cfg.flags)},
      {"budget", cfg.budget},
      {"history_window", cfg.history_window},
      {"malformed_retry_cap", cfg.malformed_retry_cap},
      {"coder_budget", cfg.coder_budget},
      {"command_timeout_s", cfg.command_timeout_s},
      {"network_allowed", cfg.network_allowed},
      {"seed", cfg.seed},
  };
}

// Config files are one JSON document with a section per module; missing keys
// keep their defaults. Command-line flags override file values afterwards.
inline RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  if (j.contains("backend")) {
    const auto& b = j.at("backend");
    cfg.backend_mode = b.value("mode", cfg.backend_mode);
    cfg.script_path = b.value("script", cfg.script_path);
    cfg.transcript_path = b.value("transcript", cfg.transcript_path);
    cfg.retry.attempts = b.value("retry_attempts", cfg.retry.attempts);
    cfg.retry.backoff_ms = b.value("retry_backoff_ms", cfg.retry.backoff_ms);
    if (b.contains("endpoints")) cfg.live_endpoints = b.at("endpoints");
  }
  if (j.contains("loop")) {
    const auto& l = j.at("loop");
    cfg.loop.tau_a = l.value("tau_a", cfg.loop.tau_a);
    cfg.loop.tau_o = l.value("tau_o", cfg.loop.tau_o);
    cfg.loop.similarity_epsilon = l.value("similarity_epsilon", cfg.loop.similarity_epsilon);
    cfg.loop.reflection_every_step =
        l.value("reflection_every_step", cfg.loop.reflection_every_step);
    cfg.loop.blacklist_retry_budget =
        l.value("blacklist_retry_budget", cfg.loop.blacklist_retry_budget);
  }
  if (j.contains("verifier")) {
    const auto& v = j.at("verifier");
    cfg.verifier.verifier_temperature =
        v.value("temperature", cfg.verifier.verifier_temperature);
    if (v.contains("uncertainty_phrases")) {
      cfg.verifier.uncertainty_phrases.clear();
      for (const auto& p : v.at("uncertainty_phrases"))
        cfg.verifier.uncertainty_phrases.push_back(p.get<std::string>());
    }
    cfg.verifier.rejection_warning_cap =
        v.value("rejection_warning_cap", cfg.verifier.rejection_warning_cap);
    cfg.judge_mode = v.value("judge_mode", cfg.judge_mode);
  }
  if (j.contains("features")) cfg.flags = feature_flags_from_json(j.at("features"));
  if (j.contains("run")) {
    const auto& r = j.at("run");
    cfg.budget = r.value("budget", cfg.budget);
    cfg.history_window = r.value("history_window", cfg.history_window);
    cfg.malformed_retry_cap = r.value("malformed_retry_cap", cfg.malformed_retry_cap);
    cfg.max_output_tokens = r.value("max_output_tokens", cfg.max_output_tokens);
    cfg.seed = r.value("seed", cfg.seed);
    cfg.prompts_dir = r.value("prompts_dir", cfg.prompts_dir);
    cfg.out_dir = r.value("out_dir", cfg.out_dir);
  }
  if (j.contains("tools")) {
    const auto& t = j.at("tools");
    cfg.coder_budget = t.value("coder_budget", cfg.coder_budget);
    cfg.command_timeout_s = t.value("command_timeout_s", cfg.command_timeout_s);
    cfg.network_allowed = t.value("network_allowed", cfg.network_allowed);
  }
  if (cfg.budget < 1) throw LoadError("run.budget must be >= 1");
  if (cfg.loop.tau_a < 2) throw LoadError("loop.tau_a must be >= 2");
  if (cfg.loop.tau_o < 2) throw LoadError("loop.tau_o must be >= 2");
  if (cfg.loop.similarity_epsilon < 0) throw LoadError("loop.similarity_epsilon must be >= 0");
  return cfg;
}

// Restores the identity-relevant settings recorded in a trajectory header so a
// replay runs under the exact configuration of the original.
inline void apply_snapshot(RunConfig& cfg, const json& snap) {
  cfg.judge_mode = snap.value("judge_mode", cfg.judge_mode);
  if (snap.contains("loop")) {
    const auto& l = snap.at("loop");
    cfg.loop.tau_a = l.value("tau_a", cfg.loop.tau_a);
    cfg.loop.tau_o = l.value("tau_o", cfg.loop.tau_o);
    cfg.loop.similarity_epsilon = l.value("similarity_epsilon", cfg.loop.similarity_epsilon);
    cfg.loop.reflection_every_step =
        l.value("reflection_every_step", cfg.loop.reflection_every_step);
    cfg.loop.blacklist_retry_budget =
        l.value("blacklist_retry_budget", cfg.loop.blacklist_retry_budget);
  }
  if (snap.contains("verifier")) {
    const auto& v = snap.at("verifier");
    cfg.verifier.verifier_temperature = v.value("temperature", cfg.verifier.verifier_temperature);
    if (v.contains("uncertainty_phrases")) {
      cfg.verifier.uncertainty_phrases.clear();
      for (const auto& p : v.at("uncertainty_phrases"))
        cfg.verifier.uncertainty_phrases.push_back(p.get<std::string>());
    }
    cfg.verifier.rejection_warning_cap =
        v.value("rejection_warning_cap", cfg.verifier.rejection_warning_cap);
  }
  if (snap.contains("features")) cfg.flags = feature_flags_from_json(snap.at("features"));
  cfg.budget = snap.value("budget", cfg.budget);
  cfg.history_window = snap.value("history_window", cfg.history_window);
  cfg.malformed_retry_cap = snap.value("malformed_retry_cap", cfg.malformed_retry_cap);
  cfg.coder_budget = snap.value("coder_budget", cfg.coder_budget);
  cfg.command_timeout_s = snap.value("command_timeout_s", cfg.command_timeout_s);
  cfg.network_allowed = snap.value("network_allowed", cfg.network_allowed);
  cfg.seed = snap.value("seed", cfg.seed);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw LoadError("cannot open config: " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const std::exception& e) {
    throw LoadError(path + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const LoadError& e) {
    throw LoadError(path + ": " + e.what());
  }
}

}  // namespace guipilot
