// guipilot command-line front end: single runs, suites, byte-exact replay,
// trajectory analysis, and world validation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "guipilot/orchestrator.hpp"

namespace fs = std::filesystem;
using namespace guipilot;

namespace {

struct Ablations {
  bool no_verifier = false;
  bool no_loop_breaker = false;
  bool no_search = false;
  bool no_coder = false;
};

void add_ablation_flags(CLI::App* cmd, Ablations& a) {
  cmd->add_flag("--no-verifier", a.no_verifier, "disable criteria/gate/judge verification");
  cmd->add_flag("--no-loop-breaker", a.no_loop_breaker, "disable loop detection and directives");
  cmd->add_flag("--no-search", a.no_search, "search tool calls become no-ops");
  cmd->add_flag("--no-coder", a.no_coder, "coding tool calls become no-ops");
}

void apply_ablations(RunConfig& cfg, const Ablations& a) {
  if (a.no_verifier) cfg.flags.verifier = false;
  if (a.no_loop_breaker) cfg.flags.loop_breaker = false;
  if (a.no_search) cfg.flags.search = false;
  if (a.no_coder) cfg.flags.coder = false;
}

RunConfig base_config(const std::string& config_path) {
  return config_path.empty() ? RunConfig{} : load_config(config_path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw LoadError("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string truncate(const std::string& s, size_t n = 160) {
  return s.size() <= n ? s : s.substr(0, n) + "...";
}

void print_run_result(const RunResult& r) {
  if (r.aborted) {
    std::cout << "aborted: " << r.abort_reason << "\n";
  } else if (r.termination) {
    std::cout << "terminal: " << to_string(r.termination->kind) << " at step "
              << r.termination->step_index << " (" << r.termination->reason << ")\n";
  }
  std::cout << "steps: " << r.step_count << "\n"
            << "env_success: " << (r.env_success ? "true" : "false") << "\n"
            << "trajectory: " << r.trajectory_path << "\n"
            << "transcript: " << r.transcript_path << "\n";
}

int cmd_run(const std::string& config_path, const std::string& world, const std::string& script,
            const std::string& id, const std::string& instruction, std::optional<int> steps,
            const std::string& out_dir, const std::string& prompts_dir, const Ablations& abl) {
  RunConfig cfg = base_config(config_path);
  cfg.backend_mode = "scripted";
  cfg.script_path = script;
  if (steps) cfg.budget = *steps;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (!prompts_dir.empty()) cfg.prompts_dir = prompts_dir;
  apply_ablations(cfg, abl);

  TaskSpec task;
  task.id = id;
  task.instruction = instruction;
  RunResult r = run_task(task, world, cfg);
  print_run_result(r);
  return r.aborted ? 2 : 0;
}

int cmd_suite(const std::string& config_path, const std::string& manifest,
              std::optional<int> steps, int parallel, const std::string& format,
              const std::string& out_dir, const std::string& prompts_dir, const Ablations& abl) {
  RunConfig cfg = base_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (!prompts_dir.empty()) cfg.prompts_dir = prompts_dir;
  apply_ablations(cfg, abl);

  SuiteReport report = run_suite(manifest, cfg, steps, parallel);

  fs::create_directories(cfg.out_dir);
  std::string report_path = (fs::path(cfg.out_dir) / "suite_report.json").string();
  {
    std::ofstream f(report_path, std::ios::binary);
    f << suite_report_to_json(report).dump(2) << "\n";
  }

  if (format == "json") {
    std::cout << suite_report_to_json(report).dump(2) << "\n";
  } else {
    std::cout << "task                          terminal            claimed  env_success  steps\n";
    for (const auto& o : report.outcomes) {
      std::ostringstream line;
      line.setf(std::ios::left);
      line.width(30);
      line << o.task.task.id;
      line.width(20);
      line << o.row.terminal_kind;
      line.width(9);
      line << (o.row.claimed_done ? "yes" : "no");
      line.width(13);
      line << (o.row.ground_success ? "yes" : "no");
      line << o.row.total_steps;
      std::cout << line.str() << "\n";
    }
    std::cout << "\nexpected-solvable solved: " << report.expected_solved << "/"
              << report.expected_total << "\n";
    if (report.aborts) std::cout << "aborted runs: " << report.aborts << "\n";
    if (report.metrics) std::cout << "\n" << emit_report(*report.metrics, "table");
  }
  std::cout << "report: " << report_path << "\n";
  return report.aborts > 0 ? 2 : 0;
}

int cmd_replay(const std::string& world, const std::string& trajectory,
               const std::string& transcript, const std::string& out_dir,
               const std::string& prompts_dir) {
  Trajectory original = load_trajectory(trajectory);
  if (!original.header.contains("task") || !original.header.contains("config")) {
    throw LoadError("trajectory header lacks task/config; cannot replay");
  }
  TaskSpec task = task_spec_from_json(original.header.at("task"));

  RunConfig cfg;
  apply_snapshot(cfg, original.header.at("config"));
  cfg.backend_mode = "replay";
  cfg.transcript_path = transcript;
  cfg.out_dir = out_dir.empty() ? "out/replay" : out_dir;
  if (!prompts_dir.empty()) cfg.prompts_dir = prompts_dir;

  RunResult r = run_task(task, world, cfg);
  if (r.aborted) {
    std::cout << "replay aborted: " << r.abort_reason << "\n";
    return 2;
  }
  std::string a = read_file(trajectory);
  std::string b = read_file(r.trajectory_path);
  if (a == b) {
    std::cout << "replay: byte-identical (" << a.size() << " bytes, " << r.step_count
              << " steps)\n";
    return 0;
  }
  std::istringstream sa(a), sb(b);
  std::string la, lb;
  int line = 1;
  while (true) {
    bool ga = static_cast<bool>(std::getline(sa, la));
    bool gb = static_cast<bool>(std::getline(sb, lb));
    if (!ga && !gb) break;
    if (la != lb || ga != gb) {
      std::cout << "replay: DIVERGED at line " << line << "\n"
                << "  original: " << (ga ? truncate(la) : "<eof>") << "\n"
                << "  replayed: " << (gb ? truncate(lb) : "<eof>") << "\n";
      break;
    }
    ++line;
  }
  std::cout << "replayed trajectory: " << r.trajectory_path << "\n";
  return 2;
}

int cmd_analyze(std::vector<std::string> paths, const std::string& dir,
                const std::string& format) {
  if (!dir.empty()) {
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().filename() == "trajectory.jsonl") {
        paths.push_back(entry.path().string());
      }
    }
    std::sort(paths.begin(), paths.end());
  }
  if (paths.empty()) {
    std::cerr << "analyze: no trajectories given\n";
    return 1;
  }
  std::vector<RunOutcomeRow> rows;
  for (const auto& p : paths) rows.push_back(row_from_trajectory(load_trajectory(p)));
  MetricsReport report = compute_metrics(rows);
  std::cout << emit_report(report, format);
  return 0;
}

int cmd_validate(const std::vector<std::string>& worlds) {
  int bad = 0;
  for (const auto& path : worlds) {
    try {
      World w = load_world(path);
      std::cout << "ok: " << path << " (" << w.screens.size() << " screens, "
                << w.success.size() << " success conditions)\n";
    } catch (const std::exception& e) {
      std::cout << "invalid: " << path << ": " << e.what() << "\n";
      ++bad;
    }
  }
  return bad ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"guipilot: verified GUI-agent control loop over simulated desktops"};
  app.require_subcommand(1);

  std::string config_path, world, script, manifest, trajectory, transcript;
  std::string id = "task", instruction, out_dir, prompts_dir, format = "table", dir;
  std::optional<int> steps;
  int parallel = 1;
  std::vector<std::string> paths;
  Ablations abl;

  auto steps_check = CLI::IsMember({15, 50, 100});

  auto* run = app.add_subcommand("run", "run one task against one world");
  run->add_option("--config", config_path, "config JSON");
  run->add_option("--world", world, "world JSON")->required();
  run->add_option("--script", script, "scripted backend responses")->required();
  run->add_option("--id", id, "task id (names the output directory)");
  run->add_option("--instruction", instruction, "task instruction")->required();
  run->add_option("--steps", steps, "step budget")->check(steps_check);
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--prompts", prompts_dir, "prompt template directory");
  add_ablation_flags(run, abl);

  auto* suite = app.add_subcommand("suite", "run every task in a manifest");
  suite->add_option("--config", config_path, "config JSON");
  suite->add_option("--manifest", manifest, "suite manifest JSON")->required();
  suite->add_option("--steps", steps, "step budget override")->check(steps_check);
  suite->add_option("--parallel", parallel, "worker threads")->check(CLI::PositiveNumber);
  suite->add_option("--format", format, "table|json")->check(CLI::IsMember({"table", "json"}));
  suite->add_option("--out", out_dir, "output directory");
  suite->add_option("--prompts", prompts_dir, "prompt template directory");
  add_ablation_flags(suite, abl);

  auto* replay = app.add_subcommand("replay", "re-run from a transcript; verify byte-identity");
  replay->add_option("--world", world, "world JSON")->required();
  replay->add_option("--trajectory", trajectory, "original trajectory")->required();
  replay->add_option("--transcript", transcript, "recorded transcript")->required();
  replay->add_option("--out", out_dir, "output directory");
  replay->add_option("--prompts", prompts_dir, "prompt template directory");

  auto* analyze = app.add_subcommand("analyze", "compute metrics over trajectories");
  analyze->add_option("--trajectory", paths, "trajectory file (repeatable)");
  analyze->add_option("--dir", dir, "scan a directory tree for trajectory.jsonl files");
  analyze->add_option("--format", format, "table|json")
      ->check(CLI::IsMember({"table", "json"}));

  auto* validate = app.add_subcommand("validate-world", "check world files load cleanly");
  validate->add_option("worlds", paths, "world JSON files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(config_path, world, script, id, instruction, steps, out_dir, prompts_dir,
                     abl);
    }
    if (suite->parsed()) {
      return cmd_suite(config_path, manifest, steps, parallel, format, out_dir, prompts_dir,
                       abl);
    }
    if (replay->parsed()) return cmd_replay(world, trajectory, transcript, out_dir, prompts_dir);
    if (analyze->parsed()) return cmd_analyze(paths, dir, format);
    if (validate->parsed()) return cmd_validate(paths);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
