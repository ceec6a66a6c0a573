#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "planexec/harness.hpp"

namespace {

using namespace planexec;

int cmd_run(const std::string& scenario_path, const std::string& mode_override,
            std::optional<std::uint64_t> seed_override,
            const std::string& report_format, const std::string& audit_path,
            bool expect_violation) {
  Scenario scenario = load_scenario(scenario_path);
  if (mode_override == "centralized") {
    scenario.config.mode = Mode::Centralized;
  } else if (mode_override == "decentralized") {
    scenario.config.mode = Mode::Decentralized;
  } else if (!mode_override.empty()) {
    std::cerr << "unknown mode: " << mode_override << "\n";
    return 1;
  }
  if (seed_override) scenario.config.seed = *seed_override;

  RunReport report = run_scenario(scenario);
  if (report_format == "json-lines") {
    std::cout << emit_report_jsonl(report);
  } else {
    std::cout << emit_report_text(report);
  }
  if (!audit_path.empty()) {
    std::ofstream out(audit_path);
    if (!out) {
      std::cerr << "cannot write audit log: " << audit_path << "\n";
      return 1;
    }
    out << export_audit_log(scenario, report);
  }

  bool clean = report.terminal == Terminal::Done && report.violations.empty();
  if (expect_violation) return report.violations.empty() ? 2 : 0;
  return clean ? 0 : 2;
}

int cmd_verify(const std::string& audit_path) {
  std::ifstream in(audit_path);
  if (!in) {
    std::cerr << "cannot open audit log: " << audit_path << "\n";
    return 1;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  AuditVerification result = verify_audit_log(buf.str());
  std::cout << "chain: " << (result.chain_ok ? "ok" : "INVALID") << "\n";
  std::cout << "ordering: " << (result.order_ok ? "ok" : "INVALID") << "\n";
  for (const auto& p : result.problems) {
    std::cout << "problem: " << p << "\n";
  }
  return result.ok() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ledger-mediated multi-agent plan execution simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string mode_override;
  std::optional<std::uint64_t> seed_override;
  std::string report_format = "text";
  std::string audit_path;
  bool expect_violation = false;

  auto* run = app.add_subcommand("run", "Execute a scenario");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--mode", mode_override, "centralized|decentralized");
  run->add_option("--seed", seed_override, "override the scenario seed");
  run->add_option("--report", report_format, "text|json-lines")
      ->check(CLI::IsMember({"text", "json-lines"}));
  run->add_option("--audit-log", audit_path, "write the audit log to this path");
  run->add_flag("--expect-violation", expect_violation,
                "exit 0 iff violations were detected");

  std::string verify_path;
  auto* verify = app.add_subcommand("verify", "Re-check an exported audit log");
  verify->add_option("audit-log", verify_path, "audit log file")->required();

  std::size_t gen_actions = 6;
  std::size_t gen_agents = 3;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("gen-random", "Emit a random honest scenario");
  gen->add_option("--actions", gen_actions, "number of actions");
  gen->add_option("--agents", gen_agents, "number of agents");
  gen->add_option("--seed", gen_seed, "generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(scenario_path, mode_override, seed_override, report_format,
                     audit_path, expect_violation);
    }
    if (verify->parsed()) {
      return cmd_verify(verify_path);
    }
    if (gen->parsed()) {
      planexec::Scenario scenario =
          planexec::gen_random_scenario(gen_actions, gen_agents, gen_seed);
      std::cout << planexec::scenario_to_json(scenario).dump(2) << "\n";
      return 0;
    }
  } catch (const planexec::scenario_error& e) {
    for (const auto& p : e.problems()) std::cerr << "error: " << p << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
