#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "planexec/agents.hpp"
#include "planexec/ledger.hpp"
#include "planexec/plan.hpp"
#include "planexec/world.hpp"

namespace planexec {

struct ScenarioConfig {
  Mode mode = Mode::Centralized;
  std::map<AgentId, AgentBehavior> behaviors;  // unlisted agents are honest
  std::uint64_t seed = 0;
  std::int64_t stall_timeout_ticks = 0;  // 0 -> default 10 * |actions|
  bool abort_on_violation = true;
};

struct Scenario {
  ScenarioConfig config;
  Plan plan;
  FaultScript faults;
};

enum class Terminal { Done, Stalled, Aborted };
const char* to_string(Terminal t);
const char* to_string(Mode m);

struct Violation {
  AgentId agent;
  std::string kind;      // e.g. "false-completion", "out-of-order", "stall"
  std::string evidence;  // "receipt:<seq>" or "stall:<action>"
};

// A failed action attempt not attributable to any agent (device fault or an
// unsatisfiable precondition hit by the dispatcher itself).
struct DeviceFault {
  ActionId action;
  std::string phase;  // "precond" | "effect"
  std::uint64_t receipt_seq = 0;
};

struct StallInfo {
  std::vector<ActionId> roots;    // incomplete actions whose deps are met
  std::vector<ActionId> blocked;  // incomplete actions waiting on a root
  std::vector<AgentId> responsible;
};

struct RunReport {
  Mode mode = Mode::Centralized;
  std::uint64_t seed = 0;
  Terminal terminal = Terminal::Done;
  bool goal_satisfied = false;
  bool chain_valid = false;
  Trace trace;  // completion order
  std::vector<ActionId> completed;
  std::size_t total_actions = 0;
  std::vector<Violation> violations;
  std::vector<DeviceFault> device_faults;
  std::optional<StallInfo> stall;
  std::map<PredicateId, bool> final_world;
  std::int64_t ticks = 0;
  std::uint64_t blocks = 0;
  std::uint64_t receipt_count = 0;

  // Full audit material for export and offline verification.
  std::vector<Receipt> audit;
  std::vector<Block> chain;
};

// Loads and fully validates a scenario file; collects every problem into one
// scenario_error instead of stopping at the first.
Scenario load_scenario(const std::string& path);
Scenario load_scenario_json(const ordered_json& doc, const std::string& base_dir);

RunReport run_scenario(const Scenario& scenario);

std::string emit_report_text(const RunReport& report);
std::string emit_report_jsonl(const RunReport& report);

// Line-delimited audit log: one meta record, one record per sealed block,
// one record per receipt (fields: seq, block, sender, target, op, status,
// events, in that order).
std::string export_audit_log(const Scenario& scenario, const RunReport& report);

struct AuditVerification {
  bool chain_ok = false;
  bool order_ok = false;
  std::vector<std::string> problems;
  bool ok() const { return chain_ok && order_ok && problems.empty(); }
};

AuditVerification verify_audit_log(const std::string& text);

// Well-formed honest scenario: random DAG, one fresh predicate per action,
// preconditions drawn from ancestors' effects, goal = all effects.
Scenario gen_random_scenario(std::size_t n_actions, std::size_t n_agents,
                             std::uint64_t seed);

ordered_json plan_to_json(const Plan& plan);
ordered_json scenario_to_json(const Scenario& scenario);

}  // namespace planexec
