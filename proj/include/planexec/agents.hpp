#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "planexec/contracts.hpp"
#include "planexec/ledger.hpp"
#include "planexec/plan.hpp"
#include "planexec/world.hpp"

namespace planexec {

enum class Mode { Centralized, Decentralized };

enum class BehaviorKind {
  Honest,
  SkipAction,          // never executes the target action
  OutOfOrder,          // submits execute before In(target) is fulfilled
  IgnorePrecondition,  // submits execute without the local getVal check
  FalseCompletion,     // claims completion with no on-chain record
};

struct AgentBehavior {
  BehaviorKind kind = BehaviorKind::Honest;
  ActionId target;  // meaningful for every kind except Honest
};

const char* to_string(BehaviorKind kind);
std::optional<BehaviorKind> behavior_kind_from_string(const std::string& s);

// Addresses of the deployed contract topology for one run.
struct Deployment {
  Mode mode = Mode::Centralized;
  std::string oracle_addr;
  std::string register_addr;
  std::string plan_addr;                        // centralized only
  std::map<AgentId, std::string> act_addrs;     // centralized only
  std::map<AgentId, std::string> planact_addrs; // decentralized only
};

// One agent process: an identity, a scripted behavior, and (decentralized)
// its local plan. Agents submit transactions only under their own identity.
struct AgentRuntime {
  AgentId id;
  AgentBehavior behavior;
  std::optional<LocalPlan> local_plan;
  std::uint64_t next_nonce = 0;
  std::set<ActionId> submitted;  // own executes already accepted
  bool injected = false;         // one-shot adversarial tx already sent
};

enum class SchedulerVerdict { Progress, Idle, Done, Aborted };

struct SchedulerResult {
  SchedulerVerdict verdict = SchedulerVerdict::Idle;
  std::optional<ActionId> dispatched;
  Receipt receipt;
};

struct SchedulerRuntime {
  std::string id = "scheduler";
  std::uint64_t next_nonce = 0;
};

// Submits one dispatchStep transaction and maps the receipt to a verdict.
SchedulerResult scheduler_tick(Ledger& ledger, const Deployment& dep,
                               SchedulerRuntime& scheduler);

// Honest work plus behavior deviations for one agent in one tick. Returns
// the receipts of every transaction the agent submitted.
std::vector<Receipt> agent_tick_decentralized(AgentRuntime& agent,
                                              Ledger& ledger,
                                              const WorldState& world,
                                              const Deployment& dep,
                                              const Plan& plan);
std::vector<Receipt> agent_tick_centralized(AgentRuntime& agent,
                                            Ledger& ledger,
                                            const WorldState& world,
                                            const Deployment& dep,
                                            const Plan& plan);

// Whether the agent's device performs an execution request for `action`.
// SkipAction agents refuse their target forever; everyone else complies.
bool device_performs(const AgentRuntime& agent, const ActionId& action);

}  // namespace planexec
