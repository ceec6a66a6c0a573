#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "planexec/ledger.hpp"
#include "planexec/plan.hpp"

namespace planexec {

// Event names shared by the contract machines.
inline constexpr const char* kEvDeployed = "logDeployedContract";
inline constexpr const char* kEvCompleted = "Action_Completed";
inline constexpr const char* kEvRollback = "Transaction_Rollback";
inline constexpr const char* kEvListUpdated = "completed_list_updated";

// Maps action ids to the contract hosting them. setAct is deployer-only and
// refuses to remap an id: silent overwrite would let dispatch be hijacked.
class RegisterContract : public Contract {
 public:
  explicit RegisterContract(std::string deployer);

  std::string kind() const override { return "register"; }
  std::unique_ptr<Contract> clone() const override;
  std::vector<std::string> invoke(CallContext& ctx, const std::string& op,
                                  const std::vector<std::string>& args) override;
  ordered_json state_json() const override;

  const std::map<ActionId, std::string>& mapping() const { return map_; }

 private:
  std::string deployer_;
  std::map<ActionId, std::string> map_;
};

// Scheduler contract. Holds the dependency structure as a list of lists
// (row head = action, tail = unmet dependencies) and dispatches the first
// row that became a singleton, in row order. One dispatch per step; the
// surrounding run drives it with repeated dispatchStep transactions.
class PlanContract : public Contract {
 public:
  PlanContract(std::string register_addr, std::vector<std::vector<ActionId>> rows);

  std::string kind() const override { return "plan"; }
  std::unique_ptr<Contract> clone() const override;
  std::vector<std::string> invoke(CallContext& ctx, const std::string& op,
                                  const std::vector<std::string>& args) override;
  ordered_json state_json() const override;

  const std::vector<std::vector<ActionId>>& rows() const { return rows_; }
  std::uint64_t completed_length() const { return completed_len_; }

 private:
  void sync_completed(CallContext& ctx);

  std::string register_addr_;
  std::vector<std::vector<ActionId>> rows_;
  std::set<ActionId> plan_actions_;
  std::uint64_t action_count_ = 0;
  std::uint64_t completed_len_ = 0;
  std::size_t shared_cursor_ = 0;
  std::set<ActionId> dispatched_;  // never dispatch an action twice
};

enum class AttemptPhase { AwaitPrecond, AwaitExec, AwaitEffect, Done };

struct ActionAttempt {
  AttemptPhase phase = AttemptPhase::AwaitPrecond;
  std::uint64_t query = 0;
  std::string initiator;  // identity that signed the initiating transaction
};

struct HostedAction {
  std::string uri;
  std::vector<Literal> precond;
  std::vector<Literal> effect;
};

// Per-agent action contract for centralized runs. execute() is restricted to
// the wired dispatcher; preconditions and effects are verified through
// oracle reads at distinct ledger steps, and only a verified effect appends
// the action to the shared completed list.
class ActContract : public Contract {
 public:
  ActContract(std::string deployer, std::string oracle_addr,
              std::vector<std::pair<ActionId, HostedAction>> actions);

  std::string kind() const override { return "act"; }
  std::unique_ptr<Contract> clone() const override;
  std::vector<std::string> invoke(CallContext& ctx, const std::string& op,
                                  const std::vector<std::string>& args) override;
  ordered_json state_json() const override;

  const std::map<ActionId, ActionAttempt>& attempts() const { return attempts_; }

 private:
  void handle_callback(CallContext& ctx, const std::vector<std::string>& args);

  std::string deployer_;
  std::string oracle_addr_;
  std::string dispatcher_addr_;  // wired after deployment
  std::map<ActionId, HostedAction> actions_;
  std::map<ActionId, ActionAttempt> attempts_;
  std::map<std::uint64_t, ActionId> query_action_;
};

struct PendingQuery {
  std::string requester;
  std::string kind;  // "read" | "exec"
  std::vector<PredicateId> predicates;
  ActionId action;
  std::string uri;
  std::int64_t not_before = 0;
  bool consumed = false;
};

// Oracle bridge: contracts file queries; the off-chain responder answers via
// callback transactions. A callback is accepted only from the trusted
// responder identity, carries an authenticity tag, and consumes its query id
// exactly once.
class OracleContract : public Contract {
 public:
  explicit OracleContract(std::string trusted_responder);

  std::string kind() const override { return "oracle"; }
  std::unique_ptr<Contract> clone() const override;
  std::vector<std::string> invoke(CallContext& ctx, const std::string& op,
                                  const std::vector<std::string>& args) override;
  ordered_json state_json() const override;

  const std::map<std::uint64_t, PendingQuery>& pending() const { return pending_; }
  const std::string& trusted_responder() const { return trusted_responder_; }

  static std::string authenticity_tag(const std::string& query_id,
                                      const std::string& payload);

 private:
  std::string trusted_responder_;
  std::uint64_t next_query_ = 1;
  std::map<std::uint64_t, PendingQuery> pending_;
};

struct LocalEntryState {
  std::set<ActionId> in_set;
  std::vector<Literal> precond;
  std::vector<Literal> effect;
  std::set<ActionId> out_set;
  std::string uri;
};

// Combined plan+act contract for decentralized runs, one instance per agent.
// execute() is owner-initiated and gated on In(a) against the local completed
// cache; completions are appended to the shared list and pushed to the
// hosting contracts of Out(a). update() accepts a completion claim only if it
// is already recorded on the chain.
class PlanActContract : public Contract {
 public:
  PlanActContract(std::string deployer, std::string oracle_addr,
                  AgentId owner,
                  std::vector<std::pair<ActionId, LocalEntryState>> entries);

  std::string kind() const override { return "planact"; }
  std::unique_ptr<Contract> clone() const override;
  std::vector<std::string> invoke(CallContext& ctx, const std::string& op,
                                  const std::vector<std::string>& args) override;
  ordered_json state_json() const override;

  const std::set<ActionId>& local_completed() const { return local_completed_; }
  const std::map<ActionId, ActionAttempt>& attempts() const { return attempts_; }
  const AgentId& owner() const { return owner_; }

 private:
  void handle_callback(CallContext& ctx, const std::vector<std::string>& args);
  void handle_update(CallContext& ctx, const std::vector<std::string>& args);

  std::string deployer_;
  std::string oracle_addr_;
  std::string register_addr_;  // wired after deployment
  AgentId owner_;
  std::map<ActionId, LocalEntryState> entries_;
  std::set<ActionId> local_completed_;
  std::map<ActionId, ActionAttempt> attempts_;
  std::map<std::uint64_t, ActionId> query_action_;
};

// Registers the factories for the five contract kinds with a ledger.
void install_contract_kinds(Ledger& ledger);

// Builds the list-of-lists dependency rows for PlanContract: one row per
// action in declaration order, [a, dep(a)... in declaration order].
std::vector<std::vector<ActionId>> plan_rows(const Plan& plan);

std::vector<std::string> literals_to_strings(const std::vector<Literal>& lits);
std::vector<Literal> literals_from_json(const ordered_json& arr);

}  // namespace planexec
