#include "planexec/agents.hpp"

#include <algorithm>

namespace planexec {

const char* to_string(BehaviorKind kind) {
  switch (kind) {
    case BehaviorKind::Honest: return "honest";
    case BehaviorKind::SkipAction: return "skip";
    case BehaviorKind::OutOfOrder: return "out-of-order";
    case BehaviorKind::IgnorePrecondition: return "ignore-precondition";
    case BehaviorKind::FalseCompletion: return "false-completion";
  }
  return "honest";
}

std::optional<BehaviorKind> behavior_kind_from_string(const std::string& s) {
  if (s == "honest") return BehaviorKind::Honest;
  if (s == "skip") return BehaviorKind::SkipAction;
  if (s == "out-of-order") return BehaviorKind::OutOfOrder;
  if (s == "ignore-precondition") return BehaviorKind::IgnorePrecondition;
  if (s == "false-completion") return BehaviorKind::FalseCompletion;
  return std::nullopt;
}

namespace {

bool in_list(const std::vector<ActionId>& list, const ActionId& id) {
  return std::find(list.begin(), list.end(), id) != list.end();
}

Receipt submit_as(AgentRuntime& agent, Ledger& ledger, const std::string& target,
                  const std::string& op, std::vector<std::string> args) {
  auto tx = ledger.build_tx(agent.id, target, op, std::move(args),
                            agent.next_nonce++);
  return ledger.submit(tx);
}

bool precond_holds_locally(const WorldState& world,
                           const std::vector<Literal>& precond) {
  for (const auto& lit : precond) {
    if (world.get_val(lit.pred) != lit.positive) return false;
  }
  return true;
}

const PlanActContract* planact_of(const Ledger& ledger, const Deployment& dep,
                                  const AgentId& agent) {
  auto it = dep.planact_addrs.find(agent);
  if (it == dep.planact_addrs.end()) return nullptr;
  return dynamic_cast<const PlanActContract*>(ledger.contract_at(it->second));
}

// One-shot adversarial transaction, decentralized flavor. Returns the
// receipt when the behavior fired this tick.
std::optional<Receipt> inject_decentralized(AgentRuntime& agent, Ledger& ledger,
                                            const Deployment& dep,
                                            const Plan& plan) {
  if (agent.injected) return std::nullopt;
  const auto& behavior = agent.behavior;
  const auto* self = planact_of(ledger, dep, agent.id);
  if (self == nullptr) return std::nullopt;

  switch (behavior.kind) {
    case BehaviorKind::OutOfOrder: {
      auto in_set = plan.deps_of(behavior.target);
      const auto& done = self->local_completed();
      bool unmet = !std::includes(done.begin(), done.end(), in_set.begin(),
                                  in_set.end());
      if (!unmet) return std::nullopt;  // window closed; nothing to violate
      agent.injected = true;
      return submit_as(agent, ledger, dep.planact_addrs.at(agent.id), "execute",
                       {behavior.target});
    }
    case BehaviorKind::FalseCompletion: {
      if (in_list(ledger.completed_list(), behavior.target)) return std::nullopt;
      // Notify the host of the first dependent action, or our own contract
      // when nobody depends on the target.
      std::string target_addr = dep.planact_addrs.at(agent.id);
      auto out = plan.dependents_of(behavior.target);
      if (!out.empty()) {
        const auto* spec = plan.find_action(*out.begin());
        if (spec != nullptr) {
          auto it = dep.planact_addrs.find(spec->agent);
          if (it != dep.planact_addrs.end()) target_addr = it->second;
        }
      }
      agent.injected = true;
      return submit_as(agent, ledger, target_addr, "update", {behavior.target});
    }
    default:
      return std::nullopt;
  }
}

std::optional<Receipt> inject_centralized(AgentRuntime& agent, Ledger& ledger,
                                          const WorldState& world,
                                          const Deployment& dep,
                                          const Plan& plan) {
  if (agent.injected) return std::nullopt;
  const auto& behavior = agent.behavior;
  auto act_it = dep.act_addrs.find(agent.id);
  if (act_it == dep.act_addrs.end()) return std::nullopt;

  switch (behavior.kind) {
    case BehaviorKind::OutOfOrder: {
      auto deps = plan.deps_of(behavior.target);
      const auto& done = ledger.completed_list();
      bool unmet = std::any_of(deps.begin(), deps.end(), [&](const ActionId& d) {
        return !in_list(done, d);
      });
      if (!unmet && !deps.empty()) return std::nullopt;
      agent.injected = true;
      return submit_as(agent, ledger, act_it->second, "execute",
                       {behavior.target});
    }
    case BehaviorKind::IgnorePrecondition: {
      const auto* spec = plan.find_action(behavior.target);
      if (spec == nullptr) return std::nullopt;
      if (precond_holds_locally(world, spec->precond)) return std::nullopt;
      agent.injected = true;
      return submit_as(agent, ledger, act_it->second, "execute",
                       {behavior.target});
    }
    case BehaviorKind::FalseCompletion: {
      // Forged oracle callback claiming the work was verified.
      agent.injected = true;
      return submit_as(agent, ledger, act_it->second, "__callback",
                       {"0", "{}", "forged"});
    }
    default:
      return std::nullopt;
  }
}

}  // namespace

SchedulerResult scheduler_tick(Ledger& ledger, const Deployment& dep,
                               SchedulerRuntime& scheduler) {
  auto tx = ledger.build_tx(scheduler.id, dep.plan_addr, "dispatchStep", {},
                            scheduler.next_nonce++);
  SchedulerResult result;
  result.receipt = ledger.submit(tx);
  if (!result.receipt.accepted) {
    result.verdict = SchedulerVerdict::Aborted;
    return result;
  }
  result.verdict = SchedulerVerdict::Idle;
  for (const auto& event : result.receipt.events) {
    if (event.name == "Plan_Done") {
      result.verdict = SchedulerVerdict::Done;
    } else if (event.name == "Plan_Dispatched" && !event.args.empty()) {
      result.verdict = SchedulerVerdict::Progress;
      result.dispatched = event.args[0];
    }
  }
  return result;
}

std::vector<Receipt> agent_tick_decentralized(AgentRuntime& agent,
                                              Ledger& ledger,
                                              const WorldState& world,
                                              const Deployment& dep,
                                              const Plan& plan) {
  std::vector<Receipt> receipts;
  if (auto injected = inject_decentralized(agent, ledger, dep, plan)) {
    receipts.push_back(*injected);
  }
  if (!agent.local_plan.has_value()) return receipts;
  const auto* self = planact_of(ledger, dep, agent.id);
  if (self == nullptr) return receipts;

  for (const auto& entry : agent.local_plan->entries) {
    const ActionId& a = entry.action;
    const auto& behavior = agent.behavior;
    bool is_target = behavior.target == a;
    if (behavior.kind == BehaviorKind::SkipAction && is_target) continue;
    if (behavior.kind == BehaviorKind::FalseCompletion && is_target) continue;
    if (agent.submitted.count(a)) continue;
    if (in_list(ledger.completed_list(), a)) continue;
    if (self->attempts().count(a)) continue;

    const auto& done = self->local_completed();
    if (!std::includes(done.begin(), done.end(), entry.in_set.begin(),
                       entry.in_set.end())) {
      continue;
    }

    bool bypass_check = behavior.kind == BehaviorKind::IgnorePrecondition &&
                        is_target && !agent.injected;
    if (bypass_check) {
      agent.injected = true;
    } else if (!precond_holds_locally(world, entry.precond)) {
      continue;  // honest agents wait until getVal agrees
    }

    auto receipt = submit_as(agent, ledger, dep.planact_addrs.at(agent.id),
                             "execute", {a});
    if (receipt.accepted) agent.submitted.insert(a);
    receipts.push_back(std::move(receipt));
  }
  return receipts;
}

std::vector<Receipt> agent_tick_centralized(AgentRuntime& agent, Ledger& ledger,
                                            const WorldState& world,
                                            const Deployment& dep,
                                            const Plan& plan) {
  // Honest agents have nothing to submit here: dispatch belongs to the
  // scheduler and device work arrives through the oracle.
  std::vector<Receipt> receipts;
  if (auto injected = inject_centralized(agent, ledger, world, dep, plan)) {
    receipts.push_back(*injected);
  }
  return receipts;
}

bool device_performs(const AgentRuntime& agent, const ActionId& action) {
  return !(agent.behavior.kind == BehaviorKind::SkipAction &&
           agent.behavior.target == action);
}

}  // namespace planexec
