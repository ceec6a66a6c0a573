#include "planexec/contracts.hpp"

#include <algorithm>

#include "planexec/digest.hpp"

namespace planexec {

namespace {

std::uint64_t parse_u64(CallContext& ctx, const std::string& s) {
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    ctx.abort("bad-argument");
  }
}

ordered_json parse_json(CallContext& ctx, const std::string& s) {
  auto doc = ordered_json::parse(s, nullptr, false);
  if (doc.is_discarded()) ctx.abort("bad-argument");
  return doc;
}

// Unique predicates referenced by a literal set, in declaration order.
std::vector<PredicateId> literal_predicates(const std::vector<Literal>& lits) {
  std::vector<PredicateId> out;
  for (const auto& lit : lits) {
    if (std::find(out.begin(), out.end(), lit.pred) == out.end()) {
      out.push_back(lit.pred);
    }
  }
  return out;
}

// Literal-by-literal comparison against oracle-returned values.
bool literals_hold(const std::vector<Literal>& lits, const ordered_json& values) {
  for (const auto& lit : lits) {
    if (!values.contains(lit.pred) || !values[lit.pred].is_boolean()) return false;
    if (values[lit.pred].get<bool>() != lit.positive) return false;
  }
  return true;
}

std::uint64_t file_read_query(CallContext& ctx, const std::string& oracle_addr,
                              const std::vector<PredicateId>& preds,
                              std::int64_t not_before) {
  ordered_json q{{"kind", "read"}, {"preds", preds}, {"notBefore", not_before}};
  auto res = ctx.call(oracle_addr, "query", {q.dump()});
  return std::stoull(res.at(0));
}

std::uint64_t file_exec_query(CallContext& ctx, const std::string& oracle_addr,
                              const ActionId& action, const std::string& uri) {
  ordered_json q{{"kind", "exec"}, {"action", action}, {"uri", uri}};
  auto res = ctx.call(oracle_addr, "query", {q.dump()});
  return std::stoull(res.at(0));
}

bool in_completed(CallContext& ctx, const ActionId& id) {
  const auto& list = ctx.completed_list();
  return std::find(list.begin(), list.end(), id) != list.end();
}

ordered_json attempt_json(const std::map<ActionId, ActionAttempt>& attempts) {
  ordered_json out = ordered_json::object();
  for (const auto& [id, attempt] : attempts) {
    const char* phase = "";
    switch (attempt.phase) {
      case AttemptPhase::AwaitPrecond: phase = "await-precond"; break;
      case AttemptPhase::AwaitExec: phase = "await-exec"; break;
      case AttemptPhase::AwaitEffect: phase = "await-effect"; break;
      case AttemptPhase::Done: phase = "done"; break;
    }
    out[id] = ordered_json{{"phase", phase},
                           {"query", attempt.query},
                           {"initiator", attempt.initiator}};
  }
  return out;
}

}  // namespace

std::vector<std::string> literals_to_strings(const std::vector<Literal>& lits) {
  std::vector<std::string> out;
  out.reserve(lits.size());
  for (const auto& lit : lits) out.push_back(to_string(lit));
  return out;
}

std::vector<Literal> literals_from_json(const ordered_json& arr) {
  std::vector<Literal> out;
  for (const auto& item : arr) {
    out.push_back(parse_literal(item.get<std::string>()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// RegisterContract

RegisterContract::RegisterContract(std::string deployer)
    : deployer_(std::move(deployer)) {}

std::unique_ptr<Contract> RegisterContract::clone() const {
  return std::make_unique<RegisterContract>(*this);
}

std::vector<std::string> RegisterContract::invoke(
    CallContext& ctx, const std::string& op,
    const std::vector<std::string>& args) {
  if (op == "setAct") {
    if (ctx.caller_is_contract() || ctx.caller() != deployer_) ctx.abort("auth");
    if (args.empty()) ctx.abort("bad-argument");
    auto doc = parse_json(ctx, args[0]);
    if (!doc.contains("actions") || !doc.contains("address")) {
      ctx.abort("bad-argument");
    }
    auto address = doc["address"].get<std::string>();
    if (!ctx.contract_exists(address)) ctx.abort("no-contract");
    for (const auto& item : doc["actions"]) {
      auto id = item.get<ActionId>();
      if (map_.count(id)) ctx.abort("remap");
      map_[id] = address;
    }
    ctx.emit(kEvDeployed, {address, "new_contract_address"});
    return {};
  }
  if (op == "getAct") {
    if (args.empty()) ctx.abort("bad-argument");
    auto it = map_.find(args[0]);
    if (it == map_.end()) ctx.abort("no-mapping");
    return {it->second};
  }
  ctx.abort("bad-op");
}

ordered_json RegisterContract::state_json() const {
  ordered_json map = ordered_json::object();
  for (const auto& [id, addr] : map_) map[id] = addr;
  return ordered_json{{"deployer", deployer_}, {"map", map}};
}

// ---------------------------------------------------------------------------
// PlanContract

PlanContract::PlanContract(std::string register_addr,
                           std::vector<std::vector<ActionId>> rows)
    : register_addr_(std::move(register_addr)), rows_(std::move(rows)) {
  action_count_ = rows_.size();
  for (const auto& row : rows_) {
    if (!row.empty()) plan_actions_.insert(row.front());
  }
}

std::unique_ptr<Contract> PlanContract::clone() const {
  return std::make_unique<PlanContract>(*this);
}

void PlanContract::sync_completed(CallContext& ctx) {
  const auto& shared = ctx.completed_list();
  for (; shared_cursor_ < shared.size(); ++shared_cursor_) {
    const ActionId& id = shared[shared_cursor_];
    if (!plan_actions_.count(id)) continue;
    ++completed_len_;
    for (auto& row : rows_) {
      row.erase(std::remove(row.begin(), row.end(), id), row.end());
    }
  }
}

std::vector<std::string> PlanContract::invoke(
    CallContext& ctx, const std::string& op,
    const std::vector<std::string>& args) {
  (void)args;
  if (op == "dispatchStep") {
    sync_completed(ctx);
    if (completed_len_ == action_count_) {
      ctx.emit("Plan_Done", {});
      return {"done"};
    }
    for (const auto& row : rows_) {
      if (row.size() != 1) continue;
      const ActionId& head = row.front();
      if (dispatched_.count(head)) continue;  // in flight or dead
      auto act = ctx.call(register_addr_, "getAct", {head});
      ctx.call(act.at(0), "execute", {head});
      dispatched_.insert(head);
      ctx.emit("Plan_Dispatched", {head});
      return {"dispatched", head};
    }
    ctx.emit("Plan_Idle", {});
    return {"idle"};
  }
  ctx.abort("bad-op");
}

ordered_json PlanContract::state_json() const {
  return ordered_json{{"register", register_addr_},
                      {"rows", rows_},
                      {"actionCount", action_count_},
                      {"completedListLength", completed_len_},
                      {"dispatched", dispatched_}};
}

// ---------------------------------------------------------------------------
// ActContract

ActContract::ActContract(std::string deployer, std::string oracle_addr,
                         std::vector<std::pair<ActionId, HostedAction>> actions)
    : deployer_(std::move(deployer)), oracle_addr_(std::move(oracle_addr)) {
  for (auto& [id, action] : actions) {
    actions_.emplace(std::move(id), std::move(action));
  }
}

std::unique_ptr<Contract> ActContract::clone() const {
  return std::make_unique<ActContract>(*this);
}

std::vector<std::string> ActContract::invoke(
    CallContext& ctx, const std::string& op,
    const std::vector<std::string>& args) {
  if (op == "wire") {
    if (ctx.caller_is_contract() || ctx.caller() != deployer_) ctx.abort("auth");
    if (!dispatcher_addr_.empty()) ctx.abort("rewire");
    if (args.empty() || !ctx.contract_exists(args[0])) ctx.abort("no-contract");
    dispatcher_addr_ = args[0];
    return {};
  }
  if (op == "execute") {
    // Ordering gate: only the wired dispatcher may start an execution.
    if (dispatcher_addr_.empty() || !ctx.caller_is_contract() ||
        ctx.caller() != dispatcher_addr_) {
      ctx.abort("auth");
    }
    if (args.empty()) ctx.abort("bad-argument");
    const ActionId& id = args[0];
    auto action = actions_.find(id);
    if (action == actions_.end()) ctx.abort("unknown-action");
    if (in_completed(ctx, id) || attempts_.count(id)) ctx.abort("duplicate");
    auto qid = file_read_query(ctx, oracle_addr_,
                               literal_predicates(action->second.precond), 0);
    attempts_[id] = ActionAttempt{AttemptPhase::AwaitPrecond, qid, ctx.tx_sender()};
    query_action_[qid] = id;
    ctx.emit("oracle_query", {std::to_string(qid), "precond", id});
    return {};
  }
  if (op == "__callback") {
    handle_callback(ctx, args);
    return {};
  }
  if (op == "getCompletedList") {
    return {ordered_json(ctx.completed_list()).dump()};
  }
  ctx.abort("bad-op");
}

void ActContract::handle_callback(CallContext& ctx,
                                  const std::vector<std::string>& args) {
  if (!ctx.caller_is_contract() || ctx.caller() != oracle_addr_) {
    ctx.abort("auth");  // only the oracle may deliver callbacks
  }
  if (args.size() < 2) ctx.abort("bad-argument");
  auto qid = parse_u64(ctx, args[0]);
  auto lookup = query_action_.find(qid);
  if (lookup == query_action_.end()) ctx.abort("unknown-query");
  const ActionId id = lookup->second;
  auto& attempt = attempts_.at(id);
  if (attempt.query != qid) ctx.abort("unknown-query");
  const auto& action = actions_.at(id);
  auto payload = parse_json(ctx, args[1]);

  switch (attempt.phase) {
    case AttemptPhase::AwaitPrecond: {
      if (!literals_hold(action.precond, payload)) {
        ctx.emit(kEvRollback, {id, "precond", attempt.initiator});
        ctx.abort("precond");
      }
      auto qid2 = file_exec_query(ctx, oracle_addr_, id, action.uri);
      attempt.phase = AttemptPhase::AwaitExec;
      attempt.query = qid2;
      query_action_[qid2] = id;
      ctx.emit("oracle_query", {std::to_string(qid2), "execute", id});
      break;
    }
    case AttemptPhase::AwaitExec: {
      // The device's own claim is not trusted; the effect read decides.
      std::int64_t ready = payload.value("stepCompleted", std::int64_t{0});
      auto qid3 = file_read_query(ctx, oracle_addr_,
                                  literal_predicates(action.effect), ready);
      attempt.phase = AttemptPhase::AwaitEffect;
      attempt.query = qid3;
      query_action_[qid3] = id;
      ctx.emit("oracle_query", {std::to_string(qid3), "effect", id});
      break;
    }
    case AttemptPhase::AwaitEffect: {
      if (!literals_hold(action.effect, payload)) {
        ctx.emit(kEvRollback, {id, "effect", attempt.initiator});
        ctx.abort("effect");
      }
      ctx.append_completed(id);
      attempt.phase = AttemptPhase::Done;
      ctx.emit(kEvCompleted, {id});
      ctx.emit(kEvListUpdated,
               {id, std::to_string(ctx.completed_list().size())});
      break;
    }
    case AttemptPhase::Done:
      ctx.abort("unknown-query");
  }
}

ordered_json ActContract::state_json() const {
  ordered_json actions = ordered_json::object();
  for (const auto& [id, action] : actions_) {
    actions[id] = ordered_json{{"uri", action.uri},
                               {"precond", literals_to_strings(action.precond)},
                               {"effect", literals_to_strings(action.effect)}};
  }
  return ordered_json{{"deployer", deployer_},
                      {"oracle", oracle_addr_},
                      {"dispatcher", dispatcher_addr_},
                      {"actions", actions},
                      {"attempts", attempt_json(attempts_)}};
}

// ---------------------------------------------------------------------------
// OracleContract

OracleContract::OracleContract(std::string trusted_responder)
    : trusted_responder_(std::move(trusted_responder)) {}

std::unique_ptr<Contract> OracleContract::clone() const {
  return std::make_unique<OracleContract>(*this);
}

std::string OracleContract::authenticity_tag(const std::string& query_id,
                                             const std::string& payload) {
  return sha256_hex("oracle-proof:" + query_id + ":" + payload);
}

std::vector<std::string> OracleContract::invoke(
    CallContext& ctx, const std::string& op,
    const std::vector<std::string>& args) {
  if (op == "query") {
    if (!ctx.caller_is_contract()) ctx.abort("requester");
    if (args.empty()) ctx.abort("bad-argument");
    auto doc = parse_json(ctx, args[0]);
    PendingQuery q;
    q.requester = ctx.caller();
    q.kind = doc.value("kind", "");
    if (q.kind != "read" && q.kind != "exec") ctx.abort("bad-argument");
    if (q.kind == "read") {
      for (const auto& p : doc.value("preds", ordered_json::array())) {
        q.predicates.push_back(p.get<std::string>());
      }
      q.not_before = doc.value("notBefore", std::int64_t{0});
    } else {
      q.action = doc.value("action", "");
      q.uri = doc.value("uri", "");
      if (q.action.empty()) ctx.abort("bad-argument");
    }
    std::uint64_t qid = next_query_++;
    pending_[qid] = std::move(q);
    return {std::to_string(qid)};
  }
  if (op == "callback") {
    // Callbacks arrive as top-level transactions signed by the responder.
    if (ctx.caller_is_contract() || ctx.tx_sender() != trusted_responder_) {
      ctx.abort("auth");
    }
    if (args.size() < 3) ctx.abort("bad-argument");
    auto qid = parse_u64(ctx, args[0]);
    auto it = pending_.find(qid);
    if (it == pending_.end()) ctx.abort("unknown-query");
    if (it->second.consumed) ctx.abort("consumed");
    if (args[2] != authenticity_tag(args[0], args[1])) ctx.abort("bad-proof");
    it->second.consumed = true;
    ctx.emit("oracle_response", {args[0], args[2]});
    ctx.call(it->second.requester, "__callback", {args[0], args[1], args[2]});
    return {};
  }
  ctx.abort("bad-op");
}

ordered_json OracleContract::state_json() const {
  ordered_json pending = ordered_json::object();
  for (const auto& [qid, q] : pending_) {
    pending[std::to_string(qid)] =
        ordered_json{{"requester", q.requester}, {"kind", q.kind},
                     {"preds", q.predicates},    {"action", q.action},
                     {"notBefore", q.not_before}, {"consumed", q.consumed}};
  }
  return ordered_json{{"trustedResponder", trusted_responder_},
                      {"nextQuery", next_query_},
                      {"pending", pending}};
}

// ---------------------------------------------------------------------------
// PlanActContract

PlanActContract::PlanActContract(
    std::string deployer, std::string oracle_addr, AgentId owner,
    std::vector<std::pair<ActionId, LocalEntryState>> entries)
    : deployer_(std::move(deployer)),
      oracle_addr_(std::move(oracle_addr)),
      owner_(std::move(owner)) {
  for (auto& [id, entry] : entries) {
    entries_.emplace(std::move(id), std::move(entry));
  }
}

std::unique_ptr<Contract> PlanActContract::clone() const {
  return std::make_unique<PlanActContract>(*this);
}

std::vector<std::string> PlanActContract::invoke(
    CallContext& ctx, const std::string& op,
    const std::vector<std::string>& args) {
  if (op == "wire") {
    if (ctx.caller_is_contract() || ctx.caller() != deployer_) ctx.abort("auth");
    if (!register_addr_.empty()) ctx.abort("rewire");
    if (args.empty() || !ctx.contract_exists(args[0])) ctx.abort("no-contract");
    register_addr_ = args[0];
    return {};
  }
  if (op == "execute") {
    // Executions are initiated by the owning agent, in its own name.
    if (ctx.caller_is_contract() || ctx.tx_sender() != owner_) ctx.abort("auth");
    if (args.empty()) ctx.abort("bad-argument");
    const ActionId& id = args[0];
    auto entry = entries_.find(id);
    if (entry == entries_.end()) ctx.abort("unknown-action");
    if (in_completed(ctx, id) || attempts_.count(id)) ctx.abort("duplicate");
    if (!std::includes(local_completed_.begin(), local_completed_.end(),
                       entry->second.in_set.begin(), entry->second.in_set.end())) {
      ctx.emit(kEvRollback, {id, "inset", ctx.tx_sender()});
      ctx.abort("inset");
    }
    auto qid = file_read_query(ctx, oracle_addr_,
                               literal_predicates(entry->second.precond), 0);
    attempts_[id] = ActionAttempt{AttemptPhase::AwaitPrecond, qid, ctx.tx_sender()};
    query_action_[qid] = id;
    ctx.emit("oracle_query", {std::to_string(qid), "precond", id});
    return {};
  }
  if (op == "__callback") {
    handle_callback(ctx, args);
    return {};
  }
  if (op == "update") {
    handle_update(ctx, args);
    return {};
  }
  if (op == "getOwner") {
    return {owner_};
  }
  if (op == "getCompletedList") {
    return {ordered_json(local_completed_).dump()};
  }
  ctx.abort("bad-op");
}

void PlanActContract::handle_callback(CallContext& ctx,
                                      const std::vector<std::string>& args) {
  if (!ctx.caller_is_contract() || ctx.caller() != oracle_addr_) {
    ctx.abort("auth");
  }
  if (args.size() < 2) ctx.abort("bad-argument");
  auto qid = parse_u64(ctx, args[0]);
  auto lookup = query_action_.find(qid);
  if (lookup == query_action_.end()) ctx.abort("unknown-query");
  const ActionId id = lookup->second;
  auto& attempt = attempts_.at(id);
  if (attempt.query != qid) ctx.abort("unknown-query");
  const auto& entry = entries_.at(id);
  auto payload = parse_json(ctx, args[1]);

  switch (attempt.phase) {
    case AttemptPhase::AwaitPrecond: {
      if (!literals_hold(entry.precond, payload)) {
        ctx.emit(kEvRollback, {id, "precond", attempt.initiator});
        ctx.abort("precond");
      }
      auto qid2 = file_exec_query(ctx, oracle_addr_, id, entry.uri);
      attempt.phase = AttemptPhase::AwaitExec;
      attempt.query = qid2;
      query_action_[qid2] = id;
      ctx.emit("oracle_query", {std::to_string(qid2), "execute", id});
      break;
    }
    case AttemptPhase::AwaitExec: {
      std::int64_t ready = payload.value("stepCompleted", std::int64_t{0});
      auto qid3 = file_read_query(ctx, oracle_addr_,
                                  literal_predicates(entry.effect), ready);
      attempt.phase = AttemptPhase::AwaitEffect;
      attempt.query = qid3;
      query_action_[qid3] = id;
      ctx.emit("oracle_query", {std::to_string(qid3), "effect", id});
      break;
    }
    case AttemptPhase::AwaitEffect: {
      if (!literals_hold(entry.effect, payload)) {
        ctx.emit(kEvRollback, {id, "effect", attempt.initiator});
        ctx.abort("effect");
      }
      ctx.append_completed(id);
      attempt.phase = AttemptPhase::Done;
      local_completed_.insert(id);
      ctx.emit(kEvCompleted, {id});
      ctx.emit(kEvListUpdated,
               {id, std::to_string(ctx.completed_list().size())});
      if (register_addr_.empty()) ctx.abort("not-wired");
      // Push the completion to the hosts of Out(a); their caches unlock
      // the dependent actions.
      for (const auto& out_action : entry.out_set) {
        auto host = ctx.call(register_addr_, "getAct", {out_action});
        if (host.at(0) == ctx.self()) continue;
        ctx.call(host.at(0), "update", {id});
      }
      break;
    }
    case AttemptPhase::Done:
      ctx.abort("unknown-query");
  }
}

void PlanActContract::handle_update(CallContext& ctx,
                                    const std::vector<std::string>& args) {
  if (args.empty()) ctx.abort("bad-argument");
  const ActionId& id = args[0];
  if (register_addr_.empty()) ctx.abort("not-wired");
  auto host = ctx.call(register_addr_, "getAct", {id});
  if (ctx.caller_is_contract()) {
    if (ctx.caller() != host.at(0)) ctx.abort("auth");
  } else {
    auto owner = ctx.call(host.at(0), "getOwner", {});
    if (owner.at(0) != ctx.tx_sender()) ctx.abort("auth");
  }
  // Completion claims must be backed by the chain record.
  if (!in_completed(ctx, id)) {
    ctx.emit(kEvRollback, {id, "false-completion", ctx.tx_sender()});
    ctx.abort("false-completion");
  }
  local_completed_.insert(id);
}

ordered_json PlanActContract::state_json() const {
  ordered_json entries = ordered_json::object();
  for (const auto& [id, entry] : entries_) {
    entries[id] = ordered_json{{"in", entry.in_set},
                               {"precond", literals_to_strings(entry.precond)},
                               {"effect", literals_to_strings(entry.effect)},
                               {"out", entry.out_set},
                               {"uri", entry.uri}};
  }
  return ordered_json{{"deployer", deployer_},
                      {"oracle", oracle_addr_},
                      {"register", register_addr_},
                      {"owner", owner_},
                      {"entries", entries},
                      {"localCompleted", local_completed_},
                      {"attempts", attempt_json(attempts_)}};
}

// ---------------------------------------------------------------------------

std::vector<std::vector<ActionId>> plan_rows(const Plan& plan) {
  std::vector<std::vector<ActionId>> rows;
  rows.reserve(plan.actions.size());
  for (const auto& a : plan.actions) {
    std::vector<ActionId> row{a.id};
    for (const auto& b : plan.actions) {
      auto edge = std::make_pair(b.id, a.id);
      if (std::find(plan.deps.begin(), plan.deps.end(), edge) != plan.deps.end()) {
        row.push_back(b.id);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void install_contract_kinds(Ledger& ledger) {
  ledger.register_contract_kind(
      "register", [](const std::string& deployer, const ordered_json&) {
        return std::make_unique<RegisterContract>(deployer);
      });
  ledger.register_contract_kind(
      "oracle", [](const std::string&, const ordered_json& args)
                    -> std::unique_ptr<Contract> {
        if (!args.contains("trustedResponder")) throw ContractAbort("bad-deploy");
        return std::make_unique<OracleContract>(
            args["trustedResponder"].get<std::string>());
      });
  ledger.register_contract_kind(
      "plan", [](const std::string&, const ordered_json& args)
                  -> std::unique_ptr<Contract> {
        try {
          std::vector<std::vector<ActionId>> rows;
          for (const auto& row : args.at("rows")) {
            rows.push_back(row.get<std::vector<ActionId>>());
          }
          return std::make_unique<PlanContract>(
              args.at("register").get<std::string>(), std::move(rows));
        } catch (const nlohmann::json::exception&) {
          throw ContractAbort("bad-deploy");
        }
      });
  ledger.register_contract_kind(
      "act", [](const std::string& deployer, const ordered_json& args)
                 -> std::unique_ptr<Contract> {
        try {
          std::vector<std::pair<ActionId, HostedAction>> actions;
          for (const auto& item : args.at("actions")) {
            HostedAction a;
            a.uri = item.value("uri", "");
            a.precond = literals_from_json(item.value("precond", ordered_json::array()));
            a.effect = literals_from_json(item.value("effect", ordered_json::array()));
            actions.emplace_back(item.at("id").get<ActionId>(), std::move(a));
          }
          return std::make_unique<ActContract>(
              deployer, args.at("oracle").get<std::string>(), std::move(actions));
        } catch (const nlohmann::json::exception&) {
          throw ContractAbort("bad-deploy");
        } catch (const plan_error&) {
          throw ContractAbort("bad-deploy");
        }
      });
  ledger.register_contract_kind(
      "planact", [](const std::string& deployer, const ordered_json& args)
                     -> std::unique_ptr<Contract> {
        try {
          std::vector<std::pair<ActionId, LocalEntryState>> entries;
          for (const auto& item : args.at("entries")) {
            LocalEntryState e;
            e.in_set = item.value("in", std::set<ActionId>{});
            e.out_set = item.value("out", std::set<ActionId>{});
            e.precond = literals_from_json(item.value("precond", ordered_json::array()));
            e.effect = literals_from_json(item.value("effect", ordered_json::array()));
            e.uri = item.value("uri", "");
            entries.emplace_back(item.at("action").get<ActionId>(), std::move(e));
          }
          return std::make_unique<PlanActContract>(
              deployer, args.at("oracle").get<std::string>(),
              args.at("owner").get<AgentId>(), std::move(entries));
        } catch (const nlohmann::json::exception&) {
          throw ContractAbort("bad-deploy");
        } catch (const plan_error&) {
          throw ContractAbort("bad-deploy");
        }
      });
}

}  // namespace planexec
