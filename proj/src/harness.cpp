#include "planexec/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "planexec/contracts.hpp"
#include "planexec/digest.hpp"

namespace planexec {

namespace {

constexpr const char* kDeployerId = "deployer";
constexpr const char* kOracleId = "oracle";

std::string read_file(const std::string& path, std::vector<std::string>& problems) {
  std::ifstream in(path);
  if (!in) {
    problems.push_back("cannot open file: " + path);
    return {};
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string device_uri(const AgentId& agent, const ActionId& action) {
  return "device://" + agent + "/" + action;
}

// Deterministic Fisher-Yates; std::shuffle's draw sequence is
// implementation-defined, which would break cross-platform replay.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::mt19937_64& eng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = eng() % i;
    std::swap(items[i - 1], items[j]);
  }
}

std::string violation_kind(const std::string& reject_reason) {
  if (reject_reason == "inset") return "out-of-order";
  if (reject_reason == "false-completion") return "false-completion";
  if (reject_reason == "auth") return "unauthorized-call";
  if (reject_reason == "nonce") return "bad-nonce";
  return "invalid-call";
}

}  // namespace

scenario_error::scenario_error(std::vector<std::string> problems)
    : error([&problems] {
        std::string msg = "scenario has problems:";
        for (const auto& p : problems) msg += "\n  " + p;
        return msg;
      }()),
      problems_(std::move(problems)) {}

const char* to_string(Terminal t) {
  switch (t) {
    case Terminal::Done: return "done";
    case Terminal::Stalled: return "stalled";
    case Terminal::Aborted: return "aborted";
  }
  return "done";
}

const char* to_string(Mode m) {
  return m == Mode::Centralized ? "centralized" : "decentralized";
}

// ---------------------------------------------------------------------------
// Scenario loading

namespace {

FaultScript parse_fault_script(const ordered_json& doc, const Plan& plan,
                               std::vector<std::string>& problems) {
  FaultScript script;
  if (!doc.is_object()) {
    problems.push_back("fault script is not an object");
    return script;
  }
  for (const auto& [action_id, spec] : doc.items()) {
    const ActionSpec* action = plan.find_action(action_id);
    if (action == nullptr) {
      problems.push_back("fault script references unknown action: " + action_id);
      continue;
    }
    if (!spec.is_object() || !spec.contains("kind") || !spec["kind"].is_string()) {
      problems.push_back("fault script entry for " + action_id + " has no kind");
      continue;
    }
    OutcomeScript out;
    auto kind = spec["kind"].get<std::string>();
    if (kind == "nominal") {
      out.kind = OutcomeScript::Kind::Nominal;
    } else if (kind == "fail") {
      out.kind = OutcomeScript::Kind::FailNoEffect;
    } else if (kind == "partial") {
      out.kind = OutcomeScript::Kind::PartialEffect;
      try {
        out.partial_effects =
            literals_from_json(spec.value("effects", ordered_json::array()));
      } catch (const std::exception& e) {
        problems.push_back("fault script entry for " + action_id + ": " + e.what());
        continue;
      }
      for (const auto& lit : out.partial_effects) {
        if (std::find(action->effect.begin(), action->effect.end(), lit) ==
            action->effect.end()) {
          problems.push_back("fault script for " + action_id +
                             ": partial effect " + to_string(lit) +
                             " is not part of the action's effect");
        }
      }
    } else if (kind == "delay") {
      out.kind = OutcomeScript::Kind::DelaySteps;
      out.delay_steps = spec.value("steps", std::int64_t{-1});
      if (out.delay_steps < 0) {
        problems.push_back("fault script for " + action_id +
                           ": delay needs steps >= 0");
      }
    } else {
      problems.push_back("fault script for " + action_id + ": unknown kind '" +
                         kind + "'");
      continue;
    }
    script[action_id] = std::move(out);
  }
  return script;
}

}  // namespace

Scenario load_scenario_json(const ordered_json& doc, const std::string& base_dir) {
  std::vector<std::string> problems;
  Scenario scenario;

  if (!doc.is_object()) {
    throw scenario_error({"scenario document is not an object"});
  }

  auto resolve = [&](const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (std::filesystem::path(base_dir) / p).string();
  };

  bool plan_loaded = false;
  if (doc.contains("plan")) {
    try {
      scenario.plan = parse_plan(doc["plan"].dump());
      plan_loaded = true;
    } catch (const plan_error& e) {
      problems.push_back(e.what());
    }
  } else if (doc.contains("planFile") && doc["planFile"].is_string()) {
    auto text = read_file(resolve(doc["planFile"].get<std::string>()), problems);
    if (!text.empty()) {
      try {
        scenario.plan = parse_plan(text);
        plan_loaded = true;
      } catch (const plan_error& e) {
        problems.push_back(e.what());
      }
    }
  } else {
    problems.push_back("scenario needs a 'plan' object or 'planFile' path");
  }

  if (plan_loaded) {
    for (const auto& v : validate_plan(scenario.plan)) {
      problems.push_back("plan invalid: " + v);
    }
  }

  if (!doc.contains("mode") || !doc["mode"].is_string()) {
    problems.push_back("scenario needs a 'mode' string");
  } else {
    auto mode = doc["mode"].get<std::string>();
    if (mode == "centralized") {
      scenario.config.mode = Mode::Centralized;
    } else if (mode == "decentralized") {
      scenario.config.mode = Mode::Decentralized;
    } else {
      problems.push_back("unknown mode: '" + mode + "'");
    }
  }

  scenario.config.seed = doc.value("seed", std::uint64_t{0});

  if (doc.contains("stallTimeoutTicks")) {
    auto t = doc.value("stallTimeoutTicks", std::int64_t{0});
    if (t < 1) {
      problems.push_back("stallTimeoutTicks must be >= 1");
    } else {
      scenario.config.stall_timeout_ticks = t;
    }
  }

  if (doc.contains("onViolation")) {
    auto policy = doc.value("onViolation", std::string{});
    if (policy == "abort") {
      scenario.config.abort_on_violation = true;
    } else if (policy == "continue") {
      scenario.config.abort_on_violation = false;
    } else {
      problems.push_back("unknown onViolation policy: '" + policy + "'");
    }
  }

  if (doc.contains("behaviors")) {
    if (!doc["behaviors"].is_object()) {
      problems.push_back("behaviors must map agent id to a behavior object");
    } else {
      for (const auto& [agent, spec] : doc["behaviors"].items()) {
        if (plan_loaded && !scenario.plan.has_agent(agent)) {
          problems.push_back("behavior for undeclared agent: " + agent);
          continue;
        }
        if (!spec.is_object() || !spec.contains("kind") ||
            !spec["kind"].is_string()) {
          problems.push_back("behavior for " + agent + " has no kind");
          continue;
        }
        auto kind = behavior_kind_from_string(spec["kind"].get<std::string>());
        if (!kind) {
          problems.push_back("behavior for " + agent + ": unknown kind '" +
                             spec["kind"].get<std::string>() + "'");
          continue;
        }
        AgentBehavior behavior;
        behavior.kind = *kind;
        if (behavior.kind != BehaviorKind::Honest) {
          behavior.target = spec.value("action", std::string{});
          if (behavior.target.empty()) {
            problems.push_back("behavior for " + agent + " needs an 'action'");
            continue;
          }
          if (plan_loaded) {
            const ActionSpec* target = scenario.plan.find_action(behavior.target);
            if (target == nullptr) {
              problems.push_back("behavior for " + agent +
                                 " targets unknown action: " + behavior.target);
              continue;
            }
            if (target->agent != agent) {
              problems.push_back("behavior for " + agent + " targets action " +
                                 behavior.target + " owned by " + target->agent);
              continue;
            }
          }
        }
        scenario.config.behaviors[agent] = behavior;
      }
    }
  }

  if (plan_loaded) {
    ordered_json fault_doc = ordered_json::object();
    bool have_faults = false;
    if (doc.contains("faultScript")) {
      fault_doc = doc["faultScript"];
      have_faults = true;
    } else if (doc.contains("faultScriptFile") && doc["faultScriptFile"].is_string()) {
      auto text = read_file(resolve(doc["faultScriptFile"].get<std::string>()),
                            problems);
      if (!text.empty()) {
        fault_doc = ordered_json::parse(text, nullptr, false);
        if (fault_doc.is_discarded()) {
          problems.push_back("fault script file is not valid JSON");
        } else {
          have_faults = true;
        }
      }
    }
    if (have_faults) {
      scenario.faults = parse_fault_script(fault_doc, scenario.plan, problems);
    }
  }

  if (scenario.config.stall_timeout_ticks == 0 && plan_loaded) {
    scenario.config.stall_timeout_ticks =
        std::max<std::int64_t>(1, 10 * static_cast<std::int64_t>(
                                           scenario.plan.actions.size()));
  }

  if (!problems.empty()) throw scenario_error(std::move(problems));
  return scenario;
}

Scenario load_scenario(const std::string& path) {
  std::vector<std::string> problems;
  auto text = read_file(path, problems);
  if (!problems.empty()) throw scenario_error(std::move(problems));
  auto doc = ordered_json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    throw scenario_error({"scenario file is not valid JSON: " + path});
  }
  return load_scenario_json(doc, std::filesystem::path(path).parent_path().string());
}

// ---------------------------------------------------------------------------
// Run loop

namespace {

struct Runner {
  const Scenario& scenario;
  const Plan& plan;
  Ledger ledger;
  WorldState world;
  Deployment dep;
  std::vector<AgentRuntime> agents;
  SchedulerRuntime scheduler;
  std::uint64_t deployer_nonce = 0;
  std::uint64_t oracle_nonce = 0;
  std::set<std::uint64_t> answered;  // responder's own delivery memory
  std::mt19937_64 eng;

  // bookkeeping
  std::size_t receipt_cursor = 0;
  std::map<ActionId, std::int64_t> dispatch_tick;
  std::map<ActionId, std::int64_t> completion_tick;
  std::vector<ActionId> completion_order;
  std::set<ActionId> dead;  // actions with a terminal abort receipt
  RunReport report;
  std::int64_t last_progress = 0;

  explicit Runner(const Scenario& s)
      : scenario(s),
        plan(s.plan),
        world(WorldState::init_from(s.plan)),
        eng(s.config.seed) {
    report.mode = s.config.mode;
    report.seed = s.config.seed;
    report.total_actions = plan.actions.size();
  }

  bool is_agent(const std::string& id) const {
    return plan.has_agent(id);
  }

  AgentRuntime& agent_by_id(const AgentId& id) {
    for (auto& a : agents) {
      if (a.id == id) return a;
    }
    throw error("no runtime for agent: " + id);
  }

  Receipt deploy_or_throw(const std::string& target, const std::string& op,
                          std::vector<std::string> args) {
    auto tx = ledger.build_tx(kDeployerId, target, op, std::move(args),
                              deployer_nonce++);
    auto receipt = ledger.submit(tx);
    if (!receipt.accepted) {
      throw error("deployment transaction rejected: " + receipt.reject_reason);
    }
    return receipt;
  }

  std::string deploy_contract(const std::string& kind, const ordered_json& args) {
    auto nonce = deployer_nonce;
    deploy_or_throw("", "deploy", {kind, args.dump()});
    return Ledger::deploy_address(kDeployerId, nonce);
  }

  void setup() {
    install_contract_kinds(ledger);
    ledger.register_identity(kDeployerId);
    ledger.register_identity(kOracleId);
    ledger.register_identity(scheduler.id);
    for (const auto& agent : plan.agents) ledger.register_identity(agent);

    dep.mode = scenario.config.mode;
    auto behaviors = scenario.config.behaviors;
    std::map<AgentId, LocalPlan> locals;
    if (dep.mode == Mode::Decentralized) locals = derive_local_plans(plan);
    for (const auto& agent : plan.agents) {
      AgentRuntime runtime;
      runtime.id = agent;
      if (auto it = behaviors.find(agent); it != behaviors.end()) {
        runtime.behavior = it->second;
      }
      if (dep.mode == Mode::Decentralized) runtime.local_plan = locals.at(agent);
      agents.push_back(std::move(runtime));
    }

    dep.oracle_addr = deploy_contract(
        "oracle", ordered_json{{"trustedResponder", kOracleId}});

    if (dep.mode == Mode::Centralized) {
      for (const auto& agent : plan.agents) {
        ordered_json actions = ordered_json::array();
        for (const auto& a : plan.actions) {
          if (a.agent != agent) continue;
          actions.push_back(ordered_json{
              {"id", a.id},
              {"uri", device_uri(agent, a.id)},
              {"precond", literals_to_strings(a.precond)},
              {"effect", literals_to_strings(a.effect)}});
        }
        dep.act_addrs[agent] = deploy_contract(
            "act", ordered_json{{"oracle", dep.oracle_addr}, {"actions", actions}});
      }
      dep.register_addr = deploy_contract("register", ordered_json::object());
      for (const auto& agent : plan.agents) {
        ordered_json ids = ordered_json::array();
        for (const auto& a : plan.actions) {
          if (a.agent == agent) ids.push_back(a.id);
        }
        deploy_or_throw(dep.register_addr, "setAct",
                        {ordered_json{{"actions", ids},
                                      {"address", dep.act_addrs[agent]}}
                             .dump()});
      }
      dep.plan_addr = deploy_contract(
          "plan", ordered_json{{"register", dep.register_addr},
                               {"rows", plan_rows(plan)}});
      for (const auto& agent : plan.agents) {
        deploy_or_throw(dep.act_addrs[agent], "wire", {dep.plan_addr});
      }
    } else {
      auto local_plans = derive_local_plans(plan);
      for (const auto& agent : plan.agents) {
        ordered_json entries = ordered_json::array();
        for (const auto& entry : local_plans.at(agent).entries) {
          entries.push_back(ordered_json{
              {"action", entry.action},
              {"in", entry.in_set},
              {"precond", literals_to_strings(entry.precond)},
              {"effect", literals_to_strings(entry.effect)},
              {"out", entry.out_set},
              {"uri", device_uri(agent, entry.action)}});
        }
        dep.planact_addrs[agent] = deploy_contract(
            "planact", ordered_json{{"oracle", dep.oracle_addr},
                                    {"owner", agent},
                                    {"entries", entries}});
      }
      dep.register_addr = deploy_contract("register", ordered_json::object());
      for (const auto& agent : plan.agents) {
        ordered_json ids = ordered_json::array();
        for (const auto& a : plan.actions) {
          if (a.agent == agent) ids.push_back(a.id);
        }
        deploy_or_throw(dep.register_addr, "setAct",
                        {ordered_json{{"actions", ids},
                                      {"address", dep.planact_addrs[agent]}}
                             .dump()});
      }
      for (const auto& agent : plan.agents) {
        deploy_or_throw(dep.planact_addrs[agent], "wire", {dep.register_addr});
      }
    }
    ledger.seal_block();
  }

  OutcomeScript script_for(const ActionId& id) const {
    auto it = scenario.faults.find(id);
    return it == scenario.faults.end() ? OutcomeScript{} : it->second;
  }

  void respond_due() {
    struct Due {
      std::uint64_t qid;
      PendingQuery query;
    };
    std::vector<Due> due;
    {
      const auto* oracle =
          dynamic_cast<const OracleContract*>(ledger.contract_at(dep.oracle_addr));
      if (oracle == nullptr) throw error("oracle contract missing");
      for (const auto& [qid, q] : oracle->pending()) {
        if (q.consumed || answered.count(qid)) continue;
        if (q.kind == "read" && q.not_before > world.step()) continue;
        due.push_back(Due{qid, q});
      }
    }
    for (const auto& d : due) {
      std::string payload;
      if (d.query.kind == "read") {
        ordered_json values = ordered_json::object();
        for (const auto& pred : d.query.predicates) {
          values[pred] = world.get_val(pred);
        }
        payload = values.dump();
      } else {
        const ActionSpec* spec = plan.find_action(d.query.action);
        if (spec == nullptr) continue;  // unroutable device request
        AgentRuntime& agent = agent_by_id(spec->agent);
        if (!device_performs(agent, d.query.action)) continue;  // ask again later
        auto result = world.execute_action(*spec, script_for(d.query.action));
        payload = ordered_json{{"succeeded", result.succeeded},
                               {"stepCompleted", result.step_completed}}
                      .dump();
      }
      auto qid_str = std::to_string(d.qid);
      auto tag = OracleContract::authenticity_tag(qid_str, payload);
      auto tx = ledger.build_tx(kOracleId, dep.oracle_addr, "callback",
                                {qid_str, payload, tag}, oracle_nonce++);
      ledger.submit(tx);
      answered.insert(d.qid);
    }
  }

  void scan_new_receipts(std::int64_t tick) {
    const auto& receipts = ledger.receipts();
    for (; receipt_cursor < receipts.size(); ++receipt_cursor) {
      const Receipt& r = receipts[receipt_cursor];
      for (const auto& event : r.events) {
        if (r.accepted && event.name == "oracle_query" &&
            event.args.size() >= 3 && event.args[1] == "precond") {
          dispatch_tick.emplace(event.args[2], tick);
        }
        if (r.accepted && event.name == kEvCompleted && !event.args.empty()) {
          const ActionId& id = event.args[0];
          if (completion_tick.emplace(id, tick).second) {
            completion_order.push_back(id);
            last_progress = tick;
          }
        }
      }
      if (r.accepted) continue;

      if (r.reject_reason == "precond" || r.reject_reason == "effect") {
        for (const auto& event : r.events) {
          if (event.name != kEvRollback || event.args.size() < 3) continue;
          const ActionId& action = event.args[0];
          const std::string& phase = event.args[1];
          const std::string& initiator = event.args[2];
          if (phase != "precond" && phase != "effect") continue;
          dead.insert(action);
          if (phase == "precond" && is_agent(initiator)) {
            report.violations.push_back(Violation{
                initiator, "ignored-precondition", "receipt:" + std::to_string(r.seq)});
          } else {
            report.device_faults.push_back(DeviceFault{action, phase, r.seq});
          }
        }
      } else if (is_agent(r.sender)) {
        report.violations.push_back(Violation{
            r.sender, violation_kind(r.reject_reason),
            "receipt:" + std::to_string(r.seq)});
      }
    }
  }

  StallInfo compute_stall() {
    StallInfo info;
    std::set<ActionId> completed(completion_order.begin(), completion_order.end());
    std::set<AgentId> responsible;
    std::set<ActionId> roots;
    for (const auto& a : plan.actions) {
      if (completed.count(a.id)) continue;
      auto deps = plan.deps_of(a.id);
      bool ready = std::includes(completed.begin(), completed.end(),
                                 deps.begin(), deps.end());
      if (ready) {
        roots.insert(a.id);
        info.roots.push_back(a.id);
        responsible.insert(a.agent);
      }
    }
    for (const auto& a : plan.actions) {
      if (completed.count(a.id) || roots.count(a.id)) continue;
      info.blocked.push_back(a.id);
    }
    info.responsible.assign(responsible.begin(), responsible.end());
    for (const auto& root : info.roots) {
      if (!dead.count(root)) {
        report.violations.push_back(Violation{
            plan.find_action(root)->agent, "stall", "stall:" + root});
      }
    }
    return info;
  }

  RunReport run() {
    setup();
    std::int64_t tick = 0;
    Terminal terminal = Terminal::Done;
    bool finished = plan.actions.empty();
    while (!finished) {
      ++tick;
      world.advance_step();

      if (dep.mode == Mode::Centralized) {
        scheduler_tick(ledger, dep, scheduler);
        std::vector<std::size_t> order(agents.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        seeded_shuffle(order, eng);
        for (auto i : order) {
          agent_tick_centralized(agents[i], ledger, world, dep, plan);
        }
      } else {
        std::vector<std::size_t> order(agents.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        seeded_shuffle(order, eng);
        for (auto i : order) {
          agent_tick_decentralized(agents[i], ledger, world, dep, plan);
        }
      }

      respond_due();
      ledger.seal_block();
      scan_new_receipts(tick);

      if (completion_order.size() == plan.actions.size()) {
        terminal = Terminal::Done;
        finished = true;
      } else if (scenario.config.abort_on_violation &&
                 !report.violations.empty()) {
        terminal = Terminal::Aborted;
        finished = true;
      } else if (tick - last_progress >= scenario.config.stall_timeout_ticks) {
        terminal = Terminal::Stalled;
        report.stall = compute_stall();
        finished = true;
      }
    }
    if (plan.actions.empty()) {
      // Nothing to execute; still seal the deployment epoch deterministically.
      ++tick;
      world.advance_step();
      if (dep.mode == Mode::Centralized) scheduler_tick(ledger, dep, scheduler);
      ledger.seal_block();
      scan_new_receipts(tick);
      terminal = Terminal::Done;
    }

    report.terminal = terminal;
    report.ticks = tick;
    report.completed = completion_order;
    for (const auto& id : completion_order) {
      report.trace.push_back(TraceEntry{
          id,
          dispatch_tick.count(id) ? dispatch_tick.at(id) : 0,
          completion_tick.at(id)});
    }
    bool goal = true;
    for (const auto& lit : plan.goal) {
      if (world.get_val(lit.pred) != lit.positive) goal = false;
    }
    report.goal_satisfied = goal;
    report.chain_valid = ledger.verify_chain();
    report.final_world = world.values();
    report.blocks = ledger.chain().size();
    report.receipt_count = ledger.receipts().size();
    report.audit = ledger.receipts();
    report.chain = ledger.chain();
    return report;
  }
};

}  // namespace

RunReport run_scenario(const Scenario& scenario) {
  if (auto violations = validate_plan(scenario.plan); !violations.empty()) {
    throw scenario_error(violations);
  }
  Runner runner(scenario);
  return runner.run();
}

// ---------------------------------------------------------------------------
// Reports

std::string emit_report_text(const RunReport& report) {
  std::ostringstream out;
  out << "mode: " << to_string(report.mode) << "\n";
  out << "seed: " << report.seed << "\n";
  out << "terminal: " << to_string(report.terminal) << "\n";
  out << "goal satisfied: " << (report.goal_satisfied ? "yes" : "no") << "\n";
  out << "chain valid: " << (report.chain_valid ? "yes" : "no") << "\n";
  out << "ticks: " << report.ticks << "\n";
  out << "completed (" << report.completed.size() << "/" << report.total_actions
      << "):";
  for (const auto& id : report.completed) out << " " << id;
  out << "\n";
  out << "trace:\n";
  for (const auto& entry : report.trace) {
    out << "  " << entry.action << ": dispatched=" << entry.dispatched
        << " completed=" << entry.completed << "\n";
  }
  if (report.violations.empty()) {
    out << "violations: none\n";
  } else {
    out << "violations:\n";
    for (const auto& v : report.violations) {
      out << "  " << v.agent << ": " << v.kind << " (" << v.evidence << ")\n";
    }
  }
  if (report.device_faults.empty()) {
    out << "device faults: none\n";
  } else {
    out << "device faults:\n";
    for (const auto& f : report.device_faults) {
      out << "  " << f.action << ": " << f.phase << " (receipt:" << f.receipt_seq
          << ")\n";
    }
  }
  if (report.stall) {
    out << "stall: roots=[";
    for (std::size_t i = 0; i < report.stall->roots.size(); ++i) {
      out << (i ? " " : "") << report.stall->roots[i];
    }
    out << "] blocked=[";
    for (std::size_t i = 0; i < report.stall->blocked.size(); ++i) {
      out << (i ? " " : "") << report.stall->blocked[i];
    }
    out << "] responsible=[";
    for (std::size_t i = 0; i < report.stall->responsible.size(); ++i) {
      out << (i ? " " : "") << report.stall->responsible[i];
    }
    out << "]\n";
  }
  return out.str();
}

std::string emit_report_jsonl(const RunReport& report) {
  std::ostringstream out;
  ordered_json run{{"type", "run"},
                   {"mode", to_string(report.mode)},
                   {"seed", report.seed},
                   {"terminal", to_string(report.terminal)},
                   {"goalSatisfied", report.goal_satisfied},
                   {"chainValid", report.chain_valid},
                   {"ticks", report.ticks},
                   {"blocks", report.blocks},
                   {"receipts", report.receipt_count},
                   {"totalActions", report.total_actions},
                   {"completed", report.completed}};
  out << run.dump() << "\n";
  for (const auto& entry : report.trace) {
    out << ordered_json{{"type", "trace"},
                        {"action", entry.action},
                        {"dispatched", entry.dispatched},
                        {"completed", entry.completed}}
               .dump()
        << "\n";
  }
  for (const auto& v : report.violations) {
    out << ordered_json{{"type", "violation"},
                        {"agent", v.agent},
                        {"kind", v.kind},
                        {"evidence", v.evidence}}
               .dump()
        << "\n";
  }
  for (const auto& f : report.device_faults) {
    out << ordered_json{{"type", "device-fault"},
                        {"action", f.action},
                        {"phase", f.phase},
                        {"receipt", f.receipt_seq}}
               .dump()
        << "\n";
  }
  if (report.stall) {
    out << ordered_json{{"type", "stall"},
                        {"roots", report.stall->roots},
                        {"blocked", report.stall->blocked},
                        {"responsible", report.stall->responsible}}
               .dump()
        << "\n";
  }
  ordered_json world = ordered_json::object();
  for (const auto& [pred, value] : report.final_world) world[pred] = value;
  out << ordered_json{{"type", "world"}, {"values", world}}.dump() << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Audit log

std::string export_audit_log(const Scenario& scenario, const RunReport& report) {
  std::ostringstream out;
  ordered_json actions = ordered_json::array();
  for (const auto& a : scenario.plan.actions) actions.push_back(a.id);
  ordered_json deps = ordered_json::array();
  for (const auto& [before, after] : scenario.plan.deps) {
    deps.push_back(ordered_json::array({before, after}));
  }
  out << ordered_json{{"type", "meta"},
                      {"mode", to_string(report.mode)},
                      {"seed", report.seed},
                      {"actions", actions},
                      {"deps", deps}}
             .dump()
      << "\n";
  for (const auto& block : report.chain) {
    ordered_json txs = ordered_json::array();
    for (const auto& tx : block.transactions) {
      txs.push_back(ordered_json{{"sender", tx.sender},
                                 {"target", tx.target},
                                 {"op", tx.op},
                                 {"args", tx.args},
                                 {"nonce", tx.nonce},
                                 {"sig", tx.signature}});
    }
    out << ordered_json{{"type", "block"},
                        {"index", block.index},
                        {"prev", block.prev_digest},
                        {"digest", block.digest},
                        {"txs", txs}}
               .dump()
        << "\n";
  }
  for (const auto& r : report.audit) {
    ordered_json events = ordered_json::array();
    for (const auto& e : r.events) {
      events.push_back(ordered_json{{"contract", e.contract},
                                    {"name", e.name},
                                    {"args", e.args},
                                    {"seq", e.seq}});
    }
    out << ordered_json{{"type", "receipt"},
                        {"seq", r.seq},
                        {"block", r.block_index},
                        {"sender", r.sender},
                        {"target", r.target},
                        {"op", r.op},
                        {"status",
                         r.accepted ? "accepted" : "rejected:" + r.reject_reason},
                        {"events", events}}
               .dump()
        << "\n";
  }
  return out.str();
}

AuditVerification verify_audit_log(const std::string& text) {
  AuditVerification result;
  std::vector<Block> blocks;
  std::vector<std::pair<ActionId, ActionId>> deps;
  std::set<ActionId> plan_actions;
  std::vector<ActionId> completions;
  std::int64_t last_seq = -1;
  bool seq_ok = true;

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto doc = ordered_json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("type")) {
      result.problems.push_back("line " + std::to_string(line_no) +
                                ": not a record");
      continue;
    }
    auto type = doc.value("type", std::string{});
    try {
      if (type == "meta") {
        for (const auto& a : doc.value("actions", ordered_json::array())) {
          plan_actions.insert(a.get<std::string>());
        }
        for (const auto& pair : doc.value("deps", ordered_json::array())) {
          deps.emplace_back(pair.at(0).get<std::string>(),
                            pair.at(1).get<std::string>());
        }
      } else if (type == "block") {
        Block block;
        block.index = doc.at("index").get<std::uint64_t>();
        block.prev_digest = doc.at("prev").get<std::string>();
        block.digest = doc.at("digest").get<std::string>();
        for (const auto& tx_doc : doc.value("txs", ordered_json::array())) {
          Transaction tx;
          tx.sender = tx_doc.at("sender").get<std::string>();
          tx.target = tx_doc.at("target").get<std::string>();
          tx.op = tx_doc.at("op").get<std::string>();
          tx.args = tx_doc.at("args").get<std::vector<std::string>>();
          tx.nonce = tx_doc.at("nonce").get<std::uint64_t>();
          tx.signature = tx_doc.at("sig").get<std::string>();
          block.transactions.push_back(std::move(tx));
        }
        blocks.push_back(std::move(block));
      } else if (type == "receipt") {
        auto seq = doc.at("seq").get<std::int64_t>();
        if (seq <= last_seq) seq_ok = false;
        last_seq = seq;
        for (const auto& e : doc.value("events", ordered_json::array())) {
          if (e.value("name", std::string{}) == kEvCompleted) {
            auto args = e.value("args", std::vector<std::string>{});
            if (!args.empty()) completions.push_back(args[0]);
          }
        }
      }
    } catch (const nlohmann::json::exception& e) {
      result.problems.push_back("line " + std::to_string(line_no) + ": " +
                                e.what());
    }
  }

  result.chain_ok = Ledger::verify_blocks(blocks);
  if (!result.chain_ok) result.problems.push_back("chain verification failed");
  if (!seq_ok) result.problems.push_back("receipt sequence not increasing");

  result.order_ok = true;
  std::set<ActionId> done;
  for (const auto& id : completions) {
    if (!done.insert(id).second) {
      result.order_ok = false;
      result.problems.push_back("duplicate completion: " + id);
    }
    for (const auto& [before, after] : deps) {
      if (after == id && !done.count(before)) {
        result.order_ok = false;
        result.problems.push_back("completion of " + id +
                                  " before its dependency " + before);
      }
    }
  }
  if (!seq_ok) result.order_ok = false;
  return result;
}

// ---------------------------------------------------------------------------
// Random scenarios

Scenario gen_random_scenario(std::size_t n_actions, std::size_t n_agents,
                             std::uint64_t seed) {
  if (n_agents == 0) n_agents = 1;
  std::mt19937_64 eng(seed);
  Scenario scenario;
  Plan& plan = scenario.plan;

  for (std::size_t i = 0; i < n_agents; ++i) {
    plan.agents.push_back("g" + std::to_string(i + 1));
  }
  plan.predicates.push_back("start");
  for (std::size_t i = 0; i < n_actions; ++i) {
    plan.predicates.push_back("p" + std::to_string(i + 1));
  }
  plan.init.push_back("start");

  for (std::size_t i = 0; i < n_actions; ++i) {
    ActionSpec action;
    action.id = "a" + std::to_string(i + 1);
    action.agent = plan.agents[eng() % n_agents];
    action.effect.push_back(Literal{"p" + std::to_string(i + 1), true});
    if (i > 0) {
      std::size_t max_deps = std::min<std::size_t>(i, 3);
      std::size_t want = eng() % (max_deps + 1);
      std::set<std::size_t> chosen;
      for (std::size_t d = 0; d < want; ++d) chosen.insert(eng() % i);
      for (auto j : chosen) {
        plan.deps.emplace_back("a" + std::to_string(j + 1), action.id);
        // Preconditions come from direct dependencies, so they are
        // guaranteed to hold once the ordering gate opens.
        action.precond.push_back(Literal{"p" + std::to_string(j + 1), true});
      }
    }
    if (eng() % 2 == 0) {
      action.precond.push_back(Literal{"start", true});
    }
    plan.actions.push_back(std::move(action));
    plan.goal.push_back(Literal{"p" + std::to_string(i + 1), true});
  }

  scenario.config.mode = Mode::Centralized;
  scenario.config.seed = seed;
  scenario.config.stall_timeout_ticks =
      std::max<std::int64_t>(1, 10 * static_cast<std::int64_t>(n_actions));
  return scenario;
}

ordered_json plan_to_json(const Plan& plan) {
  ordered_json actions = ordered_json::array();
  for (const auto& a : plan.actions) {
    actions.push_back(ordered_json{{"id", a.id},
                                   {"agent", a.agent},
                                   {"precond", literals_to_strings(a.precond)},
                                   {"effect", literals_to_strings(a.effect)}});
  }
  ordered_json deps = ordered_json::array();
  for (const auto& [before, after] : plan.deps) {
    deps.push_back(ordered_json::array({before, after}));
  }
  ordered_json goal = ordered_json::array();
  for (const auto& lit : plan.goal) goal.push_back(to_string(lit));
  return ordered_json{{"agents", plan.agents},
                      {"predicates", plan.predicates},
                      {"actions", actions},
                      {"deps", deps},
                      {"init", plan.init},
                      {"goal", goal}};
}

ordered_json scenario_to_json(const Scenario& scenario) {
  ordered_json behaviors = ordered_json::object();
  for (const auto& [agent, behavior] : scenario.config.behaviors) {
    ordered_json b{{"kind", to_string(behavior.kind)}};
    if (behavior.kind != BehaviorKind::Honest) b["action"] = behavior.target;
    behaviors[agent] = b;
  }
  ordered_json faults = ordered_json::object();
  for (const auto& [action, script] : scenario.faults) {
    ordered_json s = ordered_json::object();
    switch (script.kind) {
      case OutcomeScript::Kind::Nominal:
        s["kind"] = "nominal";
        break;
      case OutcomeScript::Kind::FailNoEffect:
        s["kind"] = "fail";
        break;
      case OutcomeScript::Kind::PartialEffect:
        s["kind"] = "partial";
        s["effects"] = literals_to_strings(script.partial_effects);
        break;
      case OutcomeScript::Kind::DelaySteps:
        s["kind"] = "delay";
        s["steps"] = script.delay_steps;
        break;
    }
    faults[action] = s;
  }
  ordered_json doc{{"plan", plan_to_json(scenario.plan)},
                   {"mode", to_string(scenario.config.mode)},
                   {"seed", scenario.config.seed},
                   {"stallTimeoutTicks", scenario.config.stall_timeout_ticks},
                   {"onViolation",
                    scenario.config.abort_on_violation ? "abort" : "continue"}};
  if (!behaviors.empty()) doc["behaviors"] = behaviors;
  if (!faults.empty()) doc["faultScript"] = faults;
  return doc;
}

}  // namespace planexec
