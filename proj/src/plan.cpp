#include "planexec/plan.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

namespace planexec {

namespace {

using ordered_json = nlohmann::ordered_json;

// Kahn's algorithm; returns false when the edge set has a cycle.
bool acyclic(const std::vector<ActionId>& nodes,
             const std::vector<std::pair<ActionId, ActionId>>& edges) {
  std::map<ActionId, std::size_t> indegree;
  std::map<ActionId, std::vector<ActionId>> out;
  for (const auto& n : nodes) indegree[n] = 0;
  for (const auto& [before, after] : edges) {
    out[before].push_back(after);
    ++indegree[after];
  }
  std::vector<ActionId> ready;
  for (const auto& [n, d] : indegree) {
    if (d == 0) ready.push_back(n);
  }
  std::size_t seen = 0;
  while (!ready.empty()) {
    ActionId n = ready.back();
    ready.pop_back();
    ++seen;
    for (const auto& m : out[n]) {
      if (--indegree[m] == 0) ready.push_back(m);
    }
  }
  return seen == indegree.size();
}

std::vector<std::string> string_array(const ordered_json& doc, const char* key,
                                      std::vector<std::string>& problems) {
  std::vector<std::string> out;
  if (!doc.contains(key) || !doc[key].is_array()) {
    problems.push_back(std::string("missing or non-array field: ") + key);
    return out;
  }
  for (const auto& item : doc[key]) {
    if (!item.is_string()) {
      problems.push_back(std::string("non-string entry in ") + key);
      return out;
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

void dedupe_keep_order(std::vector<std::string>& items) {
  std::set<std::string> seen;
  std::vector<std::string> out;
  for (auto& item : items) {
    if (seen.insert(item).second) out.push_back(std::move(item));
  }
  items = std::move(out);
}

}  // namespace

Literal parse_literal(const std::string& text) {
  if (text.empty()) throw plan_error("empty literal");
  if (text[0] == '!') {
    if (text.size() == 1) throw plan_error("literal '!' has no predicate");
    return Literal{text.substr(1), false};
  }
  return Literal{text, true};
}

std::string to_string(const Literal& lit) {
  return lit.positive ? lit.pred : "!" + lit.pred;
}

const ActionSpec* Plan::find_action(const ActionId& id) const {
  for (const auto& a : actions) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

bool Plan::has_agent(const AgentId& id) const {
  return std::find(agents.begin(), agents.end(), id) != agents.end();
}

bool Plan::has_predicate(const PredicateId& id) const {
  return std::find(predicates.begin(), predicates.end(), id) != predicates.end();
}

std::set<ActionId> Plan::deps_of(const ActionId& id) const {
  std::set<ActionId> out;
  for (const auto& [before, after] : deps) {
    if (after == id) out.insert(before);
  }
  return out;
}

std::set<ActionId> Plan::dependents_of(const ActionId& id) const {
  std::set<ActionId> out;
  for (const auto& [before, after] : deps) {
    if (before == id) out.insert(after);
  }
  return out;
}

Plan parse_plan(const std::string& json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw plan_error(std::string("malformed document: ") + e.what());
  }
  if (!doc.is_object()) throw plan_error("malformed document: not an object");

  std::vector<std::string> problems;
  Plan plan;
  plan.agents = string_array(doc, "agents", problems);
  plan.predicates = string_array(doc, "predicates", problems);
  dedupe_keep_order(plan.agents);
  dedupe_keep_order(plan.predicates);

  if (!doc.contains("actions") || !doc["actions"].is_array()) {
    problems.push_back("missing or non-array field: actions");
  } else {
    for (const auto& entry : doc["actions"]) {
      if (!entry.is_object() || !entry.contains("id") || !entry["id"].is_string() ||
          !entry.contains("agent") || !entry["agent"].is_string()) {
        problems.push_back("action entry missing string id/agent");
        continue;
      }
      ActionSpec spec;
      spec.id = entry["id"].get<std::string>();
      spec.agent = entry["agent"].get<std::string>();
      try {
        for (const auto& lit : entry.value("precond", ordered_json::array())) {
          spec.precond.push_back(parse_literal(lit.get<std::string>()));
        }
        for (const auto& lit : entry.value("effect", ordered_json::array())) {
          spec.effect.push_back(parse_literal(lit.get<std::string>()));
        }
      } catch (const std::exception& e) {
        problems.push_back("action " + spec.id + ": " + e.what());
      }
      if (plan.find_action(spec.id) != nullptr) {
        problems.push_back("duplicate action id: " + spec.id);
        continue;
      }
      plan.actions.push_back(std::move(spec));
    }
  }

  if (!doc.contains("deps") || !doc["deps"].is_array()) {
    problems.push_back("missing or non-array field: deps");
  } else {
    for (const auto& pair : doc["deps"]) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() ||
          !pair[1].is_string()) {
        problems.push_back("dep entry is not a [before, after] string pair");
        continue;
      }
      auto before = pair[0].get<std::string>();
      auto after = pair[1].get<std::string>();
      if (plan.find_action(before) == nullptr) {
        problems.push_back("dependency on undeclared action: " + before);
      }
      if (plan.find_action(after) == nullptr) {
        problems.push_back("dependency on undeclared action: " + after);
      }
      auto edge = std::make_pair(std::move(before), std::move(after));
      if (std::find(plan.deps.begin(), plan.deps.end(), edge) == plan.deps.end()) {
        plan.deps.push_back(std::move(edge));
      }
    }
  }

  plan.init = string_array(doc, "init", problems);
  dedupe_keep_order(plan.init);

  if (!doc.contains("goal") || !doc["goal"].is_array()) {
    problems.push_back("missing or non-array field: goal");
  } else {
    try {
      for (const auto& lit : doc["goal"]) {
        plan.goal.push_back(parse_literal(lit.get<std::string>()));
      }
    } catch (const std::exception& e) {
      problems.push_back(std::string("goal: ") + e.what());
    }
  }

  if (problems.empty()) {
    std::vector<ActionId> ids;
    for (const auto& a : plan.actions) ids.push_back(a.id);
    if (!acyclic(ids, plan.deps)) problems.push_back("cyclic deps");
  }

  if (!problems.empty()) {
    std::string msg = "invalid plan document:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw plan_error(msg);
  }
  return plan;
}

Plan load_plan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw plan_error("cannot open plan file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_plan(buf.str());
}

std::vector<std::string> validate_plan(const Plan& plan) {
  std::vector<std::string> violations;

  std::set<ActionId> ids;
  for (const auto& a : plan.actions) {
    if (!ids.insert(a.id).second) {
      violations.push_back("duplicate action id: " + a.id);
    }
    if (!plan.has_agent(a.agent)) {
      violations.push_back("action " + a.id + ": agent '" + a.agent +
                           "' not declared");
    }
    auto check_literals = [&](const std::vector<Literal>& lits, const char* which) {
      for (const auto& lit : lits) {
        if (!plan.has_predicate(lit.pred)) {
          violations.push_back("action " + a.id + ": predicate '" + lit.pred +
                               "' not declared (" + which + ")");
        }
        Literal negated{lit.pred, !lit.positive};
        if (std::find(lits.begin(), lits.end(), negated) != lits.end() &&
            lit.positive) {
          violations.push_back("action " + a.id + ": contradictory literals " +
                               lit.pred + "/!" + lit.pred + " (" + which + ")");
        }
      }
    };
    check_literals(a.precond, "precond");
    check_literals(a.effect, "effect");
  }

  for (const auto& [before, after] : plan.deps) {
    if (ids.find(before) == ids.end()) {
      violations.push_back("dependency references undeclared action: " + before);
    }
    if (ids.find(after) == ids.end()) {
      violations.push_back("dependency references undeclared action: " + after);
    }
  }

  std::vector<ActionId> nodes(ids.begin(), ids.end());
  if (!acyclic(nodes, plan.deps)) {
    violations.push_back("dependency cycle detected");
  }

  for (const auto& p : plan.init) {
    if (!plan.has_predicate(p)) {
      violations.push_back("init predicate '" + p + "' not declared");
    }
  }
  for (const auto& lit : plan.goal) {
    if (!plan.has_predicate(lit.pred)) {
      violations.push_back("goal predicate '" + lit.pred + "' not declared");
    }
  }
  return violations;
}

std::map<AgentId, LocalPlan> derive_local_plans(const Plan& plan) {
  if (auto v = validate_plan(plan); !v.empty()) {
    throw plan_error("cannot derive local plans from an invalid plan: " + v.front());
  }
  std::map<AgentId, LocalPlan> out;
  for (const auto& agent : plan.agents) {
    out[agent] = LocalPlan{agent, {}};
  }
  for (const auto& a : plan.actions) {
    LocalPlanEntry entry;
    entry.action = a.id;
    entry.precond = a.precond;
    entry.effect = a.effect;
    entry.in_set = plan.deps_of(a.id);
    entry.out_set = plan.dependents_of(a.id);
    out[a.agent].entries.push_back(std::move(entry));
  }
  return out;
}

std::set<ActionId> enabled_actions(const Plan& plan,
                                   const std::set<ActionId>& completed) {
  for (const auto& id : completed) {
    if (plan.find_action(id) == nullptr) {
      throw error("unknown action id in completed set: " + id);
    }
  }
  std::set<ActionId> out;
  for (const auto& a : plan.actions) {
    if (completed.count(a.id)) continue;
    auto dep = plan.deps_of(a.id);
    if (std::includes(completed.begin(), completed.end(), dep.begin(), dep.end())) {
      out.insert(a.id);
    }
  }
  return out;
}

namespace {

bool trace_well_formed(const Trace& trace, const Plan& plan,
                       std::map<ActionId, const TraceEntry*>& index) {
  for (const auto& entry : trace) {
    if (plan.find_action(entry.action) == nullptr) return false;
    if (!index.emplace(entry.action, &entry).second) return false;  // duplicate
    if (entry.completed <= entry.dispatched) return false;
  }
  return true;
}

}  // namespace

bool is_linear_extension(const Trace& trace, const Plan& plan) {
  std::map<ActionId, const TraceEntry*> index;
  if (!trace_well_formed(trace, plan, index)) return false;
  if (index.size() != plan.actions.size()) return false;
  for (const auto& [before, after] : plan.deps) {
    if (index.at(before)->completed >= index.at(after)->dispatched) return false;
  }
  return true;
}

bool is_completed_prefix_ordered(const Trace& trace, const Plan& plan) {
  std::map<ActionId, const TraceEntry*> index;
  if (!trace_well_formed(trace, plan, index)) return false;
  for (const auto& [before, after] : plan.deps) {
    auto it = index.find(after);
    if (it == index.end()) continue;
    auto dep = index.find(before);
    if (dep == index.end()) return false;
    if (dep->second->completed >= it->second->dispatched) return false;
  }
  return true;
}

}  // namespace planexec
