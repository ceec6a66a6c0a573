#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "planexec/errors.hpp"

namespace planexec {

using ActionId = std::string;
using AgentId = std::string;
using PredicateId = std::string;

// A ground literal over a predicate: "p" or "!p".
struct Literal {
  PredicateId pred;
  bool positive = true;

  friend bool operator==(const Literal&, const Literal&) = default;
  friend auto operator<=>(const Literal&, const Literal&) = default;
};

Literal parse_literal(const std::string& text);  // throws plan_error
std::string to_string(const Literal& lit);

struct ActionSpec {
  ActionId id;
  AgentId agent;
  std::vector<Literal> precond;
  std::vector<Literal> effect;
};

// A partial-order plan: actions plus acyclic dependency edges (before, after).
// Actions keep file declaration order; that order is the deterministic
// tie-break everywhere downstream.
struct Plan {
  std::vector<AgentId> agents;
  std::vector<PredicateId> predicates;
  std::vector<ActionSpec> actions;
  std::vector<std::pair<ActionId, ActionId>> deps;
  std::vector<PredicateId> init;
  std::vector<Literal> goal;

  const ActionSpec* find_action(const ActionId& id) const;
  bool has_agent(const AgentId& id) const;
  bool has_predicate(const PredicateId& id) const;

  // dep(a): actions that must complete before a may run.
  std::set<ActionId> deps_of(const ActionId& id) const;
  // {b | a in dep(b)}
  std::set<ActionId> dependents_of(const ActionId& id) const;
};

struct LocalPlanEntry {
  std::set<ActionId> in_set;
  std::vector<Literal> precond;
  ActionId action;
  std::vector<Literal> effect;
  std::set<ActionId> out_set;
};

struct LocalPlan {
  AgentId agent;
  std::vector<LocalPlanEntry> entries;  // plan declaration order
};

struct TraceEntry {
  ActionId action;
  std::int64_t dispatched = 0;
  std::int64_t completed = 0;
};
using Trace = std::vector<TraceEntry>;

// Parses the plan document (JSON). Rejects malformed documents, duplicate
// action ids, dependencies on undeclared actions, and cyclic deps. Semantic
// checks beyond that (undeclared agents/predicates, contradictory literals)
// are validate_plan's job so constructed-but-invalid plans stay representable.
Plan parse_plan(const std::string& json_text);
Plan load_plan_file(const std::string& path);

// Returns every invariant violation; empty means valid.
std::vector<std::string> validate_plan(const Plan& plan);

// Per-agent projection; requires a valid plan.
std::map<AgentId, LocalPlan> derive_local_plans(const Plan& plan);

// {a not in completed | dep(a) subset of completed}; throws on unknown ids.
std::set<ActionId> enabled_actions(const Plan& plan,
                                   const std::set<ActionId>& completed);

// True iff trace covers every action exactly once and each dependency's
// completion precedes the dependent's dispatch.
bool is_linear_extension(const Trace& trace, const Plan& plan);

// Same edge condition, restricted to the actions present in the trace;
// dependencies of traced actions must themselves be traced and ordered.
bool is_completed_prefix_ordered(const Trace& trace, const Plan& plan);

}  // namespace planexec
