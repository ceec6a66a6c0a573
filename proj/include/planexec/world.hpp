#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "planexec/plan.hpp"

namespace planexec {

// Scripted device behaviour for one action.
struct OutcomeScript {
  enum class Kind { Nominal, FailNoEffect, PartialEffect, DelaySteps };
  Kind kind = Kind::Nominal;
  std::vector<Literal> partial_effects;  // PartialEffect: subset of effect(a)
  std::int64_t delay_steps = 0;          // DelaySteps: n >= 0
};

using FaultScript = std::map<ActionId, OutcomeScript>;

struct ExecResult {
  ActionId action;
  bool succeeded = false;
  std::int64_t step_completed = 0;  // step at which effects are in place
};

// The device layer: predicate values advancing in integer steps. Writes are
// serialized by the harness; preconditions are deliberately NOT checked here.
class WorldState {
 public:
  static WorldState init_from(const Plan& plan);

  bool get_val(const PredicateId& p) const;  // throws on unknown predicate
  ExecResult execute_action(const ActionSpec& action,
                            const OutcomeScript& script);
  void advance_step();

  std::int64_t step() const { return step_; }
  const std::map<PredicateId, bool>& values() const { return values_; }

 private:
  void apply(const Literal& lit);
  void flush_pending();

  std::map<PredicateId, bool> values_;
  std::int64_t step_ = 0;
  std::vector<std::pair<std::int64_t, Literal>> pending_;  // (due step, lit)
};

}  // namespace planexec
