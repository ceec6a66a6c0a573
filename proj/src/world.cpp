#include "planexec/world.hpp"

#include <algorithm>

namespace planexec {

WorldState WorldState::init_from(const Plan& plan) {
  WorldState w;
  for (const auto& p : plan.predicates) {
    w.values_[p] = false;
  }
  for (const auto& p : plan.init) {
    auto it = w.values_.find(p);
    if (it == w.values_.end()) {
      throw error("init predicate not in universe: " + p);
    }
    it->second = true;
  }
  return w;
}

bool WorldState::get_val(const PredicateId& p) const {
  auto it = values_.find(p);
  if (it == values_.end()) throw error("unknown predicate: " + p);
  return it->second;
}

void WorldState::apply(const Literal& lit) {
  auto it = values_.find(lit.pred);
  if (it == values_.end()) throw error("unknown predicate: " + lit.pred);
  it->second = lit.positive;
}

void WorldState::flush_pending() {
  auto it = pending_.begin();
  while (it != pending_.end()) {
    if (it->first <= step_) {
      apply(it->second);
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
}

ExecResult WorldState::execute_action(const ActionSpec& action,
                                      const OutcomeScript& script) {
  for (const auto& lit : action.effect) {
    if (values_.find(lit.pred) == values_.end()) {
      throw error("unknown action effect predicate: " + lit.pred);
    }
  }
  ++step_;

  ExecResult result{action.id, false, step_};
  switch (script.kind) {
    case OutcomeScript::Kind::Nominal:
      for (const auto& lit : action.effect) apply(lit);
      result.succeeded = true;
      break;
    case OutcomeScript::Kind::FailNoEffect:
      result.succeeded = false;
      break;
    case OutcomeScript::Kind::PartialEffect:
      for (const auto& lit : script.partial_effects) {
        if (std::find(action.effect.begin(), action.effect.end(), lit) ==
            action.effect.end()) {
          throw error("partial effect not a subset of effect(" + action.id + ")");
        }
        apply(lit);
      }
      result.succeeded = true;
      break;
    case OutcomeScript::Kind::DelaySteps:
      if (script.delay_steps < 0) throw error("negative delay");
      for (const auto& lit : action.effect) {
        pending_.emplace_back(step_ + script.delay_steps, lit);
      }
      result.succeeded = true;
      result.step_completed = step_ + script.delay_steps;
      break;
  }
  flush_pending();
  return result;
}

void WorldState::advance_step() {
  ++step_;
  flush_pending();
}

}  // namespace planexec
