#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace planexec {

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class plan_error : public error {
 public:
  using error::error;
};

// Carries every problem found while loading a scenario, not just the first.
class scenario_error : public error {
 public:
  explicit scenario_error(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

}  // namespace planexec
