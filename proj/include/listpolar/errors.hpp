#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace listpolar {

// Malformed or inconsistent inputs: datasets, arguments, CSV rows.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scenario configuration violates its invariants or has unknown keys.
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The placebo test cannot be computed because a confessor stratum is too small.
class TestInapplicable : public std::runtime_error {
 public:
  TestInapplicable(std::size_t confessors_treat, std::size_t confessors_control)
      : std::runtime_error("placebo test inapplicable: confessor strata have " +
                           std::to_string(confessors_treat) + " treated and " +
                           std::to_string(confessors_control) +
                           " control respondents (need at least 2 each)"),
        confessors_treat_(confessors_treat),
        confessors_control_(confessors_control) {}

  std::size_t confessors_treat() const { return confessors_treat_; }
  std::size_t confessors_control() const { return confessors_control_; }

 private:
  std::size_t confessors_treat_;
  std::size_t confessors_control_;
};

}  // namespace listpolar
