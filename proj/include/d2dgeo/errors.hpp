#pragma once

#include <stdexcept>
#include <string>

namespace d2dgeo {

// Bad argument to a mathematical function (x <= 0 for ln_gamma, x >= 1 for 2F1, ...).
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid model or network configuration.
class config_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Series or quadrature did not reach its tolerance.
class convergence_error : public std::runtime_error {
 public:
  convergence_error(const std::string& what, double achieved = 0.0)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

// Analytic path does not exist for this derivative order (non-integer BEP order).
class unsupported_order : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Two routes to the same quantity disagreed.
class consistency_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace d2dgeo
