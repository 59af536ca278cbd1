#ifndef CWFIELD_ERRORS_HPP
#define CWFIELD_ERRORS_HPP

#include <stdexcept>

namespace cwfield {

/// Argument outside the documented domain of an operation.
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A float continued-fraction expansion ran past the precision horizon.
class PrecisionExhausted : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Grid discrepancy request larger than the configured cell budget.
class MemoryBudgetError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A declared closed-form integral disagrees with quadrature, or no integral
/// is available where one is required.
class IntegralError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// No derivative up to the maximum jet order rose above tolerance.
class ClassificationFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The field distribution is degenerate for the requested quantity
/// (a = 0, or all mass on {0, 1}).
class DegenerateField : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A root that the operation promises does not exist for these inputs.
class NoRootError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace cwfield

#endif  // CWFIELD_ERRORS_HPP
