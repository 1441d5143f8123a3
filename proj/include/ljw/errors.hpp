#pragma once

#include <stdexcept>
#include <string>

namespace ljw {

/// Point off the manifold, or a field that is not a section where one is required.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A discrete step left the region where the retraction is reliable.
class StepSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical rank of X(x) cannot be decided, or differs between points.
class RankDegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Evaluation time that does not fall on the simulation grid.
class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NotFoundError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace ljw
