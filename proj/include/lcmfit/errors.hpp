#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lcmfit {

enum class ErrorKind {
  invalid_model,
  rank,
  singular_step,
  not_symmetric,
  no_descent_direction,
  zero_direction,
  iteration_limit,
  solver_failure,
  non_boundary_target,
  too_large,
  parse,
  io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define LCMFIT_DEFINE_ERROR(Name, Kind)                                  \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

LCMFIT_DEFINE_ERROR(InvalidModel, invalid_model)
LCMFIT_DEFINE_ERROR(RankError, rank)
LCMFIT_DEFINE_ERROR(SingularStep, singular_step)
LCMFIT_DEFINE_ERROR(NotSymmetric, not_symmetric)
LCMFIT_DEFINE_ERROR(NoDescentDirection, no_descent_direction)
LCMFIT_DEFINE_ERROR(ZeroDirection, zero_direction)
LCMFIT_DEFINE_ERROR(IterationLimit, iteration_limit)
LCMFIT_DEFINE_ERROR(SolverFailure, solver_failure)
LCMFIT_DEFINE_ERROR(NonBoundaryTarget, non_boundary_target)
LCMFIT_DEFINE_ERROR(TooLarge, too_large)
LCMFIT_DEFINE_ERROR(ParseError, parse)
LCMFIT_DEFINE_ERROR(IoError, io)

#undef LCMFIT_DEFINE_ERROR

}  // namespace lcmfit
