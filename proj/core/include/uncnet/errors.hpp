#pragma once

#include <stdexcept>
#include <string>

namespace uncnet {

/// Base for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad inputs, malformed files, violated preconditions. CLI exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown detected mid-computation. CLI exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

#define UNCNET_INPUT_ERROR(Name)                                   \
  class Name : public InputError {                                 \
   public:                                                         \
    explicit Name(const std::string& msg)                          \
        : InputError(std::string(#Name) + ": " + msg) {}           \
  }

#define UNCNET_NUMERICAL_ERROR(Name)                               \
  class Name : public NumericalError {                             \
   public:                                                         \
    explicit Name(const std::string& msg)                          \
        : NumericalError(std::string(#Name) + ": " + msg) {}       \
  }

// options_iv
UNCNET_INPUT_ERROR(NoParityStrike);
UNCNET_INPUT_ERROR(NoK0);
UNCNET_INPUT_ERROR(EmptySelection);
UNCNET_INPUT_ERROR(NegativeInput);
UNCNET_INPUT_ERROR(DomainError);
UNCNET_NUMERICAL_ERROR(NegativeVariance);

// industry_panel
UNCNET_INPUT_ERROR(EmptyIndustryDay);
UNCNET_INPUT_ERROR(MismatchedFirms);
UNCNET_INPUT_ERROR(UnfillableGap);
UNCNET_INPUT_ERROR(OverlappingMembership);

// tvp_var
UNCNET_INPUT_ERROR(DegeneratePanel);
UNCNET_NUMERICAL_ERROR(SingularDesign);
UNCNET_NUMERICAL_ERROR(NonPosDefScale);

// network
UNCNET_NUMERICAL_ERROR(ZeroDenominator);
UNCNET_NUMERICAL_ERROR(ZeroRow);

// cycles
UNCNET_INPUT_ERROR(EmptyPhase);
UNCNET_INPUT_ERROR(RuleExceedsUniverse);

// forecast
UNCNET_INPUT_ERROR(InsufficientSample);
UNCNET_INPUT_ERROR(NonPositiveLevel);
UNCNET_NUMERICAL_ERROR(CollinearDesign);

// cli / simulate
UNCNET_INPUT_ERROR(EmptyInput);
UNCNET_INPUT_ERROR(UnstableSpec);
UNCNET_INPUT_ERROR(ConfigError);

#undef UNCNET_INPUT_ERROR
#undef UNCNET_NUMERICAL_ERROR

}  // namespace uncnet
