#pragma once

#include <stdexcept>
#include <string>

namespace rvk {

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct InvalidDelta : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidGrid : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidProfile : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QuadratureFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TailDivergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnboundedField : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyFamily : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NonMonotoneStencil : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotConverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoContactPoint : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rvk
