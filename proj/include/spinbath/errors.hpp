// errors.hpp — exception taxonomy shared across the library.
//
// The categories map onto distinct CLI exit codes: validation problems
// (bad arguments, malformed configs) exit 2, capacity overruns exit 3,
// filesystem trouble exits 4.  Everything derives from std::exception,
// so callers that don't care can catch generically.
#pragma once

#include <stdexcept>
#include <string>

namespace spinbath {

// A function was handed a value outside its documented domain.
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// The request is well-formed but exceeds what dense diagonalization
// can handle (environment too large).
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An internal precondition failed — e.g. a matrix that must be
// Hermitian is not.  Indicates a caller bug, not bad user input.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// A config document could not be read at the lexical level.
struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_number, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_number) + ": " + what),
        line(line_number) {}
};

// A config document parsed but violates a field constraint.  The
// offending field name is kept separately so tools can point at it.
struct ValidationError : std::runtime_error {
  std::string field;
  ValidationError(const std::string& field_name, const std::string& what)
      : std::runtime_error(field_name + ": " + what), field(field_name) {}
};

// A statistic was requested from a sample too small to support it.
struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reading or writing an output file failed.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace spinbath
