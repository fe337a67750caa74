#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace deepgate {

enum class ErrorCode : std::uint8_t {
  SyntaxError,
  UndefinedSignal,
  DuplicateDefinition,
  CycleDetected,
  NoPrimaryInputs,
  LatchesUnsupported,
  MalformedHeader,
  LiteralOutOfRange,
  UnsupportedGateKind,
  InvalidStructure,
  PiMismatch,
  TooManyInputsForExhaustive,
  DomainError,
  ExtractionExhausted,
  ShapeMismatch,
  EmptyGroup,
  NonScalarLoss,
  ConfigMismatch,
  LengthMismatch,
  EmptyDataset,
  FormatError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Parse error with a 1-based source line.
class ParseError : public Error {
public:
  ParseError(ErrorCode code, std::size_t line, const std::string& message)
      : Error(code, "line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

} // namespace deepgate
