#include "deepgate/error.hpp"

namespace deepgate {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::SyntaxError: return "SyntaxError";
  case ErrorCode::UndefinedSignal: return "UndefinedSignal";
  case ErrorCode::DuplicateDefinition: return "DuplicateDefinition";
  case ErrorCode::CycleDetected: return "CycleDetected";
  case ErrorCode::NoPrimaryInputs: return "NoPrimaryInputs";
  case ErrorCode::LatchesUnsupported: return "LatchesUnsupported";
  case ErrorCode::MalformedHeader: return "MalformedHeader";
  case ErrorCode::LiteralOutOfRange: return "LiteralOutOfRange";
  case ErrorCode::UnsupportedGateKind: return "UnsupportedGateKind";
  case ErrorCode::InvalidStructure: return "InvalidStructure";
  case ErrorCode::PiMismatch: return "PiMismatch";
  case ErrorCode::TooManyInputsForExhaustive: return "TooManyInputsForExhaustive";
  case ErrorCode::DomainError: return "DomainError";
  case ErrorCode::ExtractionExhausted: return "ExtractionExhausted";
  case ErrorCode::ShapeMismatch: return "ShapeMismatch";
  case ErrorCode::EmptyGroup: return "EmptyGroup";
  case ErrorCode::NonScalarLoss: return "NonScalarLoss";
  case ErrorCode::ConfigMismatch: return "ConfigMismatch";
  case ErrorCode::LengthMismatch: return "LengthMismatch";
  case ErrorCode::EmptyDataset: return "EmptyDataset";
  case ErrorCode::FormatError: return "FormatError";
  case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

} // namespace deepgate
