#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace harmony {

enum class ErrorCode {
  EmptyInput,
  MissingColumn,
  DuplicateName,
  EmptyLabel,
  DuplicateKey,
  TemplateMissingPlaceholder,
  ParseError,
  IoError,
  ProviderUnavailable,
  DimMismatch,
  NotUnitNorm,
  UnknownSource,
  UnknownVariable,
  Leakage,
  SingleClassData,
  SchemaMismatch,
  EmptyGrid,
  TooFewSources,
  GoldMissing,
  LengthMismatch,
  InvalidArgument,
  MalformedVerdict,
  InsufficientLabels,
  Conflict,
  NotFound,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::EmptyLabel: return "EmptyLabel";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::TemplateMissingPlaceholder: return "TemplateMissingPlaceholder";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NotUnitNorm: return "NotUnitNorm";
    case ErrorCode::UnknownSource: return "UnknownSource";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::Leakage: return "Leakage";
    case ErrorCode::SingleClassData: return "SingleClassData";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::TooFewSources: return "TooFewSources";
    case ErrorCode::GoldMissing: return "GoldMissing";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedVerdict: return "MalformedVerdict";
    case ErrorCode::InsufficientLabels: return "InsufficientLabels";
    case ErrorCode::Conflict: return "Conflict";
    case ErrorCode::NotFound: return "NotFound";
  }
  return "Unknown";
}

/// Every failure raised by the library. `detail()` carries the offending
/// name, key, column or row so callers can report it without parsing what().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace harmony
