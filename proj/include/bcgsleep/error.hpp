#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bcgsleep {

enum class ErrorKind {
  InvalidStageCode,
  UnknownLevel,
  OverlappingIntervals,
  MalformedRow,
  MalformedLabels,
  NonMonotonicTimestamp,
  NegativeVital,
  AllMissing,
  RecordTooShort,
  NoEpochs,
  EmptyMatrix,
  DegenerateMatrix,
  EmptyRecord,
  TooFewItems,
  EmptyTrainingSet,
  SchemaMismatch,
  MalformedModel,
  LengthMismatch,
  ConstantInput,
  TooFewPoints,
  DurationTooShort,
  InvalidProfile,
  InvalidArgument,
  BindFailure,
  InitialConnectFailure,
  Io,
};

std::string_view error_name(ErrorKind kind) noexcept;

/// The single exception type thrown by the library. `kind()` names the
/// failure; the CLI prints it verbatim as the diagnostic prefix.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return error_name(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace bcgsleep
