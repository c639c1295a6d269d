#include "bcgsleep/error.hpp"

namespace bcgsleep {

std::string_view error_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidStageCode: return "InvalidStageCode";
    case ErrorKind::UnknownLevel: return "UnknownLevel";
    case ErrorKind::OverlappingIntervals: return "OverlappingIntervals";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::MalformedLabels: return "MalformedLabels";
    case ErrorKind::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorKind::NegativeVital: return "NegativeVital";
    case ErrorKind::AllMissing: return "AllMissing";
    case ErrorKind::RecordTooShort: return "RecordTooShort";
    case ErrorKind::NoEpochs: return "NoEpochs";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::DegenerateMatrix: return "DegenerateMatrix";
    case ErrorKind::EmptyRecord: return "EmptyRecord";
    case ErrorKind::TooFewItems: return "TooFewItems";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::MalformedModel: return "MalformedModel";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ConstantInput: return "ConstantInput";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::DurationTooShort: return "DurationTooShort";
    case ErrorKind::InvalidProfile: return "InvalidProfile";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::BindFailure: return "BindFailure";
    case ErrorKind::InitialConnectFailure: return "InitialConnectFailure";
    case ErrorKind::Io: return "IoError";
  }
  return "Error";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(error_name(kind)) + ": " + detail), kind_(kind) {}

}  // namespace bcgsleep
