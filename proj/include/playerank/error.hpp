#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace playerank {

/// Error classes raised by the library. Each maps to a distinct CLI exit code
/// and HTTP status.
enum class ErrorCode {
  kInvalidEvent = 1,
  kMalformedLine,
  kUnknownPlayer,
  kClockOutOfRange,
  kUnknownTeam,
  kEmptyTrainingSet,
  kDegenerateData,
  kNoMatches,
  kMissingRating,
  kNothingEvaluable,
  kUnknownSession,
  kUnknownModel,
  kDuplicatePlayer,
  kPlayerOffPitch,
  kClockRegression,
  kNotOnPitch,
  kAlreadyUsed,
  kCorruptLog,
  kInvalidArgument,
  kIo,
};

constexpr std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidEvent: return "InvalidEvent";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kUnknownPlayer: return "UnknownPlayer";
    case ErrorCode::kClockOutOfRange: return "ClockOutOfRange";
    case ErrorCode::kUnknownTeam: return "UnknownTeam";
    case ErrorCode::kEmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::kDegenerateData: return "DegenerateData";
    case ErrorCode::kNoMatches: return "NoMatches";
    case ErrorCode::kMissingRating: return "MissingRating";
    case ErrorCode::kNothingEvaluable: return "NothingEvaluable";
    case ErrorCode::kUnknownSession: return "UnknownSession";
    case ErrorCode::kUnknownModel: return "UnknownModel";
    case ErrorCode::kDuplicatePlayer: return "DuplicatePlayer";
    case ErrorCode::kPlayerOffPitch: return "PlayerOffPitch";
    case ErrorCode::kClockRegression: return "ClockRegression";
    case ErrorCode::kNotOnPitch: return "NotOnPitch";
    case ErrorCode::kAlreadyUsed: return "AlreadyUsed";
    case ErrorCode::kCorruptLog: return "CorruptLog";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_name(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace playerank
