#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gcmc {

enum class ErrorCode {
  DuplicateLabel,
  UnknownEndpoint,
  SelfLoop,
  DuplicateEdge,
  UnknownLabel,
  ReservedLabel,
  EmptySubset,
  EmptyGraph,
  InvalidDistribution,
  LabelMismatch,
  InvalidK,
  EmptyLowMassSet,
  NotConnected,
  ZeroMass,
  NotStochastic,
  ConflictingOptions,
  MissingSchedule,
  WrongMode,
  InvalidOverride,
  ScheduleExhausted,
  InfeasiblePlan,
  InfeasibleFactor,
  UnknownState,
  KbarTooLarge,
  InvalidArgument,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::UnknownEndpoint: return "UnknownEndpoint";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::ReservedLabel: return "ReservedLabel";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::EmptyLowMassSet: return "EmptyLowMassSet";
    case ErrorCode::NotConnected: return "NotConnected";
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::NotStochastic: return "NotStochastic";
    case ErrorCode::ConflictingOptions: return "ConflictingOptions";
    case ErrorCode::MissingSchedule: return "MissingSchedule";
    case ErrorCode::WrongMode: return "WrongMode";
    case ErrorCode::InvalidOverride: return "InvalidOverride";
    case ErrorCode::ScheduleExhausted: return "ScheduleExhausted";
    case ErrorCode::InfeasiblePlan: return "InfeasiblePlan";
    case ErrorCode::InfeasibleFactor: return "InfeasibleFactor";
    case ErrorCode::UnknownState: return "UnknownState";
    case ErrorCode::KbarTooLarge: return "KbarTooLarge";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code; every failure in the library
/// is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace gcmc
