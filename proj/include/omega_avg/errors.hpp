#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace omega_avg {

enum class ErrorCode {
  MalformedModel,
  ActionNotEnabled,
  PolicyMismatch,
  ParseError,
  UnsupportedFeature,
  NotDeterministic,
  NonNegativeC,
  BadBeta,
  BadC1,
  BadC2,
  IllegalSuccessor,
  IllegalEpsilon,
  BadSchedule,
  IllegalAction,
  ProductTooLarge,
  BadZeta,
  BadGamma,
  BadConfig,
  UnknownGenerator,
  GenerationNotCommunicating,
  BadRange,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by validate_mdp with every violation found, not only the first.
class MalformedModel : public Error {
 public:
  explicit MalformedModel(std::vector<std::string> details);

  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  std::vector<std::string> details_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + reason), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace omega_avg
