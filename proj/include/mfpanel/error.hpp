#pragma once

#include <stdexcept>
#include <string>

namespace mfp {

// Base for every error raised by the library. The CLI maps these to exit
// code 1; configuration problems use UsageError and exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t row)
      : Error(msg + " (row " + std::to_string(row) + ")"), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class IntegrityError : public Error { using Error::Error; };
class LookupError : public Error { using Error::Error; };
class InsufficientData : public Error { using Error::Error; };
class DegenerateInput : public Error { using Error::Error; };
class RankDeficiency : public Error { using Error::Error; };
class NonConvergence : public Error { using Error::Error; };
class AlignmentError : public Error { using Error::Error; };
class ScaleViolation : public Error { using Error::Error; };
class TuningFailure : public Error { using Error::Error; };
class NumericalError : public Error { using Error::Error; };
class InvalidArgument : public Error { using Error::Error; };
class UsageError : public Error { using Error::Error; };

}  // namespace mfp
