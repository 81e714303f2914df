#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hg {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidConfig : public Error { using Error::Error; };

// kinematics
class UnreachableConfiguration : public Error { using Error::Error; };
class SingularBranch : public Error { using Error::Error; };
class OutOfWorkspace : public Error { using Error::Error; };
class JointLimit : public Error { using Error::Error; };
class SingularConfiguration : public Error { using Error::Error; };
class EmptyWorkspace : public Error { using Error::Error; };

// actuation
class NumericalBlowup : public Error { using Error::Error; };

// analysis
class SchemaError : public Error {
 public:
  SchemaError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}
  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};
class EmptyFile : public Error { using Error::Error; };
class TooShort : public Error { using Error::Error; };
class NoMotionDetected : public Error { using Error::Error; };
class DegenerateFeatures : public Error { using Error::Error; };
class RankDeficient : public Error { using Error::Error; };
class InsufficientData : public Error { using Error::Error; };
class UnknownLabel : public Error { using Error::Error; };

}  // namespace hg
