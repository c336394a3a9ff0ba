#pragma once

#include <stdexcept>
#include <string>

namespace htsrec {

/// Broad failure categories, mapped to CLI exit codes (validation -> 2,
/// numerical -> 3).
enum class ErrorKind {
  validation,         // malformed inputs, dimension mismatches, bad files
  insufficient_data,  // not enough observations for the requested estimate
  numerical,          // non-SPD matrices, singular downdates, non-finite objectives
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  int exit_code() const { return kind_ == ErrorKind::numerical ? 3 : 2; }

  const char* kind_name() const {
    switch (kind_) {
      case ErrorKind::validation: return "validation";
      case ErrorKind::insufficient_data: return "insufficient_data";
      case ErrorKind::numerical: return "numerical";
    }
    return "unknown";
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_validation(const std::string& msg) {
  throw Error(ErrorKind::validation, msg);
}
[[noreturn]] inline void throw_insufficient(const std::string& msg) {
  throw Error(ErrorKind::insufficient_data, msg);
}
[[noreturn]] inline void throw_numerical(const std::string& msg) {
  throw Error(ErrorKind::numerical, msg);
}

}  // namespace htsrec
