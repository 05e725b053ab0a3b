#ifndef ANYMLC_ERRORS_HPP_
#define ANYMLC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace anymlc {

// Base for all recoverable errors. `code()` is a stable machine-readable
// identifier; the CLI prints it alongside the message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

class InvalidInputError : public Error {
 public:
  explicit InvalidInputError(const std::string& message)
      : Error("invalid-input", message) {}
};

class InvalidConfigError : public Error {
 public:
  explicit InvalidConfigError(const std::string& message)
      : Error("invalid-config", message) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& message)
      : Error("parse-error", path + ":" + std::to_string(line) + ": " + message),
        path_(path),
        line_(line) {}
  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

class ZeroCountError : public Error {
 public:
  explicit ZeroCountError(const std::string& message)
      : Error("zero-count", message) {}
};

class UndefinedMetricError : public Error {
 public:
  explicit UndefinedMetricError(const std::string& message)
      : Error("undefined-metric", message) {}
};

// Thrown when a training run produces a non-finite loss.
class DivergedError : public Error {
 public:
  DivergedError(std::size_t epoch, std::size_t batch, double max_abs_logit,
                const std::string& message)
      : Error("diverged", message),
        epoch_(epoch),
        batch_(batch),
        max_abs_logit_(max_abs_logit) {}
  std::size_t epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }
  double max_abs_logit() const { return max_abs_logit_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
  double max_abs_logit_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io-error", message) {}
};

}  // namespace anymlc

#endif  // ANYMLC_ERRORS_HPP_
