#pragma once

#include <stdexcept>
#include <string>

namespace proce {

// Broad failure category; the CLI maps kinds to process exit codes.
enum class ErrorKind {
  kConfig,    // bad option value, invalid run configuration
  kUsage,     // operation called with arguments that violate its contract
  kSchema,    // feature schema inconsistent with data or another artifact
  kData,      // malformed rows, unknown categories, non-finite values
  kShape,     // dimension mismatch between tensors/layers
  kDomain,    // value outside the mathematical domain of an operation
  kParse,     // unreadable JSON/CSV content
  kVersion,   // artifact produced by an unsupported format version
  kTraining,  // optimization diverged (NaN/Inf loss)
  kIo,        // filesystem failure: missing path, unwritable output
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error(ErrorKind::kConfig, m) {}
};
struct UsageError : Error {
  explicit UsageError(const std::string& m) : Error(ErrorKind::kUsage, m) {}
};
struct SchemaError : Error {
  explicit SchemaError(const std::string& m) : Error(ErrorKind::kSchema, m) {}
};
struct DataError : Error {
  explicit DataError(const std::string& m) : Error(ErrorKind::kData, m) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string& m) : Error(ErrorKind::kShape, m) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& m) : Error(ErrorKind::kDomain, m) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error(ErrorKind::kParse, m) {}
};
struct VersionError : Error {
  explicit VersionError(const std::string& m) : Error(ErrorKind::kVersion, m) {}
};
struct TrainingError : Error {
  explicit TrainingError(const std::string& m) : Error(ErrorKind::kTraining, m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error(ErrorKind::kIo, m) {}
};

}  // namespace proce
