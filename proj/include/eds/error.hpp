#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace eds {

// Error categories map one-to-one onto CLI exit codes and HTTP statuses.
enum class ErrorKind { Config, Data, Runtime };

// `field` optionally names the offending config key or column for field-level reporting.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what, std::string field = {})
      : std::runtime_error(what), kind_(kind), field_(std::move(field)) {}
  ErrorKind kind() const noexcept { return kind_; }
  const std::string& field() const noexcept { return field_; }

private:
  ErrorKind kind_;
  std::string field_;
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what, std::string field = {})
      : Error(ErrorKind::Config, what, std::move(field)) {}
};

class DataError : public Error {
public:
  explicit DataError(const std::string& what, std::string field = {})
      : Error(ErrorKind::Data, what, std::move(field)) {}
};

class RuntimeFailure : public Error {
public:
  explicit RuntimeFailure(const std::string& what) : Error(ErrorKind::Runtime, what) {}
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace eds
