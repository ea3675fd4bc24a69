#pragma once

#include <stdexcept>
#include <string>

namespace mcs {

// Error categories map onto CLI exit codes: config 2, data 3, numeric 4.
enum class ErrorKind { config, data, numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

// Rethrows `e` with a prefix, keeping its concrete type.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& prefix) {
  const std::string what = prefix + e.what();
  switch (e.kind()) {
    case ErrorKind::config: throw ConfigError(what);
    case ErrorKind::data: throw DataError(what);
    case ErrorKind::numeric: throw NumericError(what);
  }
  throw NumericError(what);
}

inline int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config: return 2;
    case ErrorKind::data: return 3;
    case ErrorKind::numeric: return 4;
  }
  return 4;
}

}  // namespace mcs
