#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace explore {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class OutOfBounds : public Error {
 public:
  using Error::Error;
};

// A precondition on world state was violated (e.g. a pose inside a wall).
class InvalidState : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class ExternalPredictorError : public Error {
 public:
  ExternalPredictorError(const std::string& what, std::string diagnostics)
      : Error(what), diagnostics_(std::move(diagnostics)) {}

  const std::string& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::string diagnostics_;
};

class EnsembleError : public Error {
 public:
  EnsembleError(const std::string& member, const std::string& cause)
      : Error("ensemble member '" + member + "' failed: " + cause), member_(member) {}

  const std::string& member() const noexcept { return member_; }

 private:
  std::string member_;
};

// Bad experiment or scorer configuration. key() names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : Error("config key '" + key + "': " + what), key_(key) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace explore
