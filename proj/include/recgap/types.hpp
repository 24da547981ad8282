#ifndef RECGAP_TYPES_HPP_
#define RECGAP_TYPES_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace recgap {

// Dense identifiers into a Catalog. Ordering of ids follows the ordering of
// the underlying string identifiers.
using UserId = std::uint32_t;
using ItemId = std::uint32_t;
using Timestamp = std::int64_t;

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class MalformedRow : public Error {
 public:
  MalformedRow(std::size_t line, const std::string& reason)
      : Error("MalformedRow", "line " + std::to_string(line) + ": " + reason),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmptyLog : public Error {
 public:
  explicit EmptyLog(const std::string& what = "no interactions")
      : Error("EmptyLog", what) {}
};

class UnknownUser : public Error {
 public:
  explicit UnknownUser(const std::string& user) : Error("UnknownUser", user) {}
};

class UnknownItem : public Error {
 public:
  explicit UnknownItem(const std::string& item) : Error("UnknownItem", item) {}
};

class ModelFailure : public Error {
 public:
  explicit ModelFailure(const std::string& what) : Error("ModelFailure", what) {}
};

class InstanceTooLarge : public Error {
 public:
  explicit InstanceTooLarge(const std::string& what)
      : Error("InstanceTooLarge", what) {}
};

class SingularSystem : public Error {
 public:
  explicit SingularSystem(const std::string& what)
      : Error("SingularSystem", what) {}
};

class MissingCell : public Error {
 public:
  explicit MissingCell(const std::string& what) : Error("MissingCell", what) {}
};

class EmptyRecommendationLog : public Error {
 public:
  EmptyRecommendationLog()
      : Error("EmptyRecommendationLog", "no recommendation events") {}
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what)
      : Error("PreconditionError", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

}  // namespace recgap

#endif  // RECGAP_TYPES_HPP_
