#ifndef ADSIEVE_ERROR_HPP_
#define ADSIEVE_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adsieve {

// Base for every error the library raises. Data errors come from bad
// inputs; internal errors signal a broken invariant inside the library.
class Error : public std::runtime_error {
 public:
  enum class Kind { kData, kInternal };

  Error(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(Kind::kData, what) {}
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what)
      : Error(Kind::kInternal, what) {}
};

// Malformed log record or header.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class HeaderError : public DataError {
 public:
  explicit HeaderError(const std::string& what)
      : DataError("header: " + what) {}
};

// An event references an element or script that was never declared.
class IntegrityError : public DataError {
 public:
  IntegrityError(const std::string& id, const std::string& what)
      : DataError("referential integrity: " + what + " '" + id + "'"),
        id_(id) {}

  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class UrlError : public DataError {
 public:
  explicit UrlError(const std::string& what) : DataError("url: " + what) {}
};

class CentralityError : public DataError {
 public:
  explicit CentralityError(const std::string& what)
      : DataError("centrality: " + what) {}
};

class DatasetError : public DataError {
 public:
  explicit DatasetError(const std::string& what)
      : DataError("dataset: " + what) {}
};

class TrainingError : public DataError {
 public:
  explicit TrainingError(const std::string& what)
      : DataError("training: " + what) {}
};

class FoldError : public DataError {
 public:
  explicit FoldError(const std::string& what) : DataError("folds: " + what) {}
};

class MetricError : public DataError {
 public:
  explicit MetricError(const std::string& what)
      : DataError("metrics: " + what) {}
};

class ConfigError : public DataError {
 public:
  explicit ConfigError(const std::string& what)
      : DataError("config: " + what) {}
};

}  // namespace adsieve

#endif  // ADSIEVE_ERROR_HPP_
