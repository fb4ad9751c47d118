#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wikitables {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid job, source, or filter configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A request object failed validation; `fields` names every offending field.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::vector<std::string> fields)
      : Error(what), fields_(std::move(fields)) {}
  const std::vector<std::string>& fields() const { return fields_; }

 private:
  std::vector<std::string> fields_;
};

/// Network failure that outlived the retry budget. Retriable at job level:
/// `continuation()` is the last title-listing token that was not yet served.
class SourceUnavailable : public Error {
 public:
  SourceUnavailable(const std::string& what, std::string continuation = {})
      : Error(what), continuation_(std::move(continuation)) {}
  const std::string& continuation() const { return continuation_; }

 private:
  std::string continuation_;
};

/// The wiki answered, but with a payload we cannot interpret.
class ApiFormatError : public Error {
 public:
  ApiFormatError(const std::string& what, std::string excerpt)
      : Error(what + ": " + excerpt), excerpt_(std::move(excerpt)) {}
  const std::string& excerpt() const { return excerpt_; }

 private:
  std::string excerpt_;
};

class DumpError : public Error {
 public:
  DumpError(const std::string& what, std::uint64_t offset, bool truncated)
      : Error(what + " (byte offset " + std::to_string(offset) + ")"),
        offset_(offset),
        truncated_(truncated) {}
  std::uint64_t offset() const { return offset_; }
  bool truncated() const { return truncated_; }

 private:
  std::uint64_t offset_;
  bool truncated_;
};

class UnsupportedDump : public Error {
 public:
  using Error::Error;
};

/// The lenient HTML parser gave up on a page.
class HtmlError : public Error {
 public:
  using Error::Error;
};

class StoreError : public Error {
 public:
  using Error::Error;
};

class DuplicateTable : public StoreError {
 public:
  using StoreError::StoreError;
};

class CorpusError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint or manifest belongs to a different job configuration.
class CheckpointMismatch : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

}  // namespace wikitables
