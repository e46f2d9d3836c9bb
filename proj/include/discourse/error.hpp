#ifndef DISCOURSE_ERROR_HPP
#define DISCOURSE_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace discourse {

// Fatal problem with an input file or stream (exit status 2 at the CLI).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Stream read failure during ingestion; carries the 1-based line number
// at which reading stopped.
class IngestionError : public InputError {
 public:
  IngestionError(const std::string& what, std::size_t line)
      : InputError(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class RootNotFoundError : public InputError {
 public:
  explicit RootNotFoundError(const std::string& title)
      : InputError("root not found: " + title) {}
};

class IncompatibleFormatError : public InputError {
 public:
  explicit IncompatibleFormatError(const std::string& detail)
      : InputError("incompatible ontology file: " + detail) {}
};

// A transcript that yields no sentences (exit status 3 at the CLI).
class EmptyTranscriptError : public std::runtime_error {
 public:
  explicit EmptyTranscriptError(const std::string& id)
      : std::runtime_error("empty transcript: " + id) {}
};

// Caller passed an out-of-range index, bad depth, mismatched lengths, ...
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Internal inconsistency between derived tables (e.g. a feature key with
// no document frequency).
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace discourse

#endif  // DISCOURSE_ERROR_HPP
