#ifndef PARMINE_ERROR_H_
#define PARMINE_ERROR_H_

#include <stdexcept>
#include <string>

namespace parmine {

// Base of everything the library throws on purpose. The CLI maps the
// subclasses onto exit codes (1 validation, 2 data, 3 internal).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or command-line parameters, including invalid regexes.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A precondition on the input values was violated (empty document, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Files on disk are missing, unreadable or inconsistent with each other.
class DataError : public Error {
 public:
  using Error::Error;
};

class LoadError : public DataError {
 public:
  using DataError::DataError;
};

// Operation invoked in the wrong phase of a stateful workflow.
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace parmine

#endif  // PARMINE_ERROR_H_
