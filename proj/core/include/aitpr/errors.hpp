#pragma once

#include <stdexcept>
#include <string>

namespace aitpr {

// Root of every error raised by the library. Callers that only need to
// distinguish "our" failures from std exceptions can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible shapes or sizes between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced or detected during evaluation.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values (scene config, train config, dims).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Invalid user input that is not a configuration problem (empty corpus, bad ids).
class InputError : public Error {
 public:
  using Error::Error;
};

// A file exists but does not follow its documented format.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure: missing, unreadable or unwritable paths.
class IoError : public Error {
 public:
  using Error::Error;
};

// Checkpoint written by an incompatible format version.
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

// A vocabulary is missing a word the caption grammar needs.
class CoverageError : public Error {
 public:
  using Error::Error;
};

// Predicted steps and target tokens do not line up.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

// The Early-fusion interaction branch has no vectors to attend over.
class DegenerateBranchError : public Error {
 public:
  using Error::Error;
};

// Two artifacts (checkpoint vs dataset) were built against different vocabularies.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace aitpr
