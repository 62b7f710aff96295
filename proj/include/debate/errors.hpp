#pragma once

#include <stdexcept>
#include <string>

namespace debate {

/// Base class for all errors raised by the engine.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or contradictory configuration, plans, schemas, CLI usage.
/// Maps to exit code 2 at the CLI boundary.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A loaded document breaks a declared invariant (bad gamma, dangling edge...).
class ValidationError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Corpus ingestion failures: empty file, invalid UTF-8, unknown corpus.
class IngestError : public Error {
public:
    using Error::Error;
};

/// Text generation backend failure after retries are exhausted.
class BackendError : public Error {
public:
    BackendError(const std::string& what, int last_status = 0)
        : Error(what), last_status_(last_status) {}
    int last_status() const { return last_status_; }

private:
    int last_status_;
};

/// The scripted backend ran out of entries. Signals a test/fixture bug.
class ScriptUnderrunError : public BackendError {
public:
    using BackendError::BackendError;
};

}  // namespace debate
