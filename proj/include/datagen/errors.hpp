#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace datagen {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed JSON input. Line and column are 1-based; 0 when unknown.
class ParseError : public Error {
  public:
    ParseError(const std::string &what, std::size_t line, std::size_t column, std::size_t byte_offset)
        : Error(what), line_(line), column_(column), byte_offset_(byte_offset) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }
    std::size_t byte_offset() const { return byte_offset_; }

  private:
    std::size_t line_;
    std::size_t column_;
    std::size_t byte_offset_;
};

/// Well-formed input that violates a dataset or item invariant.
class SchemaError : public Error {
  public:
    using Error::Error;
};

/// Invalid configuration or missing environment (maps to CLI exit code 1).
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Template rendering with missing or unknown bindings.
class RenderError : public Error {
  public:
    using Error::Error;
};

/// LLM completion that does not contain the expected JSON payload.
class FormatError : public Error {
  public:
    using Error::Error;
};

/// Provider failures (maps to CLI exit code 3).
class ProviderError : public Error {
  public:
    using Error::Error;
};

/// Network-level failure. The only class of error the gateway retries.
class TransportError : public ProviderError {
  public:
    using ProviderError::ProviderError;
};

class ProviderRefusal : public ProviderError {
  public:
    using ProviderError::ProviderError;
};

class TokenLimitError : public ProviderError {
  public:
    using ProviderError::ProviderError;
};

class SelectionError : public Error {
  public:
    using Error::Error;
};

} // namespace datagen
