#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mp2v {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when the error is not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : Error(path + (line ? ":" + std::to_string(line) : std::string{}) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A token was looked up that is not part of the vocabulary.
class UnknownTokenError : public Error {
public:
    explicit UnknownTokenError(const std::string& token)
        : Error("unknown token '" + token + "'"), token_(token) {}

    const std::string& token() const noexcept { return token_; }

private:
    std::string token_;
};

/// Training produced a NaN or infinity.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace mp2v
