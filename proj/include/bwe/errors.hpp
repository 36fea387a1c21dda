#pragma once

#include <stdexcept>
#include <string>

namespace bwe {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A token was required but is not known to the relevant vocabulary.
class UnknownTokenError : public Error {
 public:
  explicit UnknownTokenError(const std::string& token, const std::string& where)
      : Error("unknown token '" + token + "' in " + where), token_(token) {}
  const std::string& token() const noexcept { return token_; }

 private:
  std::string token_;
};

/// Optimization produced a non-finite gradient or objective.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// SVD did not converge or returned non-finite values.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace bwe
