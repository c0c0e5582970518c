#pragma once

#include <stdexcept>
#include <string>

namespace graphgeo {

// Error taxonomy mirrors the CLI exit-code contract:
// parse/validation -> 1, config/usage -> 2, numeric failure -> 3.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

class ValidationError : public Error {
public:
  using Error::Error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class NumericError : public Error {
public:
  using Error::Error;
};

} // namespace graphgeo
