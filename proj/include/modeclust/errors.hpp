#pragma once

#include <stdexcept>
#include <string>

namespace modeclust
{
/// Bad data handed to an operation: non-finite values, sizes out of range,
/// ties where distinct values are required, malformed files.
class InputError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// A request outside what the library implements (e.g. k-dip for k > 3).
class UnsupportedError : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

/// Invalid tuning parameters.
class ConfigError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace modeclust
