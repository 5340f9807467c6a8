#pragma once

#include <stdexcept>
#include <string>

namespace phasebench {

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Two grids that must share a shape do not.
class DimensionError : public Error
{
  public:
    using Error::Error;
};

/// An argument lies outside the operation's domain (non-finite, negative, ...).
class DomainError : public Error
{
  public:
    using Error::Error;
};

/// The calibration frame has no usable fringe carrier.
class CalibrationError : public Error
{
  public:
    using Error::Error;
};

/// An iterative method could not make progress.
class NumericalError : public Error
{
  public:
    using Error::Error;
};

class ConfigError : public Error
{
  public:
    using Error::Error;
};

class IoError : public Error
{
  public:
    using Error::Error;
};

} // namespace phasebench
