#pragma once

#include <stdexcept>
#include <string>

namespace cpc
{

/// Base class of every error thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (non-finite value, bad size, bad period...).
class InvalidArgument : public Error
{
public:
  using Error::Error;
};

/// The vertical contact force is too small for the ZMP to be defined.
class DegenerateContact : public Error
{
public:
  using Error::Error;
};

class RiccatiDivergence : public Error
{
public:
  RiccatiDivergence(const std::string & what, double residual) : Error(what), residual_(residual) {}

  double residual() const noexcept
  {
    return residual_;
  }

private:
  double residual_;
};

class IterationLimit : public Error
{
public:
  IterationLimit(const std::string & what, int iterations, double kktViolation)
  : Error(what), iterations_(iterations), kktViolation_(kktViolation)
  {
  }

  int iterations() const noexcept
  {
    return iterations_;
  }
  double kktViolation() const noexcept
  {
    return kktViolation_;
  }

private:
  int iterations_;
  double kktViolation_;
};

class EmptyContactSet : public Error
{
public:
  using Error::Error;
};

class NoSupportingContact : public Error
{
public:
  using Error::Error;
};

class InvalidRotation : public Error
{
public:
  using Error::Error;
};

class WindowSizeMismatch : public Error
{
public:
  using Error::Error;
};

/// Malformed scenario file or scenario definition.
class ConfigError : public Error
{
public:
  using Error::Error;
};

} // namespace cpc
