#pragma once

#include <stdexcept>
#include <string>

namespace ddmr {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: mesh sizes, partitions, ranks, config keys.
class ConfigError : public Error
{
public:
  using Error::Error;
};

/// A linear solve or factorization failed.
class SolverError : public Error
{
public:
  using Error::Error;
};

/// Model file is unreadable, corrupt, or from another format version.
class FormatError : public Error
{
public:
  using Error::Error;
};

/// Failure inside one stage of offline training; carries the stage name.
class StageError : public Error
{
public:
  StageError(std::string stage, const std::string& what)
    : Error(stage + ": " + what), stage_(std::move(stage))
  {}

  const std::string& stage() const noexcept { return stage_; }

private:
  std::string stage_;
};

} // namespace ddmr
