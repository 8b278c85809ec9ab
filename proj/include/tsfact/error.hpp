#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace tsfact {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class GridError : public Error {
public:
  using Error::Error;
};

/// Raised when an operation is given a function or space of the wrong shape,
/// or a weight that violates the positivity contract.
class SpaceError : public Error {
public:
  using Error::Error;
};

/// A numerical failure located at a specific grid index.
class PointError : public Error {
public:
  PointError(const std::string& what, std::size_t index, double x)
      : Error(what + " at index " + std::to_string(index) + " (x = " +
              std::to_string(x) + ")"),
        index_(index), x_(x) {}

  std::size_t index() const noexcept { return index_; }
  double x() const noexcept { return x_; }

private:
  std::size_t index_;
  double x_;
};

class ChainError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  ConfigError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

} // namespace tsfact
