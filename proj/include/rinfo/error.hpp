#pragma once

#include <stdexcept>
#include <string>

namespace rinfo {

/// Invalid sizes, rates or experiment settings.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Covariance statistics that stay indefinite after the full jitter ladder.
class DegenerateStatsError : public std::runtime_error {
 public:
  DegenerateStatsError(std::string matrix, const std::string& what)
      : std::runtime_error(what), matrix_(std::move(matrix)) {}
  const std::string& matrix() const noexcept { return matrix_; }

 private:
  std::string matrix_;
};

/// Malformed snapshot, CSV or config content.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rinfo
