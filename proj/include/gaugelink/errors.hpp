#pragma once

#include <stdexcept>
#include <string>

namespace gaugelink {

/// Input outside the supported domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Argument sits on a pole of a meromorphic function (e.g. Gamma).
class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Inconsistent trap geometry (negative radicand in the continuity relation).
class GeometryError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A numerical procedure failed to converge or lost too much precision.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gauss-law sector is empty or a state lies outside the sector.
class SectorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gauge invariance violated by an operator.
class GaugeInvarianceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user configuration (unknown key, invalid value, malformed document).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gaugelink
