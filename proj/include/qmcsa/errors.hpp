#pragma once

#include <stdexcept>
#include <string>

namespace qmcsa {

/// Invalid user-facing configuration (bad field value, unknown key, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. The message carries line/field context.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An optimization run stopped because the objective misbehaved.
class RunAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Truncated distribution whose support carries no numerical mass.
class DegenerateSupportError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Synthetic data generation failed (e.g. covariance not factorizable).
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qmcsa
