#pragma once

#include <stdexcept>
#include <string>

namespace fedcov {

/// Invalid configuration: bad dimensions, out-of-range values, spec
/// mismatches between vectors that are supposed to share a model layout.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Payload does not fit the channel for the configured rounds.
class CapacityError : public ConfigError {
 public:
  explicit CapacityError(const std::string& what) : ConfigError(what) {}
};

/// Codec framing violation (bit count not divisible by the symbol size,
/// bitmap bit count differing from width*height, ...).
class FramingError : public std::runtime_error {
 public:
  explicit FramingError(const std::string& what) : std::runtime_error(what) {}
};

/// Observation log too short to decode the configured transmission.
class IncompleteTransmissionError : public std::runtime_error {
 public:
  explicit IncompleteTransmissionError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Filesystem failure while reading payloads or writing artifacts.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fedcov
