#pragma once

#include <stdexcept>
#include <string>

#include "rsnet/network.hpp"

namespace rsnet {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  NetworkModel model;
  Domain domain;
};

/// Parses a JSON model description:
///   {"J": 2, "K": 1, "serves": [[1, 2]], "route": [2, 0],
///    "lambda": [1.0, 0.0], "mu": [1.0, 1.0], "c": 1.0,
///    "domain": {"kind": "rect", "z": [1.0, 1.0]}}
/// Classes are 1-based in the file; route entry 0 means the customer exits.
/// A weighted-cap domain reads {"kind": "cap", "w": [...], "h": ...}.
/// Malformed input raises ConfigError naming the offending key. Structural
/// model checks are left to validate_model / validate_domain.
ModelConfig load_config(const std::string& path);

}  // namespace rsnet
