#pragma once

#include <stdexcept>
#include <string>

namespace sparsnn {

// Error taxonomy mirrors the CLI exit codes: config/parse problems,
// numeric divergence, and shape mismatches are distinguishable by type.
struct shape_error : std::runtime_error {
  explicit shape_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct parse_error : std::runtime_error {
  explicit parse_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sparsnn
