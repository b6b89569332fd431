#ifndef MCKF_CONFIG_HPP
#define MCKF_CONFIG_HPP

#include <string>

#include "mckf/model.hpp"

namespace mckf {

struct CustomExperiment {
  StateSpaceModel model;
  NoiseSpec process;
  NoiseSpec measurement;
};

/// Parses the plain-text key-value schema documented in the README:
/// `key = values` lines, matrices as whitespace-separated row-major numbers,
/// `#` comments. Throws std::runtime_error with a line reference on any
/// malformed or missing entry.
CustomExperiment load_experiment_config(const std::string& path);

CustomExperiment parse_experiment_config(const std::string& text);

}  // namespace mckf

#endif  // MCKF_CONFIG_HPP
