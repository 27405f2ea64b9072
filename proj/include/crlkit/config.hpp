#pragma once

#include <string>

#include "crlkit/learner.hpp"

namespace crl {

/// Every key with its resolved value, one `key = value` per line.
std::string write_config(const LearnerConfig& config);

/// Applies `key = value` lines on top of `base`. Unknown keys, duplicate
/// keys and malformed values are ParseErrors; the result is validated.
LearnerConfig parse_config(const std::string& text, const LearnerConfig& base = {});

/// Applies a single assignment, e.g. from a command-line override.
void set_config_value(LearnerConfig& config, const std::string& key, const std::string& value);

LearnerConfig load_config(const std::string& path, const LearnerConfig& base = {});

}  // namespace crl
