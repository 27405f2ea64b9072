#pragma once

#include <string>

#include "crlkit/learner.hpp"

namespace crl {

inline constexpr char kCheckpointMagic[8] = {'C', 'R', 'L', 'K', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary snapshot of a learner at a task boundary: config, env constants,
/// policy tensors (row-major, little-endian f64), registry, optimizer
/// moments, training RNG, counters and the run record so far.
std::string encode_checkpoint(const LearnerState& state);
LearnerState decode_checkpoint(const std::string& bytes);

void save_checkpoint(const LearnerState& state, const std::string& path);
LearnerState load_checkpoint(const std::string& path);

}  // namespace crl
