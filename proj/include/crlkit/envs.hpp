#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "crlkit/rng.hpp"

namespace crl {

using Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;

/// Which task parameters vary across a stream.
enum class StreamType { I, II, III };

std::string to_string(StreamType type);
StreamType parse_stream_type(const std::string& text);

struct Puddle {
  Vec2 center;
  double radius = 0.1;
};

/// Dynamics constants shared by every task in a stream.
struct EnvConfig {
  Vec2 start{0.05, 0.05};
  double action_bound = 0.1;
  double puddle_kappa = 0.2;
  double control_cost = 0.1;
  double goal_tolerance = 0.01;
  int max_steps = 100;
};

/// One stationary navigation MDP.
struct TaskSpec {
  int task_id = 0;
  Vec2 goal{0.5, 0.5};
  std::vector<Puddle> puddles;
  VectorXd variation_params;
  int true_cluster = 0;  // generator label; hidden from the detector
};

struct TaskStream {
  StreamType type = StreamType::I;
  std::uint64_t seed = 0;
  double cluster_spread = 0.05;
  EnvConfig env;
  std::vector<VectorXd> cluster_centers;
  std::vector<TaskSpec> tasks;
};

struct EnvState {
  Vec2 position{0.05, 0.05};
  int steps = 0;
};

/// Position followed by the active task's variation parameters.
struct Observation {
  Vec2 position;
  VectorXd aug;

  VectorXd vector() const;
  Eigen::Index size() const { return 2 + aug.size(); }
};

struct StepResult {
  EnvState state;
  Observation observation;
  double reward = 0.0;
  bool done = false;
};

struct StreamOptions {
  std::vector<int> sizes{12, 12, 12, 14};
  double cluster_spread = 0.05;
  double min_separation_factor = 4.0;
  int puddles_per_task = 2;
  double puddle_radius = 0.1;
  EnvConfig env;
};

/// Number of variation parameters for a stream type.
int variation_dim(StreamType type, int puddles_per_task = 2);

/// Builds a TaskSpec from a parameter vector in the stream type's layout:
/// goal (I), puddle centers (II), goal then puddle centers (III).
TaskSpec task_from_params(StreamType type, const VectorXd& params, int puddles_per_task = 2,
                          double puddle_radius = 0.1);

/// Clustered task stream: centers uniform in the unit box with pairwise
/// separation, per-cluster Gaussian samples truncated to the box, shuffled.
TaskStream generate_stream(StreamType type, std::uint64_t seed, const StreamOptions& options = {});

/// Tasks sampled uniformly over the parameter box (no clusters).
std::vector<TaskSpec> sample_uniform_tasks(StreamType type, int n_tasks, std::uint64_t seed,
                                           const StreamOptions& options = {});

Observation observe(const TaskSpec& task, const EnvState& state);

std::pair<EnvState, Observation> reset(const TaskSpec& task, const EnvConfig& env = {});

/// Applies a clipped velocity command; movement is scaled by the puddle
/// factor when the unscaled move would end inside a puddle.
StepResult step(const TaskSpec& task, const EnvState& state, const VectorXd& action, const EnvConfig& env = {});

bool in_puddle(const TaskSpec& task, const Vec2& position);

// Manifest: versioned key-value text that round-trips bitwise.
std::string write_manifest(const TaskStream& stream);
TaskStream read_manifest(const std::string& text);
void save_manifest(const TaskStream& stream, const std::string& path);
TaskStream load_manifest(const std::string& path);

}  // namespace crl
