#include "crlkit/envs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crlkit/errors.hpp"
#include "crlkit/textio.hpp"

namespace crl {

namespace {

constexpr int kManifestVersion = 1;

// Parameters that stay fixed for the components a stream type does not vary.
const Vec2 kFixedGoal{0.8, 0.8};
const std::array<Vec2, 2> kFixedPuddles{Vec2{0.3, 0.6}, Vec2{0.6, 0.3}};

VectorXd sample_truncated(const VectorXd& center, double spread, Rng& rng) {
  VectorXd x(center.size());
  for (int attempt = 0; attempt < 10000; ++attempt) {
    bool inside = true;
    for (Eigen::Index i = 0; i < center.size(); ++i) {
      x[i] = rng.normal(center[i], spread);
      inside = inside && x[i] >= 0.0 && x[i] <= 1.0;
    }
    if (inside) return x;
  }
  throw GenerationError("truncated sample rejected too often; spread too large for the box");
}

}  // namespace

std::string to_string(StreamType type) {
  switch (type) {
    case StreamType::I:
      return "I";
    case StreamType::II:
      return "II";
    case StreamType::III:
      return "III";
  }
  return "?";
}

StreamType parse_stream_type(const std::string& text) {
  if (text == "I" || text == "1") return StreamType::I;
  if (text == "II" || text == "2") return StreamType::II;
  if (text == "III" || text == "3") return StreamType::III;
  throw ParseError("unknown stream type '" + text + "' (expected I, II or III)");
}

VectorXd Observation::vector() const {
  VectorXd v(size());
  v[0] = position.x();
  v[1] = position.y();
  v.tail(aug.size()) = aug;
  return v;
}

int variation_dim(StreamType type, int puddles_per_task) {
  switch (type) {
    case StreamType::I:
      return 2;
    case StreamType::II:
      return 2 * puddles_per_task;
    case StreamType::III:
      return 2 + 2 * puddles_per_task;
  }
  return 0;
}

TaskSpec task_from_params(StreamType type, const VectorXd& params, int puddles_per_task, double puddle_radius) {
  if (params.size() != variation_dim(type, puddles_per_task))
    throw ShapeError("variation parameter length does not match stream type");
  if (puddle_radius <= 0.0 || puddle_radius > 0.5) throw InputError("puddle radius must lie in (0, 0.5]");
  TaskSpec task;
  task.variation_params = params;
  Eigen::Index offset = 0;
  if (type == StreamType::I || type == StreamType::III) {
    task.goal = params.head<2>();
    offset = 2;
  } else {
    task.goal = kFixedGoal;
  }
  if (type == StreamType::I) {
    for (int p = 0; p < puddles_per_task; ++p)
      task.puddles.push_back({kFixedPuddles[static_cast<std::size_t>(p) % kFixedPuddles.size()], puddle_radius});
  } else {
    for (int p = 0; p < puddles_per_task; ++p)
      task.puddles.push_back({params.segment<2>(offset + 2 * p), puddle_radius});
  }
  return task;
}

TaskStream generate_stream(StreamType type, std::uint64_t seed, const StreamOptions& options) {
  if (options.sizes.empty()) throw InputError("at least one cluster is required");
  if (!(options.cluster_spread > 0.0)) throw InputError("cluster_spread must be positive");
  for (int s : options.sizes)
    if (s < 0) throw InputError("cluster sizes must be non-negative");

  Rng rng(seed);
  const int p = variation_dim(type, options.puddles_per_task);
  const double min_sep = options.min_separation_factor * options.cluster_spread;
  const std::size_t n_clusters = options.sizes.size();

  TaskStream stream;
  stream.type = type;
  stream.seed = seed;
  stream.cluster_spread = options.cluster_spread;
  stream.env = options.env;

  constexpr int kMaxAttempts = 10000;
  bool placed = false;
  for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
    stream.cluster_centers.clear();
    for (std::size_t k = 0; k < n_clusters; ++k) {
      VectorXd c(p);
      for (int i = 0; i < p; ++i) c[i] = rng.uniform(0.0, 1.0);
      stream.cluster_centers.push_back(c);
    }
    placed = true;
    for (std::size_t a = 0; a < n_clusters && placed; ++a)
      for (std::size_t b = a + 1; b < n_clusters && placed; ++b)
        if ((stream.cluster_centers[a] - stream.cluster_centers[b]).norm() < min_sep) placed = false;
  }
  if (!placed) throw GenerationError("could not place cluster centers with the requested separation");

  for (std::size_t k = 0; k < n_clusters; ++k) {
    for (int i = 0; i < options.sizes[k]; ++i) {
      VectorXd params = sample_truncated(stream.cluster_centers[k], options.cluster_spread, rng);
      TaskSpec task = task_from_params(type, params, options.puddles_per_task, options.puddle_radius);
      task.true_cluster = static_cast<int>(k);
      stream.tasks.push_back(std::move(task));
    }
  }
  // Fisher-Yates with the stream rng.
  for (std::size_t i = stream.tasks.size(); i > 1; --i) std::swap(stream.tasks[i - 1], stream.tasks[rng.index(i)]);
  for (std::size_t i = 0; i < stream.tasks.size(); ++i) stream.tasks[i].task_id = static_cast<int>(i);
  return stream;
}

std::vector<TaskSpec> sample_uniform_tasks(StreamType type, int n_tasks, std::uint64_t seed,
                                           const StreamOptions& options) {
  if (n_tasks <= 0) throw InputError("n_tasks must be positive");
  Rng rng(seed);
  const int p = variation_dim(type, options.puddles_per_task);
  std::vector<TaskSpec> tasks;
  for (int t = 0; t < n_tasks; ++t) {
    VectorXd params(p);
    for (int i = 0; i < p; ++i) params[i] = rng.uniform(0.0, 1.0);
    TaskSpec task = task_from_params(type, params, options.puddles_per_task, options.puddle_radius);
    task.task_id = t;
    task.true_cluster = -1;
    tasks.push_back(std::move(task));
  }
  return tasks;
}

Observation observe(const TaskSpec& task, const EnvState& state) { return {state.position, task.variation_params}; }

std::pair<EnvState, Observation> reset(const TaskSpec& task, const EnvConfig& env) {
  EnvState state{env.start, 0};
  return {state, observe(task, state)};
}

bool in_puddle(const TaskSpec& task, const Vec2& position) {
  for (const auto& p : task.puddles)
    if ((position - p.center).norm() <= p.radius) return true;
  return false;
}

StepResult step(const TaskSpec& task, const EnvState& state, const VectorXd& action, const EnvConfig& env) {
  if (action.size() != 2) throw ShapeError("navigation actions are 2-D");
  if (!action.allFinite()) throw InputError("action is not finite");
  const Vec2 clipped = action.cwiseMax(-env.action_bound).cwiseMin(env.action_bound);
  Vec2 next = (state.position + clipped).cwiseMax(0.0).cwiseMin(1.0);
  if (in_puddle(task, next)) next = (state.position + env.puddle_kappa * clipped).cwiseMax(0.0).cwiseMin(1.0);

  StepResult r;
  r.state.position = next;
  r.state.steps = state.steps + 1;
  r.observation = observe(task, r.state);
  const double dist2 = (next - task.goal).squaredNorm();
  r.reward = -dist2 - env.control_cost * clipped.squaredNorm();
  r.done = std::sqrt(dist2) <= env.goal_tolerance || r.state.steps >= env.max_steps;
  return r;
}

std::string write_manifest(const TaskStream& stream) {
  using text::format_double;
  using text::format_vector;
  std::ostringstream out;
  out << "# crlkit task stream manifest\n";
  out << "format = crlkit-stream\n";
  out << "version = " << kManifestVersion << "\n";
  out << "type = " << to_string(stream.type) << "\n";
  out << "seed = " << stream.seed << "\n";
  out << "cluster_spread = " << format_double(stream.cluster_spread) << "\n";
  out << "env.start = " << format_double(stream.env.start.x()) << " " << format_double(stream.env.start.y()) << "\n";
  out << "env.action_bound = " << format_double(stream.env.action_bound) << "\n";
  out << "env.puddle_kappa = " << format_double(stream.env.puddle_kappa) << "\n";
  out << "env.control_cost = " << format_double(stream.env.control_cost) << "\n";
  out << "env.goal_tolerance = " << format_double(stream.env.goal_tolerance) << "\n";
  out << "env.max_steps = " << stream.env.max_steps << "\n";
  out << "n_clusters = " << stream.cluster_centers.size() << "\n";
  for (std::size_t k = 0; k < stream.cluster_centers.size(); ++k)
    out << "cluster." << k << " = " << format_vector(stream.cluster_centers[k]) << "\n";
  out << "n_tasks = " << stream.tasks.size() << "\n";
  for (std::size_t i = 0; i < stream.tasks.size(); ++i) {
    const auto& t = stream.tasks[i];
    const std::string key = "task." + std::to_string(i);
    out << key << ".id = " << t.task_id << "\n";
    out << key << ".true_cluster = " << t.true_cluster << "\n";
    out << key << ".goal = " << format_double(t.goal.x()) << " " << format_double(t.goal.y()) << "\n";
    out << key << ".puddles =";
    for (const auto& p : t.puddles)
      out << " " << format_double(p.center.x()) << " " << format_double(p.center.y()) << " "
          << format_double(p.radius);
    out << "\n";
    out << key << ".variation = " << format_vector(t.variation_params) << "\n";
  }
  return out.str();
}

TaskStream read_manifest(const std::string& body) {
  auto kv = text::parse_key_values(body);
  auto take = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("manifest is missing '" + key + "'");
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  if (take("format") != "crlkit-stream") throw ParseError("not a crlkit stream manifest");
  const auto version = text::parse_int(take("version"));
  if (version != kManifestVersion) throw ParseError("unsupported manifest version " + std::to_string(version));

  TaskStream s;
  s.type = parse_stream_type(take("type"));
  s.seed = text::parse_u64(take("seed"));
  s.cluster_spread = text::parse_double(take("cluster_spread"));
  const VectorXd start = text::parse_vector(take("env.start"));
  if (start.size() != 2) throw ParseError("env.start needs two coordinates");
  s.env.start = start;
  s.env.action_bound = text::parse_double(take("env.action_bound"));
  s.env.puddle_kappa = text::parse_double(take("env.puddle_kappa"));
  s.env.control_cost = text::parse_double(take("env.control_cost"));
  s.env.goal_tolerance = text::parse_double(take("env.goal_tolerance"));
  s.env.max_steps = static_cast<int>(text::parse_int(take("env.max_steps")));

  const auto n_clusters = text::parse_int(take("n_clusters"));
  for (std::int64_t k = 0; k < n_clusters; ++k)
    s.cluster_centers.push_back(text::parse_vector(take("cluster." + std::to_string(k))));
  const auto n_tasks = text::parse_int(take("n_tasks"));
  for (std::int64_t i = 0; i < n_tasks; ++i) {
    const std::string key = "task." + std::to_string(i);
    TaskSpec t;
    t.task_id = static_cast<int>(text::parse_int(take(key + ".id")));
    t.true_cluster = static_cast<int>(text::parse_int(take(key + ".true_cluster")));
    const VectorXd goal = text::parse_vector(take(key + ".goal"));
    if (goal.size() != 2) throw ParseError(key + ".goal needs two coordinates");
    t.goal = goal;
    const VectorXd pud = text::parse_vector(take(key + ".puddles"));
    if (pud.size() % 3 != 0) throw ParseError(key + ".puddles must hold (x y r) triples");
    for (Eigen::Index j = 0; j < pud.size(); j += 3) t.puddles.push_back({Vec2(pud[j], pud[j + 1]), pud[j + 2]});
    t.variation_params = text::parse_vector(take(key + ".variation"));
    if (t.variation_params.size() != variation_dim(s.type, static_cast<int>(t.puddles.size())))
      throw ParseError(key + ".variation has the wrong length for stream type " + to_string(s.type));
    s.tasks.push_back(std::move(t));
  }
  if (!kv.empty()) throw ParseError("manifest has unknown key '" + kv.begin()->first + "'");
  return s;
}

void save_manifest(const TaskStream& stream, const std::string& path) {
  text::write_file(path, write_manifest(stream));
}

TaskStream load_manifest(const std::string& path) { return read_manifest(text::read_file(path)); }

}  // namespace crl
