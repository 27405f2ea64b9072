#include "crlkit/config.hpp"

#include <functional>
#include <map>

#include "crlkit/errors.hpp"
#include "crlkit/textio.hpp"

namespace crl {

namespace {

using text::format_double;

struct Field {
  std::function<std::string(const LearnerConfig&)> get;
  std::function<void(LearnerConfig&, const std::string&)> set;
};

int to_int(const std::string& v) {
  const auto n = text::parse_int(v);
  if (n < INT32_MIN || n > INT32_MAX) throw ParseError("integer out of range: " + v);
  return static_cast<int>(n);
}

std::string update_name(CentroidUpdate u) { return u == CentroidUpdate::Normalized ? "normalized" : "literal"; }

CentroidUpdate parse_update(const std::string& v) {
  if (v == "normalized") return CentroidUpdate::Normalized;
  if (v == "literal") return CentroidUpdate::Literal;
  throw ParseError("unknown centroid_update '" + v + "'");
}

#define REAL(name) \
  {#name, {[](const LearnerConfig& c) { return format_double(c.name); }, \
           [](LearnerConfig& c, const std::string& v) { c.name = text::parse_double(v); }}}
#define INT(name) \
  {#name, {[](const LearnerConfig& c) { return std::to_string(c.name); }, \
           [](LearnerConfig& c, const std::string& v) { c.name = to_int(v); }}}
#define ENUM(name, parse) \
  {#name, {[](const LearnerConfig& c) { return to_string(c.name); }, \
           [](LearnerConfig& c, const std::string& v) { c.name = parse(v); }}}

// Ordered as written to config.resolved.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> f = {
      ENUM(mode, parse_mode),
      {"seed", {[](const LearnerConfig& c) { return std::to_string(c.seed); },
                [](LearnerConfig& c, const std::string& v) { c.seed = text::parse_u64(v); }}},
      REAL(alpha),
      REAL(sigma2),
      {"centroid_update", {[](const LearnerConfig& c) { return update_name(c.centroid_update); },
                           [](LearnerConfig& c, const std::string& v) { c.centroid_update = parse_update(v); }}},
      INT(m_explore),
      INT(fixed_k),
      ENUM(head_init, parse_head_init),
      INT(shared_hidden),
      INT(head_hidden),
      REAL(init_log_std),
      REAL(lambda),
      REAL(beta),
      REAL(gamma),
      INT(iterations_per_task),
      INT(batch_size),
      ENUM(estimator, parse_estimator),
      ENUM(baseline, parse_baseline),
      ENUM(optimizer, parse_optimizer),
      REAL(adam_beta1),
      REAL(adam_beta2),
      REAL(adam_eps),
      INT(distill_states),
      INT(eval_every),
      INT(eval_episodes),
      {"eval_stochastic", {[](const LearnerConfig& c) { return std::string(c.eval_stochastic ? "true" : "false"); },
                           [](LearnerConfig& c, const std::string& v) { c.eval_stochastic = text::parse_bool(v); }}},
  };
  return f;
}

#undef REAL
#undef INT
#undef ENUM

}  // namespace

std::string write_config(const LearnerConfig& config) {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + " = " + field.get(config) + "\n";
  return out;
}

void set_config_value(LearnerConfig& config, const std::string& key, const std::string& value) {
  for (const auto& [k, field] : fields()) {
    if (k != key) continue;
    try {
      field.set(config, std::string(text::trim(value)));
    } catch (const ParseError& e) {
      throw ParseError("config key '" + key + "': " + e.what());
    }
    return;
  }
  throw ParseError("unknown config key '" + key + "'");
}

LearnerConfig parse_config(const std::string& body, const LearnerConfig& base) {
  LearnerConfig c = base;
  for (const auto& [k, v] : text::parse_key_values(body)) set_config_value(c, k, v);
  c.validate();
  return c;
}

LearnerConfig load_config(const std::string& path, const LearnerConfig& base) {
  return parse_config(text::read_file(path), base);
}

}  // namespace crl
