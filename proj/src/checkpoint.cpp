#include "crlkit/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "crlkit/config.hpp"
#include "crlkit/errors.hpp"
#include "crlkit/textio.hpp"

namespace crl {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

class Writer {
 public:
  void raw(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void i64(std::int64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void vec(const VectorXd& v) {
    u64(static_cast<std::uint64_t>(v.size()));
    raw(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
  }
  void mat(const MatrixXd& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}
  void raw(void* p, std::size_t n) {
    if (n > in_.size() - pos_) throw ParseError("checkpoint is truncated");
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  std::uint64_t u64() { return get<std::uint64_t>(); }
  std::int64_t i64() { return get<std::int64_t>(); }
  double f64() { return get<double>(); }
  int i32() {
    const auto v = i64();
    if (v < INT32_MIN || v > INT32_MAX) throw ParseError("checkpoint integer out of range");
    return static_cast<int>(v);
  }
  std::size_t count() {
    const auto n = u64();
    if (n > in_.size()) throw ParseError("checkpoint length field is implausible");
    return static_cast<std::size_t>(n);
  }
  std::string str() {
    std::string s(count(), '\0');
    raw(s.data(), s.size());
    return s;
  }
  VectorXd vec() {
    VectorXd v(static_cast<Eigen::Index>(count()));
    raw(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
    return v;
  }
  MatrixXd mat() {
    const auto r = static_cast<Eigen::Index>(count());
    const auto c = static_cast<Eigen::Index>(count());
    MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = f64();
    return m;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  template <class T>
  T get() {
    T v;
    raw(&v, sizeof v);
    return v;
  }
  const std::string& in_;
  std::size_t pos_ = 0;
};

void put_net(Writer& w, const nn::DenseNet& net) {
  w.u64(net.layers.size());
  for (const auto& l : net.layers) {
    w.u32(l.activation == nn::Activation::Relu ? 1 : 0);
    w.mat(l.weight);
    w.vec(l.bias);
  }
}

nn::DenseNet get_net(Reader& r) {
  nn::DenseNet net;
  net.layers.resize(r.count());
  for (auto& l : net.layers) {
    const auto act = r.u32();
    if (act > 1) throw ParseError("checkpoint has an unknown activation");
    l.activation = act ? nn::Activation::Relu : nn::Activation::Identity;
    l.weight = r.mat();
    l.bias = r.vec();
  }
  net.validate();
  return net;
}

}  // namespace

std::string encode_checkpoint(const LearnerState& s) {
  Writer w;
  w.raw(kCheckpointMagic, sizeof kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.str(write_config(s.config));

  w.f64(s.env.start.x());
  w.f64(s.env.start.y());
  w.f64(s.env.action_bound);
  w.f64(s.env.puddle_kappa);
  w.f64(s.env.control_cost);
  w.f64(s.env.goal_tolerance);
  w.i64(s.env.max_steps);

  const auto& p = s.policy;
  w.i64(p.shape.obs_dim);
  w.i64(p.shape.action_dim);
  w.i64(p.shape.shared_hidden);
  w.i64(p.shape.head_hidden);
  w.f64(p.shape.init_log_std);
  put_net(w, p.shared);
  w.u64(p.heads.size());
  for (const auto& h : p.heads) {
    put_net(w, h.net);
    w.vec(h.log_std);
  }

  const auto& g = s.registry;
  w.f64(g.alpha);
  w.f64(g.sigma2);
  w.u32(g.update == CentroidUpdate::Literal ? 1 : 0);
  w.i64(g.t);
  w.u64(g.mu.size());
  for (std::size_t k = 0; k < g.mu.size(); ++k) {
    w.vec(g.mu[k]);
    w.i64(g.counts[k]);
  }

  w.u32(s.optimizer.kind == OptimizerKind::Adam ? 1 : 0);
  w.u64(s.optimizer.m.size());
  for (std::size_t i = 0; i < s.optimizer.m.size(); ++i) {
    w.i64(s.optimizer.steps[i]);
    w.vec(s.optimizer.m[i]);
    w.vec(s.optimizer.v[i]);
  }

  w.str(s.train_rng.state());
  w.i64(s.tasks_done);
  w.i64(s.global_iteration);
  w.u64(s.cluster_heads.size());
  for (const auto& [c, h] : s.cluster_heads) {
    w.i64(c);
    w.i64(h);
  }

  const auto& rec = s.record;
  w.u64(rec.r_ave_series.size());
  for (const auto& e : rec.r_ave_series) {
    w.i64(e.global_iteration);
    w.i64(e.task_index);
    w.f64(e.r_ave);
  }
  w.f64(rec.r_bar_ave);
  w.u64(rec.assignments.size());
  for (int z : rec.assignments) w.i64(z);
  w.i64(rec.K_T);
  w.vec(Eigen::Map<const VectorXd>(rec.forward_transfer.data(), static_cast<Eigen::Index>(rec.forward_transfer.size())));
  w.u64(rec.trace.size());
  for (const auto& t : rec.trace) {
    w.i64(t.task_index);
    w.i64(t.task_id);
    w.i64(t.true_cluster);
    w.vec(t.feature);
    w.vec(t.posterior);
    w.u32(t.is_new ? 1 : 0);
    w.i64(t.z_star);
    w.i64(t.K_after);
    w.i64(t.expanded_from);
  }
  w.u64(rec.train_log.size());
  for (const auto& l : rec.train_log) {
    w.i64(l.task_index);
    w.i64(l.task_id);
    w.i64(l.iteration);
    w.i64(l.global_iteration);
    w.i64(l.head);
    w.f64(l.mean_return);
    w.f64(l.distill_loss);
  }
  w.str(rec.config_echo);
  w.f64(rec.wall_time);
  return w.take();
}

LearnerState decode_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  char magic[8];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) throw ParseError("not a crlkit checkpoint");
  const auto version = r.u32();
  if (version != kCheckpointVersion) throw ParseError("unsupported checkpoint version " + std::to_string(version));

  LearnerState s;
  s.config = parse_config(r.str());
  s.env.start.x() = r.f64();
  s.env.start.y() = r.f64();
  s.env.action_bound = r.f64();
  s.env.puddle_kappa = r.f64();
  s.env.control_cost = r.f64();
  s.env.goal_tolerance = r.f64();
  s.env.max_steps = r.i32();

  auto& p = s.policy;
  p.shape.obs_dim = r.i32();
  p.shape.action_dim = r.i32();
  p.shape.shared_hidden = r.i32();
  p.shape.head_hidden = r.i32();
  p.shape.init_log_std = r.f64();
  p.shared = get_net(r);
  p.heads.resize(r.count());
  for (auto& h : p.heads) {
    h.net = get_net(r);
    h.log_std = r.vec();
  }
  p.validate();

  auto& g = s.registry;
  g.alpha = r.f64();
  g.sigma2 = r.f64();
  g.update = r.u32() ? CentroidUpdate::Literal : CentroidUpdate::Normalized;
  g.t = r.i32();
  const auto K = r.count();
  for (std::size_t k = 0; k < K; ++k) {
    g.mu.push_back(r.vec());
    g.counts.push_back(r.i32());
  }
  g.check();

  s.optimizer.kind = r.u32() ? OptimizerKind::Adam : OptimizerKind::Sgd;
  const auto n_opt = r.count();
  for (std::size_t i = 0; i < n_opt; ++i) {
    s.optimizer.steps.push_back(r.i64());
    s.optimizer.m.push_back(r.vec());
    s.optimizer.v.push_back(r.vec());
  }

  s.train_rng.set_state(r.str());
  s.tasks_done = r.i32();
  s.global_iteration = r.i64();
  const auto n_map = r.count();
  for (std::size_t i = 0; i < n_map; ++i) {
    const int c = r.i32();
    s.cluster_heads[c] = r.i32();
  }

  auto& rec = s.record;
  rec.r_ave_series.resize(r.count());
  for (auto& e : rec.r_ave_series) {
    e.global_iteration = r.i64();
    e.task_index = r.i32();
    e.r_ave = r.f64();
  }
  rec.r_bar_ave = r.f64();
  rec.assignments.resize(r.count());
  for (auto& z : rec.assignments) z = r.i32();
  rec.K_T = r.i32();
  const VectorXd ft = r.vec();
  rec.forward_transfer.assign(ft.data(), ft.data() + ft.size());
  rec.trace.resize(r.count());
  for (auto& t : rec.trace) {
    t.task_index = r.i32();
    t.task_id = r.i32();
    t.true_cluster = r.i32();
    t.feature = r.vec();
    t.posterior = r.vec();
    t.is_new = r.u32() != 0;
    t.z_star = r.i32();
    t.K_after = r.i32();
    t.expanded_from = r.i32();
  }
  rec.train_log.resize(r.count());
  for (auto& l : rec.train_log) {
    l.task_index = r.i32();
    l.task_id = r.i32();
    l.iteration = r.i32();
    l.global_iteration = r.i64();
    l.head = r.i32();
    l.mean_return = r.f64();
    l.distill_loss = r.f64();
  }
  rec.config_echo = r.str();
  rec.wall_time = r.f64();
  if (!r.done()) throw ParseError("checkpoint has trailing bytes");
  return s;
}

void save_checkpoint(const LearnerState& state, const std::string& path) {
  text::write_file(path, encode_checkpoint(state));
}

LearnerState load_checkpoint(const std::string& path) { return decode_checkpoint(text::read_file(path)); }

}  // namespace crl
