#include "omega_avg/learners.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "omega_avg/errors.hpp"

namespace omega_avg {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::DiffQ: return "diff-q";
    case Method::HahnQ: return "hahn-q";
    case Method::BozkurtQ: return "bozkurt-q";
  }
  return "diff-q";
}

Method parse_method(std::string_view name) {
  if (name == "diff-q") return Method::DiffQ;
  if (name == "hahn-q") return Method::HahnQ;
  if (name == "bozkurt-q") return Method::BozkurtQ;
  throw Error(ErrorCode::BadConfig, "unknown method '" + std::string(name) + "'");
}

void validate_config(const LearnerConfig& cfg, Method method) {
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw Error(ErrorCode::BadConfig, "alpha must lie in (0,1]");
  if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0)) throw Error(ErrorCode::BadConfig, "epsilon must lie in [0,1]");
  if (!(cfg.alpha_decay >= 0.0)) throw Error(ErrorCode::BadConfig, "alpha decay must be nonnegative");
  if (cfg.episodic && cfg.episode_length == 0) throw Error(ErrorCode::BadConfig, "episode length must be positive");
  switch (method) {
    case Method::DiffQ:
      if (!(cfg.eta > 0.0)) throw Error(ErrorCode::BadConfig, "eta must be positive");
      break;
    case Method::HahnQ:
      if (!(cfg.zeta > 0.0 && cfg.zeta < 1.0)) throw Error(ErrorCode::BadZeta, "zeta must lie in (0,1)");
      if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw Error(ErrorCode::BadGamma, "gamma must lie in (0,1)");
      break;
    case Method::BozkurtQ:
      if (!(cfg.gamma_b > 0.0 && cfg.gamma_b < 1.0)) throw Error(ErrorCode::BadGamma, "gamma_b must lie in (0,1)");
      if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw Error(ErrorCode::BadGamma, "gamma must lie in (0,1)");
      break;
  }
}

std::size_t argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (row[i] > row[best]) best = i;
  }
  return best;
}

ProductPolicy greedy_policy(const QTable& q, const std::vector<std::optional<ProductState>>& row_states,
                            const std::vector<std::vector<ProductAction>>& row_actions) {
  ProductPolicy policy;
  for (std::size_t i = 0; i < q.values.size(); ++i) {
    if (!row_states[i] || q.values[i].empty()) continue;
    policy.emplace(*row_states[i], row_actions[i][argmax(q.values[i])]);
  }
  return policy;
}

namespace {

VisitStats visit_stats(const std::vector<std::vector<std::uint64_t>>& visits) {
  VisitStats st;
  std::uint64_t min_positive = 0;
  bool first = true;
  for (const auto& row : visits) {
    if (row.empty()) continue;
    ++st.visited_states;
    for (std::uint64_t c : row) {
      ++st.known_pairs;
      if (first) {
        st.min_count = c;
        first = false;
      }
      st.max_count = std::max(st.max_count, c);
      st.min_count = std::min(st.min_count, c);
      if (c > 0) {
        ++st.visited_pairs;
        min_positive = min_positive == 0 ? c : std::min(min_positive, c);
      }
    }
  }
  st.max_min_ratio = min_positive > 0 ? static_cast<double>(st.max_count) / static_cast<double>(min_positive) : 0.0;
  return st;
}

std::uint64_t trace_stride(const LearnerConfig& cfg) {
  if (cfg.trace_points == 0) return 0;
  return std::max<std::uint64_t>(1, cfg.steps / cfg.trace_points);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

TrainResult differential_q_train(ProductEnv& env, const LearnerConfig& cfg) {
  validate_config(cfg, Method::DiffQ);
  const auto start = std::chrono::steady_clock::now();
  Rng rng(cfg.seed);
  TrainResult out;
  auto& q = out.q.values;
  auto ensure = [&](std::size_t id) {
    if (id >= q.size()) {
      q.resize(id + 1);
      out.visits.resize(id + 1);
    }
    if (q[id].empty()) {
      const std::size_t n = env.num_actions(id);
      q[id].assign(n, 0.0);
      out.visits[id].assign(n, 0);
    }
  };

  const std::uint64_t stride = trace_stride(cfg);
  double& r_bar = out.q.r_bar;
  std::size_t s = env.initial();
  ensure(s);
  for (std::uint64_t t = 0; t < cfg.steps; ++t) {
    const std::size_t n = q[s].size();
    std::size_t a;
    if (rng.uniform() < cfg.epsilon) {
      a = rng.below(n);
    } else {
      a = argmax(q[s]);
    }
    const auto st = env.step(s, a, rng, env.machine().beta_at(t));
    ensure(st.next);
    const double alpha = cfg.alpha / (1.0 + static_cast<double>(t) * cfg.alpha_decay);
    const auto& next_row = q[st.next];
    const double delta = st.reward - r_bar + next_row[argmax(next_row)] - q[s][a];
    q[s][a] += alpha * delta;
    r_bar += cfg.eta * alpha * delta;
    ++out.visits[s][a];
    if (stride && (t + 1) % stride == 0) out.r_bar_trace.emplace_back(t + 1, r_bar);
    s = st.next;
  }
  out.steps_taken = cfg.steps;

  out.row_states.resize(q.size());
  out.row_actions.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i].empty()) continue;
    out.row_states[i] = env.state(i);
    out.row_actions[i] = env.node(i).actions;
  }
  out.greedy = greedy_policy(out.q, out.row_states, out.row_actions);
  out.stats = visit_stats(out.visits);
  out.wall_time_s = seconds_since(start);
  return out;
}

// ---------------------------------------------------------------------------

DiscountedEnv DiscountedEnv::hahn(ProductEnv& env, double zeta, double gamma) {
  if (!(zeta > 0.0 && zeta < 1.0)) throw Error(ErrorCode::BadZeta, "zeta must lie in (0,1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorCode::BadGamma, "gamma must lie in (0,1)");
  return DiscountedEnv(env, Kind::Hahn, zeta, gamma);
}

DiscountedEnv DiscountedEnv::bozkurt(ProductEnv& env, double gamma_b, double gamma) {
  if (!(gamma_b > 0.0 && gamma_b < 1.0)) throw Error(ErrorCode::BadGamma, "gamma_b must lie in (0,1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorCode::BadGamma, "gamma must lie in (0,1)");
  return DiscountedEnv(env, Kind::Bozkurt, gamma_b, gamma);
}

std::size_t DiscountedEnv::num_actions(std::size_t id) { return id == 0 ? 1 : env_->num_actions(id - 1); }

DiscountedEnv::Step DiscountedEnv::step(std::size_t id, std::size_t action, Rng& rng) {
  if (id == 0) return {0, 0.0, gamma_, true};
  const auto st = env_->step(id - 1, action, rng, 0.0);
  if (kind_ == Kind::Hahn) {
    if (st.accepting && rng.bernoulli(1.0 - p_)) return {0, 1.0, gamma_, true};
    return {st.next + 1, 0.0, gamma_, false};
  }
  if (st.accepting) return {st.next + 1, 1.0 - p_, p_, false};
  return {st.next + 1, 0.0, gamma_, false};
}

TrainResult discounted_q_train(DiscountedEnv& env, const LearnerConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw Error(ErrorCode::BadConfig, "alpha must lie in (0,1]");
  if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0)) throw Error(ErrorCode::BadConfig, "epsilon must lie in [0,1]");
  if (cfg.episodic && cfg.episode_length == 0) throw Error(ErrorCode::BadConfig, "episode length must be positive");
  const auto start = std::chrono::steady_clock::now();
  Rng rng(cfg.seed);
  TrainResult out;
  auto& q = out.q.values;
  auto ensure = [&](std::size_t id) {
    if (id >= q.size()) {
      q.resize(id + 1);
      out.visits.resize(id + 1);
    }
    if (q[id].empty()) {
      const std::size_t n = env.num_actions(id);
      q[id].assign(n, 0.0);
      out.visits[id].assign(n, 0);
    }
  };

  std::size_t s = env.initial();
  std::uint64_t in_episode = 0;
  ensure(s);
  for (std::uint64_t t = 0; t < cfg.steps; ++t) {
    const std::size_t n = q[s].size();
    std::size_t a;
    if (rng.uniform() < cfg.epsilon) {
      a = rng.below(n);
    } else {
      a = argmax(q[s]);
    }
    const auto st = env.step(s, a, rng);
    ensure(st.next);
    const double alpha = cfg.alpha / (1.0 + static_cast<double>(t) * cfg.alpha_decay);
    const auto& next_row = q[st.next];
    const bool stop = st.terminal && cfg.episodic;
    const double target = st.reward + (stop ? 0.0 : st.discount * next_row[argmax(next_row)]);
    q[s][a] += alpha * (target - q[s][a]);
    ++out.visits[s][a];
    s = st.next;
    ++in_episode;
    if (cfg.episodic && (stop || in_episode >= cfg.episode_length)) {
      s = env.initial();
      in_episode = 0;
    }
  }
  out.steps_taken = cfg.steps;

  out.row_states.resize(q.size());
  out.row_actions.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const auto pid = env.product_id(i);
    if (q[i].empty() || !pid) continue;
    out.row_states[i] = env.product().state(*pid);
    out.row_actions[i] = env.product().node(*pid).actions;
  }
  out.greedy = greedy_policy(out.q, out.row_states, out.row_actions);
  out.stats = visit_stats(out.visits);
  out.wall_time_s = seconds_since(start);
  return out;
}

}  // namespace omega_avg
