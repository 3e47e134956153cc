#include "omega_avg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "omega_avg/errors.hpp"
#include "omega_avg/verifier.hpp"

namespace omega_avg {

using nlohmann::json;

std::string_view to_string(MachineChoice m) {
  switch (m) {
    case MachineChoice::Reset: return "reset";
    case MachineChoice::ResetHard: return "reset-hard";
    case MachineChoice::Lexicographic: return "lexicographic";
  }
  return "reset";
}

MachineChoice parse_machine(std::string_view name) {
  if (name == "reset") return MachineChoice::Reset;
  if (name == "reset-hard") return MachineChoice::ResetHard;
  if (name == "lexicographic") return MachineChoice::Lexicographic;
  throw Error(ErrorCode::BadConfig, "unknown machine '" + std::string(name) + "'");
}

std::shared_ptr<const RewardMachine> make_machine(const BuchiAutomaton& aut, const ExternalReward& rho,
                                                  const RunSpec& spec) {
  switch (spec.machine) {
    case MachineChoice::Reset: return build_reset_machine(aut, spec.c, false);
    case MachineChoice::ResetHard: return build_reset_machine(aut, spec.c, true);
    case MachineChoice::Lexicographic: {
      LexicographicParams p;
      p.beta = spec.beta;
      p.c1 = spec.c1.value_or(default_c1(rho));
      p.c2 = spec.c2;
      if (spec.beta_schedule_scale) p.schedule = BetaSchedule::harmonic(spec.beta, *spec.beta_schedule_scale);
      return build_lexicographic_machine(aut, rho, std::move(p));
    }
  }
  throw Error(ErrorCode::BadConfig, "unknown machine");
}

namespace {

std::shared_ptr<const RewardMachine> learning_machine(const BuchiAutomaton& aut, const ExternalReward& rho,
                                                      const RunSpec& spec) {
  if (spec.method == Method::DiffQ) return make_machine(aut, rho, spec);
  return std::make_shared<const AutomatonMachine>(aut);
}

}  // namespace

ExplicitProduct learning_product(std::shared_ptr<const Mdp> mdp, const BuchiAutomaton& aut, const ExternalReward& rho,
                                 const RunSpec& spec, std::optional<double> beta) {
  return build_explicit_product(std::move(mdp), learning_machine(aut, rho, spec), beta);
}

Evaluation evaluate_policy(std::shared_ptr<const Mdp> mdp, const BuchiAutomaton& aut, const ExternalReward& rho,
                           const RunSpec& spec, const ProductPolicy& policy) {
  const auto product = learning_product(mdp, aut, rho, spec);
  const auto resolved = resolve_policy(product, policy);
  Evaluation ev;
  ev.product_states = product.num_states();
  ev.unvisited_defaulted = resolved.defaulted;
  const auto sat = policy_satisfaction_probability(product, resolved.actions);
  const auto gain = policy_average_reward(product.mdp, resolved.actions);
  ev.sat_prob = sat.value;
  ev.product_gain = gain.value;
  ev.residual = std::max(sat.residual, gain.residual);
  if (spec.method == Method::DiffQ && spec.machine == MachineChoice::Lexicographic) {
    const auto ext = policy_external_gain(product, resolved.actions);
    ev.external_gain = ext.value;
    const auto limit_product = learning_product(mdp, aut, rho, spec, spec.eval_beta);
    const auto limit_policy = resolve_policy(limit_product, policy);
    const auto limit = policy_external_gain(limit_product, limit_policy.actions);
    ev.external_gain_limit = limit.value;
    ev.residual = std::max({ev.residual, ext.residual, limit.residual});
  }
  return ev;
}

RunOutcome run_learning(std::shared_ptr<const Mdp> mdp, const BuchiAutomaton& aut, const ExternalReward& rho,
                        const RunSpec& spec) {
  validate_config(spec.learner, spec.method);
  const auto machine = learning_machine(aut, rho, spec);
  ProductEnv env(mdp, machine);
  RunOutcome out;
  out.machine = machine;
  switch (spec.method) {
    case Method::DiffQ: out.train = differential_q_train(env, spec.learner); break;
    case Method::HahnQ: {
      auto wrapped = DiscountedEnv::hahn(env, spec.learner.zeta, spec.learner.gamma);
      out.train = discounted_q_train(wrapped, spec.learner);
      break;
    }
    case Method::BozkurtQ: {
      auto wrapped = DiscountedEnv::bozkurt(env, spec.learner.gamma_b, spec.learner.gamma);
      out.train = discounted_q_train(wrapped, spec.learner);
      break;
    }
  }
  out.eval = evaluate_policy(mdp, aut, rho, spec, out.train.greedy);
  if (spec.reproducible) out.train.wall_time_s = 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json state_json(const ProductState& s) {
  return {{"s", s.mdp_state}, {"q", s.machine.automaton_state}, {"b", s.machine.bit}};
}

}  // namespace

json spec_to_json(const RunSpec& spec) {
  const auto& l = spec.learner;
  return {{"benchmark", spec.benchmark},
          {"method", to_string(spec.method)},
          {"machine", to_string(spec.machine)},
          {"alpha", l.alpha},
          {"eta", l.eta},
          {"epsilon", l.epsilon},
          {"alpha_decay", l.alpha_decay},
          {"steps", l.steps},
          {"seed", l.seed},
          {"gamma", l.gamma},
          {"zeta", l.zeta},
          {"gamma_b", l.gamma_b},
          {"episodic", l.episodic},
          {"episode_length", l.episode_length},
          {"c", spec.c},
          {"beta", spec.beta},
          {"c1", opt(spec.c1)},
          {"c2", spec.c2},
          {"beta_schedule_scale", opt(spec.beta_schedule_scale)},
          {"eval_beta", spec.eval_beta}};
}

RunSpec spec_from_json(const json& c) {
  RunSpec s;
  s.benchmark = c.value("benchmark", "");
  s.method = parse_method(c.at("method").get<std::string>());
  s.machine = parse_machine(c.at("machine").get<std::string>());
  auto& l = s.learner;
  l.alpha = c.at("alpha").get<double>();
  l.eta = c.at("eta").get<double>();
  l.epsilon = c.at("epsilon").get<double>();
  l.alpha_decay = c.value("alpha_decay", 0.0);
  l.steps = c.at("steps").get<std::uint64_t>();
  l.seed = c.at("seed").get<std::uint64_t>();
  l.gamma = c.at("gamma").get<double>();
  l.zeta = c.at("zeta").get<double>();
  l.gamma_b = c.at("gamma_b").get<double>();
  l.episodic = c.value("episodic", false);
  l.episode_length = c.value("episode_length", std::uint64_t{1000});
  s.c = c.at("c").get<double>();
  s.beta = c.at("beta").get<double>();
  if (c.contains("c1") && !c["c1"].is_null()) s.c1 = c["c1"].get<double>();
  s.c2 = c.at("c2").get<double>();
  if (c.contains("beta_schedule_scale") && !c["beta_schedule_scale"].is_null()) {
    s.beta_schedule_scale = c["beta_schedule_scale"].get<double>();
  }
  s.eval_beta = c.value("eval_beta", 1e-6);
  return s;
}

json outcome_to_json(const RunSpec& spec, const RunOutcome& outcome, const Mdp& mdp, const RewardMachine& machine) {
  const auto& t = outcome.train;
  json doc;
  doc["version"] = kVersion;
  doc["config"] = spec_to_json(spec);
  doc["steps_taken"] = t.steps_taken;
  doc["wall_time_s"] = spec.reproducible ? 0.0 : t.wall_time_s;
  if (spec.method == Method::DiffQ) {
    doc["r_bar"] = t.q.r_bar;
    json trace = json::array();
    for (const auto& [step, v] : t.r_bar_trace) trace.push_back({step, v});
    doc["r_bar_trace"] = std::move(trace);
  }
  doc["visits"] = {{"visited_states", t.stats.visited_states},
                   {"known_pairs", t.stats.known_pairs},
                   {"visited_pairs", t.stats.visited_pairs},
                   {"max_count", t.stats.max_count},
                   {"min_count", t.stats.min_count},
                   {"max_min_ratio", t.stats.max_min_ratio}};

  json policy = json::array();
  for (const auto& [state, action] : t.greedy) {
    policy.push_back({{"state", state_json(state)},
                      {"name", state_name(state, machine)},
                      {"action", action_name(mdp, machine, state, action)}});
  }
  doc["policy"] = std::move(policy);

  json q = json::array();
  for (std::size_t i = 0; i < t.q.values.size(); ++i) {
    if (t.q.values[i].empty()) continue;
    json row;
    if (t.row_states[i]) {
      row["state"] = state_json(*t.row_states[i]);
      json names = json::array();
      for (const auto& a : t.row_actions[i]) names.push_back(action_name(mdp, machine, *t.row_states[i], a));
      row["actions"] = std::move(names);
    } else {
      row["state"] = "target";
    }
    row["values"] = t.q.values[i];
    row["visits"] = t.visits[i];
    q.push_back(std::move(row));
  }
  doc["q_values"] = std::move(q);

  const auto& e = outcome.eval;
  doc["verification"] = {{"sat_prob", e.sat_prob},
                         {"avg_reward", e.avg_reward()},
                         {"product_gain", e.product_gain},
                         {"external_gain", opt(e.external_gain)},
                         {"external_gain_limit", opt(e.external_gain_limit)},
                         {"product_states", e.product_states},
                         {"unvisited_defaulted", e.unvisited_defaulted},
                         {"residual", e.residual}};
  return doc;
}

ProductPolicy policy_from_json(const json& doc, const ExplicitProduct& product) {
  ProductPolicy policy;
  for (const auto& entry : doc.at("policy")) {
    const auto& st = entry.at("state");
    const ProductState ps{st.at("s").get<StateId>(),
                          {st.at("q").get<std::size_t>(), static_cast<std::uint8_t>(st.at("b").get<int>())}};
    const auto id = product.find(ps);
    if (!id) throw Error(ErrorCode::PolicyMismatch, "policy state " + state_name(ps, *product.machine) + " not in product");
    const std::string name = entry.at("action").get<std::string>();
    bool found = false;
    for (std::size_t a = 0; a < product.actions[*id].size(); ++a) {
      if (product.mdp.action_name(*id, a) == name) {
        policy.emplace(ps, product.actions[*id][a]);
        found = true;
        break;
      }
    }
    if (!found) {
      throw Error(ErrorCode::PolicyMismatch,
                  "action '" + name + "' not offered at " + state_name(ps, *product.machine));
    }
  }
  return policy;
}

// ---------------------------------------------------------------------------
// Sweeps

double log_uniform(const Range& r, Rng& rng) {
  const double u = rng.uniform();
  if (!(r.lo > 0.0 && r.lo <= r.hi) || !std::isfinite(r.hi)) {
    throw Error(ErrorCode::BadRange, "log-uniform range needs 0 < lo <= hi");
  }
  if (r.lo == r.hi) return r.lo;
  const double a = std::log(r.lo), b = std::log(r.hi);
  return std::clamp(std::exp(a + u * (b - a)), r.lo, r.hi);
}

std::map<std::string, Range> default_ranges() {
  return {{"alpha", {0.01, 0.5}},   {"eta", {0.01, 0.5}},     {"epsilon", {0.01, 1.0}},     {"c", {1.0, 200.0}},
          {"zeta", {0.5, 0.995}}, {"gamma_b", {0.5, 0.995}}, {"gamma", {0.99, 0.99999}}};
}

SampledParams sample_hyperparameters(const SweepSpec& spec, std::size_t index) {
  for (const auto& [name, r] : spec.ranges) {
    if (std::find(sweep_parameters().begin(), sweep_parameters().end(), name) == sweep_parameters().end()) {
      throw Error(ErrorCode::BadRange, "unknown sweep parameter '" + name + "'");
    }
    if (!(r.lo > 0.0 && r.lo <= r.hi)) throw Error(ErrorCode::BadRange, "bad range for " + name);
  }
  Rng rng = Rng::stream(spec.master_seed, index);
  SampledParams out;
  for (const auto& name : sweep_parameters()) {
    const auto it = spec.ranges.find(name);
    if (it == spec.ranges.end()) {
      rng.uniform();  // keep later draws aligned
      continue;
    }
    out.values[name] = log_uniform(it->second, rng);
  }
  out.seed = rng.next_u64();
  return out;
}

RunSpec sweep_run_spec(const SweepSpec& spec, std::size_t index) {
  const auto p = sample_hyperparameters(spec, index);
  RunSpec run = spec.base;
  auto set = [&](const char* name, double& field) {
    if (const auto it = p.values.find(name); it != p.values.end()) field = it->second;
  };
  set("alpha", run.learner.alpha);
  set("eta", run.learner.eta);
  set("epsilon", run.learner.epsilon);
  set("zeta", run.learner.zeta);
  set("gamma_b", run.learner.gamma_b);
  set("gamma", run.learner.gamma);
  if (const auto it = p.values.find("c"); it != p.values.end()) {
    run.c = -it->second;
    run.c2 = -it->second;
  }
  run.learner.seed = p.seed;
  return run;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string csv_header() {
  return "benchmark,method,alpha,eta,epsilon,c,beta,c1,c2,zeta,gamma_b,gamma,steps,seed,wall_time_s,sat_prob,avg_reward,"
         "product_states";
}

std::string csv_row(const RunSpec& spec, const Evaluation& eval, double wall_time_s) {
  const bool diff = spec.method == Method::DiffQ;
  const bool lex = diff && spec.machine == MachineChoice::Lexicographic;
  const bool reset = diff && !lex;
  const auto& l = spec.learner;
  std::ostringstream out;
  out << spec.benchmark << ',' << to_string(spec.method) << ',' << num(l.alpha) << ',' << (diff ? num(l.eta) : "")
      << ',' << num(l.epsilon) << ',' << (reset ? num(spec.c) : "") << ',' << (lex ? num(spec.beta) : "") << ','
      << (lex && spec.c1 ? num(*spec.c1) : "") << ',' << (lex ? num(spec.c2) : "") << ','
      << (spec.method == Method::HahnQ ? num(l.zeta) : "") << ','
      << (spec.method == Method::BozkurtQ ? num(l.gamma_b) : "") << ',' << (diff ? "" : num(l.gamma)) << ','
      << l.steps << ',' << l.seed << ',' << num(wall_time_s) << ',' << num(eval.sat_prob) << ','
      << num(eval.avg_reward()) << ',' << eval.product_states;
  return out.str();
}

unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned n = requested ? requested : std::max(1U, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("OMEGA_AVG_RL_THREADS")) {
    const long v = std::strtol(cap, nullptr, 10);
    if (v > 0) n = std::min(n, static_cast<unsigned>(v));
  }
  n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
  return std::max(1U, n);
}

std::string run_sweep(const SweepSpec& spec, const Benchmark& bench) {
  if (spec.samples == 0) throw Error(ErrorCode::BadConfig, "sweep needs at least one sample");
  // Fail on bad ranges before starting any worker.
  sample_hyperparameters(spec, 0);

  std::vector<std::string> rows(spec.samples);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= spec.samples) return;
      try {
        RunSpec run = sweep_run_spec(spec, i);
        if (run.machine == MachineChoice::Lexicographic && !run.c1) run.c1 = default_c1(bench.rho);
        const auto outcome = run_learning(bench.mdp, bench.automaton, bench.rho, run);
        rows[i] = csv_row(run, outcome.eval, spec.base.reproducible ? 0.0 : outcome.train.wall_time_s);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n = worker_count(spec.threads, spec.samples);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::ostringstream out;
  out << "# omega-avg " << kVersion << " sweep benchmark=" << spec.base.benchmark
      << " method=" << to_string(spec.base.method) << " machine=" << to_string(spec.base.machine)
      << " samples=" << spec.samples << " steps=" << spec.base.learner.steps << " master_seed=" << spec.master_seed
      << '\n';
  out << csv_header() << '\n';
  for (const auto& r : rows) out << r << '\n';
  return out.str();
}

}  // namespace omega_avg
