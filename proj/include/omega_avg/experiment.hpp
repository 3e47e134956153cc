#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "omega_avg/automaton.hpp"
#include "omega_avg/benchmarks.hpp"
#include "omega_avg/learners.hpp"
#include "omega_avg/mdp.hpp"
#include "omega_avg/product.hpp"
#include "omega_avg/reward_machine.hpp"

namespace omega_avg {

inline constexpr std::string_view kVersion = "0.1.0";

enum class MachineChoice { Reset, ResetHard, Lexicographic };

std::string_view to_string(MachineChoice m);
MachineChoice parse_machine(std::string_view name);

/// Everything that determines one training run besides the model itself.
struct RunSpec {
  std::string benchmark;
  Method method = Method::DiffQ;
  MachineChoice machine = MachineChoice::Reset;
  LearnerConfig learner;
  /// Reset reward of R_A.
  double c = -1.0;
  double beta = 0.05;
  /// Defaults to default_c1(rho).
  std::optional<double> c1;
  double c2 = -100.0;
  /// beta(i) = beta / (1 + i / scale) when set.
  std::optional<double> beta_schedule_scale;
  /// Flip probability at which the greedy lexicographic policy is evaluated
  /// in the limit (the policy is kept, only beta shrinks).
  double eval_beta = 1e-6;
  /// Write wall_time_s as 0 so that result files are byte-identical.
  bool reproducible = false;
};

/// Machine used for learning with diff-q.
std::shared_ptr<const RewardMachine> make_machine(const BuchiAutomaton& aut, const ExternalReward& rho,
                                                  const RunSpec& spec);

struct Evaluation {
  double sat_prob = 0.0;
  /// Gain of the learning product's own rewards (machine rewards for diff-q,
  /// accepting-edge frequency on M x A for the baselines).
  double product_gain = 0.0;
  /// External reward per MDP step at the training beta (lexicographic only).
  std::optional<double> external_gain;
  /// Same policy evaluated at eval_beta (lexicographic only).
  std::optional<double> external_gain_limit;
  std::size_t product_states = 0;
  std::size_t unvisited_defaulted = 0;
  double residual = 0.0;

  /// The CSV avg_reward column: external_gain_limit for the lexicographic
  /// machine, product_gain otherwise.
  double avg_reward() const noexcept { return external_gain_limit.value_or(product_gain); }
};

struct RunOutcome {
  TrainResult train;
  Evaluation eval;
  /// Machine of the learning product (plain M x A for the baselines).
  std::shared_ptr<const RewardMachine> machine;
};

RunOutcome run_learning(std::shared_ptr<const Mdp> mdp, const BuchiAutomaton& aut, const ExternalReward& rho,
                        const RunSpec& spec);

/// Exact evaluation of a product policy on the product the method learns on.
Evaluation evaluate_policy(std::shared_ptr<const Mdp> mdp, const BuchiAutomaton& aut, const ExternalReward& rho,
                           const RunSpec& spec, const ProductPolicy& policy);

nlohmann::json spec_to_json(const RunSpec& spec);
RunSpec spec_from_json(const nlohmann::json& config);
nlohmann::json outcome_to_json(const RunSpec& spec, const RunOutcome& outcome, const Mdp& mdp,
                               const RewardMachine& machine);

/// Reads the "policy" array of a result document against an explicit
/// product. Throws PolicyMismatch on unknown actions.
ProductPolicy policy_from_json(const nlohmann::json& doc, const ExplicitProduct& product);

/// Explicit product the method learns on (plain M x A for the baselines).
ExplicitProduct learning_product(std::shared_ptr<const Mdp> mdp, const BuchiAutomaton& aut, const ExternalReward& rho,
                                 const RunSpec& spec, std::optional<double> beta = std::nullopt);

// ---------------------------------------------------------------------------
// Sweeps

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// exp(U(log lo, log hi)); D(x, x) is x. Throws BadRange unless 0 < lo <= hi.
double log_uniform(const Range& r, Rng& rng);

/// Sampling order (fixed): alpha, eta, epsilon, c, zeta, gamma_b, gamma, then
/// the run seed as one raw 64-bit draw.
inline const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> names = {"alpha", "eta", "epsilon", "c", "zeta", "gamma_b", "gamma"};
  return names;
}

/// Log-uniform ranges used for hyperparameter sweeps by default.
std::map<std::string, Range> default_ranges();

struct SweepSpec {
  RunSpec base;
  std::map<std::string, Range> ranges = default_ranges();
  std::size_t samples = 200;
  std::uint64_t master_seed = 0;
  /// 0 = hardware concurrency, capped by OMEGA_AVG_RL_THREADS.
  unsigned threads = 0;
};

struct SampledParams {
  std::map<std::string, double> values;
  std::uint64_t seed = 0;
};

/// Deterministic in (master_seed, index): uses Rng::stream(master_seed, index).
SampledParams sample_hyperparameters(const SweepSpec& spec, std::size_t index);

/// Run specification of sample `index`. The sampled c is a magnitude: the
/// reset machine uses c = -c and the lexicographic machine c2 = -c.
RunSpec sweep_run_spec(const SweepSpec& spec, std::size_t index);

std::string csv_header();
std::string csv_row(const RunSpec& spec, const Evaluation& eval, double wall_time_s);

/// Runs every sample on a worker pool and returns the CSV document (metadata
/// comment, header, rows in index order).
std::string run_sweep(const SweepSpec& spec, const Benchmark& bench);

/// Worker count: min(requested or hardware concurrency, OMEGA_AVG_RL_THREADS, jobs).
unsigned worker_count(unsigned requested, std::size_t jobs);

}  // namespace omega_avg
