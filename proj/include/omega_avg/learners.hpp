#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "omega_avg/product.hpp"
#include "omega_avg/rng.hpp"
#include "omega_avg/verifier.hpp"

namespace omega_avg {

struct LearnerConfig {
  double alpha = 0.1;
  double eta = 0.1;
  double epsilon = 0.1;
  /// alpha_t = alpha / (1 + t * alpha_decay); 0 keeps alpha constant.
  double alpha_decay = 0.0;
  std::uint64_t steps = 1'000'000;
  std::uint64_t seed = 0;
  double gamma = 0.99;
  double zeta = 0.99;
  double gamma_b = 0.99;
  bool episodic = false;
  std::uint64_t episode_length = 1000;
  std::size_t trace_points = 1000;
};

enum class Method { DiffQ, HahnQ, BozkurtQ };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

/// Throws BadConfig, BadZeta or BadGamma.
void validate_config(const LearnerConfig& cfg, Method method);

/// Action values indexed by the learner's state ids (rows are created when a
/// state is first reached) and the average-reward estimate.
struct QTable {
  std::vector<std::vector<double>> values;
  double r_bar = 0.0;
};

/// Lowest index among the maximal entries.
std::size_t argmax(std::span<const double> row);

struct VisitStats {
  std::size_t visited_states = 0;
  std::size_t known_pairs = 0;
  std::size_t visited_pairs = 0;
  std::uint64_t max_count = 0;
  std::uint64_t min_count = 0;
  /// max / min over pairs with a positive count.
  double max_min_ratio = 0.0;
};

struct TrainResult {
  ProductPolicy greedy;
  std::vector<std::pair<std::uint64_t, double>> r_bar_trace;
  QTable q;
  /// Product state and action list of every Q row (absent for the
  /// reachability target of the Hahn reduction).
  std::vector<std::optional<ProductState>> row_states;
  std::vector<std::vector<ProductAction>> row_actions;
  std::vector<std::vector<std::uint64_t>> visits;
  VisitStats stats;
  double wall_time_s = 0.0;
  std::uint64_t steps_taken = 0;
};

/// Differential Q-learning on one uninterrupted trajectory:
///   delta = r - r_bar + max_a Q(s', a) - Q(s, a)
///   Q(s, a) += alpha_t * delta;  r_bar += eta * alpha_t * delta
/// with epsilon-greedy behavior over all product actions.
TrainResult differential_q_train(ProductEnv& env, const LearnerConfig& cfg);

/// Greedy positional policy over the rows of `q` (ties to the lowest index).
ProductPolicy greedy_policy(const QTable& q, const std::vector<std::optional<ProductState>>& row_states,
                            const std::vector<std::vector<ProductAction>>& row_actions);

/// Discounted environment over a product with accepting marks (normally the
/// plain M x A product). Id 0 is the Hahn target; product id k maps to k+1.
class DiscountedEnv {
 public:
  /// Accepting edge: with probability 1 - zeta the step instead enters an
  /// absorbing target and pays 1; every other reward is 0. Reaching the
  /// target ends an episode; in continuing mode the target loops with reward 0.
  static DiscountedEnv hahn(ProductEnv& env, double zeta, double gamma);
  /// Accepting edge pays 1 - gamma_b and discounts by gamma_b; every other
  /// edge pays 0 and discounts by gamma.
  static DiscountedEnv bozkurt(ProductEnv& env, double gamma_b, double gamma);

  std::size_t initial() const noexcept { return 1; }
  std::size_t num_actions(std::size_t id);
  std::optional<std::size_t> product_id(std::size_t id) const noexcept {
    return id == 0 ? std::nullopt : std::optional<std::size_t>(id - 1);
  }
  ProductEnv& product() noexcept { return *env_; }

  struct Step {
    std::size_t next = 0;
    double reward = 0.0;
    double discount = 1.0;
    bool terminal = false;
  };
  Step step(std::size_t id, std::size_t action, Rng& rng);

 private:
  enum class Kind { Hahn, Bozkurt };
  DiscountedEnv(ProductEnv& env, Kind kind, double p, double gamma) : env_(&env), kind_(kind), p_(p), gamma_(gamma) {}

  ProductEnv* env_;
  Kind kind_;
  double p_;
  double gamma_;
};

/// Tabular Q-learning with the wrapper's per-step discount. With
/// cfg.episodic the trajectory restarts from the initial state after a
/// terminal step or cfg.episode_length steps.
TrainResult discounted_q_train(DiscountedEnv& env, const LearnerConfig& cfg);

}  // namespace omega_avg
