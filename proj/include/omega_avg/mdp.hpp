#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "omega_avg/rng.hpp"

namespace omega_avg {

using StateId = std::size_t;
/// Index into Mdp::action_names(). Actions are named globally but enabled
/// per state; algorithms address them by their local position in choices(s).
using ActionId = std::size_t;

inline constexpr double kProbabilityTolerance = 1e-9;

struct Successor {
  StateId target = 0;
  double probability = 0.0;
  double reward = 0.0;
};

/// One enabled action of a state together with its distribution.
/// `accepting` and `resets` are only set on explicit products: the former
/// marks an automaton transition in F, the latter a transition that sends the
/// automaton back to its initial state (epsilon resets and hard resets).
struct Choice {
  ActionId action = 0;
  std::vector<Successor> successors;
  bool accepting = false;
  bool resets = false;
};

/// Unchecked MDP description, as produced by a parser or a generator.
struct RawMdp {
  std::size_t num_states = 0;
  StateId initial = 0;
  std::vector<std::string> atomic_props;
  std::vector<std::vector<std::string>> labels;
  std::vector<std::string> action_names;
  std::vector<std::vector<Choice>> choices;
};

/// Validated, immutable labeled MDP (S, s0, A, T, AP, L).
class Mdp {
 public:
  std::size_t num_states() const noexcept { return choices_.size(); }
  StateId initial() const noexcept { return initial_; }
  const std::vector<std::string>& atomic_props() const noexcept { return atomic_props_; }
  const std::vector<std::string>& action_names() const noexcept { return action_names_; }

  std::span<const Choice> choices(StateId s) const { return choices_.at(s); }
  const Choice& choice(StateId s, std::size_t local_action) const;
  std::size_t num_choices(StateId s) const { return choices_.at(s).size(); }
  std::size_t num_state_actions() const noexcept;

  /// Proposition names holding in `s`, in declaration order.
  const std::vector<std::string>& label(StateId s) const { return labels_.at(s); }
  bool holds(StateId s, const std::string& prop) const;

  const std::string& action_name(StateId s, std::size_t local_action) const {
    return action_names_.at(choice(s, local_action).action);
  }

  /// Same model with a different initial state.
  Mdp with_initial(StateId s) const;

 private:
  friend Mdp validate_mdp(RawMdp raw);
  Mdp() = default;

  StateId initial_ = 0;
  std::vector<std::string> atomic_props_;
  std::vector<std::vector<std::string>> labels_;
  std::vector<std::string> action_names_;
  std::vector<std::vector<Choice>> choices_;
};

/// Checks every invariant and throws MalformedModel listing all violations.
/// Probabilities are not renormalized.
Mdp validate_mdp(RawMdp raw);

/// Draws a successor of (s, local_action) with one uniform variate.
StateId sample_transition(const Mdp& mdp, StateId s, std::size_t local_action, Rng& rng);

/// sigma: S -> DIST(A), indexed by local action position.
struct StationaryPolicy {
  std::vector<std::vector<double>> probabilities;

  static StationaryPolicy pure(const Mdp& mdp, std::span<const std::size_t> actions);
};

/// Throws PolicyMismatch if `policy` does not fit `mdp`.
void check_policy(const Mdp& mdp, const StationaryPolicy& policy);

/// Row-stochastic chain M_sigma. Each edge carries the expected reward of
/// the step conditioned on that successor.
struct MarkovChain {
  StateId initial = 0;
  std::vector<std::vector<Successor>> rows;

  std::size_t num_states() const noexcept { return rows.size(); }
};

MarkovChain induce_chain(const Mdp& mdp, const StationaryPolicy& policy);
MarkovChain induce_chain(const Mdp& mdp, std::span<const std::size_t> positional);

}  // namespace omega_avg
