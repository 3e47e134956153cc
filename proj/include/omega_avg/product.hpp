#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "omega_avg/mdp.hpp"
#include "omega_avg/reward_machine.hpp"
#include "omega_avg/rng.hpp"

namespace omega_avg {

struct ProductState {
  StateId mdp_state = 0;
  MachineState machine;

  friend auto operator<=>(const ProductState&, const ProductState&) = default;
};

/// MDP action (local index) paired with the automaton successor it commits to.
struct Move {
  std::size_t action = 0;
  std::size_t successor = 0;

  friend bool operator==(const Move&, const Move&) = default;
};

struct Epsilon {
  EpsilonKind kind = EpsilonKind::Reset;

  friend bool operator==(const Epsilon&, const Epsilon&) = default;
};

using ProductAction = std::variant<Move, Epsilon>;

struct StepOutcome {
  ProductState next;
  double reward = 0.0;
  bool accepting_edge = false;
};

/// One joint outcome of a product action: MDP successor and machine outcome.
struct ProductTransition {
  std::size_t next = 0;
  double mdp_probability = 1.0;
  Weight weight = Weight::One;
  double reward = 0.0;
  /// rho(s, s') for moves of machines with an external reward, else 0.
  double external = 0.0;
};

struct ProductNode {
  std::vector<ProductAction> actions;
  /// transitions[a] in the fixed sampling order.
  std::vector<std::vector<ProductTransition>> transitions;
  std::vector<bool> accepting;
  std::vector<bool> resets;
};

/// On-the-fly product of an MDP with a reward machine. States are interned
/// lazily (ids in discovery order); a node's actions and transitions are
/// computed on first access and cached.
///
/// Action order at (s, u): moves sorted by (MDP local action, automaton
/// successor), then the legal epsilon kinds. A step draws exactly one
/// uniform variate and walks the joint outcomes in this order.
class ProductEnv {
 public:
  ProductEnv(std::shared_ptr<const Mdp> mdp, std::shared_ptr<const RewardMachine> machine);

  const Mdp& mdp() const noexcept { return *mdp_; }
  const RewardMachine& machine() const noexcept { return *machine_; }
  std::shared_ptr<const Mdp> mdp_ptr() const noexcept { return mdp_; }
  std::shared_ptr<const RewardMachine> machine_ptr() const noexcept { return machine_; }

  std::size_t initial() const noexcept { return 0; }
  std::size_t intern(const ProductState& state);
  const ProductState& state(std::size_t id) const { return states_.at(id); }
  std::size_t num_known_states() const noexcept { return states_.size(); }

  const ProductNode& node(std::size_t id);
  std::size_t num_actions(std::size_t id) { return node(id).actions.size(); }

  struct Step {
    std::size_t next = 0;
    double reward = 0.0;
    bool accepting = false;
    bool resets = false;
  };
  /// Throws IllegalAction if `action` is out of range.
  Step step(std::size_t id, std::size_t action, Rng& rng, double beta);

 private:
  std::uint64_t key(const ProductState& s) const noexcept;
  void expand(std::size_t id);

  std::shared_ptr<const Mdp> mdp_;
  std::shared_ptr<const RewardMachine> machine_;
  std::vector<Letter> letters_;
  std::vector<ProductState> states_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
  std::vector<std::unique_ptr<ProductNode>> nodes_;
};

/// Value-level wrappers over ProductEnv.
std::vector<ProductAction> product_actions(ProductEnv& env, const ProductState& state);
/// Throws IllegalAction if `action` is not offered in `state`.
StepOutcome product_step(ProductEnv& env, const ProductState& state, const ProductAction& action, Rng& rng,
                         std::uint64_t step_index = 0);

std::string action_name(const Mdp& mdp, const RewardMachine& machine, const ProductState& state,
                        const ProductAction& action);
std::string state_name(const ProductState& state, const RewardMachine& machine);

/// Explicit rewardful product containing exactly the states reachable from
/// (s0, u0). State ids are BFS order, which coincides with the interning
/// order of a fresh ProductEnv. Choice order matches the env action order and
/// successor order matches the env sampling order, so simulating `mdp` with
/// sample_transition reproduces on-the-fly trajectories draw for draw.
struct ExplicitProduct {
  Mdp mdp;
  std::vector<ProductState> states;
  std::vector<std::vector<ProductAction>> actions;
  /// external[s][a][k] = rho of the k-th successor of choice a (0 for eps).
  std::vector<std::vector<std::vector<double>>> external;
  /// false for epsilon actions, which take no MDP time.
  std::vector<std::vector<bool>> is_move;
  std::shared_ptr<const RewardMachine> machine;

  std::size_t num_states() const noexcept { return states.size(); }
  /// Id of a product state, if reachable.
  std::optional<std::size_t> find(const ProductState& s) const;
};

inline constexpr std::size_t kDefaultProductCap = 1'000'000;

/// `beta` fixes the bit-flip probability folded into the transitions of the
/// lexicographic machine; it defaults to the machine's own beta.
ExplicitProduct build_explicit_product(std::shared_ptr<const Mdp> mdp, std::shared_ptr<const RewardMachine> machine,
                                       std::optional<double> beta = std::nullopt,
                                       std::size_t cap = kDefaultProductCap);

/// Plain M x A product (reward 1 on accepting edges, rejecting sink).
ExplicitProduct build_automaton_product(std::shared_ptr<const Mdp> mdp, const BuchiAutomaton& aut,
                                        std::size_t cap = kDefaultProductCap);

}  // namespace omega_avg
