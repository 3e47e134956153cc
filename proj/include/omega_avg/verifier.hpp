#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "omega_avg/automaton.hpp"
#include "omega_avg/mdp.hpp"
#include "omega_avg/product.hpp"

namespace omega_avg {

enum class ResultKind { OptimalSat, PolicySat, PolicyGain, Reach };

std::string_view to_string(ResultKind kind);

struct VerificationResult {
  double value = 0.0;
  double residual = 0.0;
  ResultKind kind = ResultKind::Reach;
};

struct SolverOptions {
  double tolerance = 1e-10;
  std::size_t max_iterations = 10'000'000;
};

/// Per-state maximal probability of reaching `target`, by value iteration
/// from 0 after removing states that cannot reach the target at all.
std::vector<double> max_reach_probabilities(const Mdp& mdp, const std::vector<bool>& target,
                                            const SolverOptions& opts = {}, double* residual = nullptr);
VerificationResult max_reach_probability(const Mdp& mdp, const std::vector<bool>& target,
                                         const SolverOptions& opts = {});

/// States of MECs that retain at least one accepting choice.
std::vector<bool> accepting_mec_states(const Mdp& product);

/// PSat of the best strategy: max reachability of accepting MECs of M x A.
VerificationResult optimal_satisfaction_probability(std::shared_ptr<const Mdp> mdp, const BuchiAutomaton& aut,
                                                    const SolverOptions& opts = {},
                                                    std::size_t cap = kDefaultProductCap);

/// Positional strategy on product states. States without an entry fall back
/// to their first action when resolved against an explicit product.
using ProductPolicy = std::map<ProductState, ProductAction>;

struct ResolvedPolicy {
  std::vector<std::size_t> actions;
  std::size_t defaulted = 0;
};

/// Throws PolicyMismatch if an entry names an action that is not offered.
ResolvedPolicy resolve_policy(const ExplicitProduct& product, const ProductPolicy& policy);

/// Decomposition of a finite Markov chain into bottom SCCs together with the
/// probability of ending in each of them from the initial state.
struct ChainDecomposition {
  std::vector<std::vector<StateId>> bsccs;
  std::vector<double> absorption;
  double residual = 0.0;
};

ChainDecomposition decompose_chain(const MarkovChain& chain);

/// Stationary distribution of the chain restricted to a closed class.
std::vector<double> stationary_distribution(const MarkovChain& chain, const std::vector<StateId>& bscc,
                                            const SolverOptions& opts = {}, double* residual = nullptr);

/// Long-run average of the edge rewards of `chain` from its initial state:
/// sum over BSCCs of absorption probability times BSCC gain.
VerificationResult markov_chain_gain(const MarkovChain& chain, const SolverOptions& opts = {});

/// Probability of accepting runs under a positional product strategy. A BSCC
/// is accepting iff it uses an accepting choice and no resetting choice
/// (epsilon resets and hard resets restart the automaton run).
VerificationResult policy_satisfaction_probability(const ExplicitProduct& product,
                                                   std::span<const std::size_t> positional,
                                                   const SolverOptions& opts = {});

/// Gain of the product rewards under a positional strategy.
VerificationResult policy_average_reward(const Mdp& product, std::span<const std::size_t> positional,
                                         const SolverOptions& opts = {});

/// External reward rho per MDP step under a positional strategy: in each
/// BSCC the stationary rate of rho divided by the stationary rate of moves
/// (epsilon steps take no MDP time). A BSCC without moves contributes 0.
VerificationResult policy_external_gain(const ExplicitProduct& product, std::span<const std::size_t> positional,
                                        const SolverOptions& opts = {});

struct PolicyEnumeration {
  double best_gain = 0.0;
  /// Every positional policy whose gain is within `tie_tolerance` of the best.
  std::vector<std::vector<std::size_t>> optimal;
  std::size_t evaluated = 0;
};

inline constexpr std::size_t kMaxEnumeratedPolicies = std::size_t{1} << 24;

/// Exhaustive search over positional policies of a product, maximizing the
/// gain of its rewards from the initial state. Throws BadConfig if the
/// policy count exceeds `limit`.
PolicyEnumeration enumerate_gain_optimal_policies(const Mdp& product, double tie_tolerance = 1e-9,
                                                  std::size_t limit = kMaxEnumeratedPolicies);

}  // namespace omega_avg
