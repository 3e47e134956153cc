#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "omega_avg/automaton.hpp"
#include "omega_avg/mdp.hpp"
#include "omega_avg/reward_machine.hpp"

namespace omega_avg {

/// Two states, 0 unlabeled (initial) and 1 labeled a; actions "stay" and
/// "go" are deterministic.
Mdp two_state_mdp();

/// State 0 labeled a (initial), state 1 unlabeled; "stay"/"go" as above.
/// The external reward pays +1 on the self-loop of state 1.
Mdp infmem_mdp();
ExternalReward infmem_rewards(const Mdp& mdp);

/// n x m grid, state r*m + c, start (0,0). Actions N/E/S/W move in the
/// intended direction with probability 1 - slip and to each perpendicular
/// direction with probability slip/2; moves into a wall stay put.
/// Labels: a at (0,m-1), b and goal at (n-1,m-1), c at (n-1,0).
Mdp grid_mdp(std::size_t n, std::size_t m, double slip);

/// Cycle of k states with actions "next" (i -> i+1 mod k) and "stay".
/// State 0 is labeled a; proposition b is declared but never holds.
Mdp ring_mdp(std::size_t k);

/// Transient chain of `prefix` states (action "next") feeding ring_mdp(k).
/// Weakly communicating, not communicating.
Mdp lollipop_mdp(std::size_t prefix, std::size_t k);

struct GeneratorParams {
  std::size_t n = 4;
  std::size_t m = 4;
  double slip = 0.0;
  std::size_t k = 5;
};

/// Generator ids: two-state-fga, multichain-example, infmem, grid, ring.
/// Throws UnknownGenerator, or GenerationNotCommunicating if the result is
/// not communicating.
Mdp generate_mdp(std::string_view id, const GeneratorParams& params);

/// HOA texts of the bundled automata, keyed by short name:
///   fga (FG a, nondeterministic), fg-a-or-fg-not-a, gfa, fa, a-or-fb,
///   ga-or-gfb, f-goal, f-abc (F(a & F(b & F c))), gfa-gfb, fgb.
const std::map<std::string, std::string>& bundled_automata();
BuchiAutomaton bundled_automaton(const std::string& name);

/// An MDP, a specification and an external reward (zero unless given).
struct Benchmark {
  std::string name;
  std::shared_ptr<const Mdp> mdp;
  BuchiAutomaton automaton;
  ExternalReward rho;
  std::string automaton_name;
};

/// Names of the bundled communicating benchmarks (all with absolute-liveness
/// specifications).
std::vector<std::string> benchmark_names();
Benchmark load_benchmark(const std::string& name);

/// Generator output for `gen`: the MDP and the automata (and external
/// reward) that belong to it.
struct GeneratedFiles {
  Mdp mdp;
  std::vector<std::string> automata;
  std::optional<ExternalReward> rho;
};
GeneratedFiles generate_benchmark(std::string_view id, const GeneratorParams& params);

}  // namespace omega_avg
