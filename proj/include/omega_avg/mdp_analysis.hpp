#pragma once

#include <optional>
#include <vector>

#include "omega_avg/mdp.hpp"

namespace omega_avg {

using Graph = std::vector<std::vector<StateId>>;

/// Tarjan's algorithm (iterative). Returns the component index of every node;
/// components are numbered in reverse topological order (sinks first).
std::vector<std::size_t> scc_index(const Graph& graph, std::size_t* count = nullptr);

/// Edge s -> t whenever some enabled action reaches t with positive probability.
Graph support_graph(const Mdp& mdp);
Graph support_graph(const MarkovChain& chain);

/// Nodes reachable from `sources` (forward), as a membership mask.
std::vector<bool> reachable_from(const Graph& graph, const std::vector<StateId>& sources);

/// Nodes that can reach `targets`.
std::vector<bool> can_reach(const Graph& graph, const std::vector<bool>& targets);

struct EndComponent {
  std::vector<StateId> states;
  /// actions[i] lists the retained local action indices of states[i].
  std::vector<std::vector<std::size_t>> actions;
};

struct MecDecomposition {
  std::vector<EndComponent> components;
  std::vector<std::optional<std::size_t>> membership;
};

MecDecomposition mec_decomposition(const Mdp& mdp);

bool is_communicating(const Mdp& mdp);

/// Every pair of states that lie in some end component is mutually reachable
/// in the support graph. States outside all end components are transient
/// under every stationary policy.
bool is_weakly_communicating(const Mdp& mdp);

/// Bottom SCCs of a Markov chain, each as a sorted state list.
std::vector<std::vector<StateId>> bottom_sccs(const MarkovChain& chain);

}  // namespace omega_avg
