#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "omega_avg/mdp.hpp"

namespace omega_avg {

/// A letter of 2^AP, encoded as a bitmask over the automaton's AP list
/// (bit i set iff AP i holds).
using Letter = std::uint32_t;

inline constexpr std::size_t kMaxAtomicProps = 12;

struct AutomatonEdge {
  std::size_t target = 0;
  bool accepting = false;

  friend bool operator==(const AutomatonEdge&, const AutomatonEdge&) = default;
};

/// Nondeterministic Buchi automaton with transition-based acceptance
/// (Sigma = 2^AP, Q, q0, delta, F). Immutable once constructed.
class BuchiAutomaton {
 public:
  /// `delta[q][letter]` lists the successors of q on that letter; duplicate
  /// targets are merged (accepting if any copy is).
  BuchiAutomaton(std::string name, std::vector<std::string> atomic_props, std::size_t initial,
                 std::vector<std::vector<std::vector<AutomatonEdge>>> delta);

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& atomic_props() const noexcept { return atomic_props_; }
  std::size_t num_states() const noexcept { return delta_.size(); }
  std::size_t num_letters() const noexcept { return std::size_t{1} << atomic_props_.size(); }
  std::size_t initial() const noexcept { return initial_; }

  std::span<const AutomatonEdge> successors(std::size_t q, Letter letter) const {
    return delta_.at(q).at(letter);
  }
  bool has_transition(std::size_t q, Letter letter, std::size_t target) const;
  bool is_accepting(std::size_t q, Letter letter, std::size_t target) const;
  bool deterministic() const noexcept { return deterministic_; }
  bool complete() const noexcept;

  /// Letter read in an MDP state: AP i holds iff the state is labeled with a
  /// proposition of the same name. Unknown names are false.
  Letter letter_of(const std::vector<std::string>& true_props) const;
  std::vector<Letter> letters_for(const Mdp& mdp) const;

  std::string letter_string(Letter letter) const;

  /// States reachable from the initial state.
  std::vector<bool> reachable() const;

 private:
  std::string name_;
  std::vector<std::string> atomic_props_;
  std::size_t initial_ = 0;
  std::vector<std::vector<std::vector<AutomatonEdge>>> delta_;
  bool deterministic_ = true;
};

/// Parses the supported HOA subset: "acc-name: Buchi", "Acceptance: 1 Inf(0)",
/// explicit transition labels over declared APs, transition-based marks {0}.
BuchiAutomaton parse_automaton(std::string_view text);
BuchiAutomaton load_automaton(const std::filesystem::path& path);
std::string to_hoa(const BuchiAutomaton& aut);

/// States from which some accepting transition is graph-reachable.
std::vector<bool> coaccessible_states(const BuchiAutomaton& aut);

/// L(from p) is a subset of L(from q), for deterministic automata.
bool det_language_containment(const BuchiAutomaton& aut, std::size_t p, std::size_t q);

/// Some word is accepted from state q.
bool language_nonempty(const BuchiAutomaton& aut, std::size_t q);

struct SpecClass {
  bool absolute_liveness = false;
  bool stable = false;
  bool fairness = false;
};

SpecClass classify_specification(const BuchiAutomaton& aut);

}  // namespace omega_avg
