#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "omega_avg/automaton.hpp"
#include "omega_avg/mdp.hpp"
#include "omega_avg/rng.hpp"

namespace omega_avg {

/// (automaton state q, bit b). The bit is always 0 outside the
/// lexicographic machine. q == automaton.num_states() denotes the implicit
/// rejecting sink used by the plain product for missing transitions.
struct MachineState {
  std::size_t automaton_state = 0;
  std::uint8_t bit = 0;

  friend auto operator<=>(const MachineState&, const MachineState&) = default;
};

/// Reset: the reset machine's epsilon (q -> q0).
/// ResetAutomaton: lexicographic eps1 (q -> q0, keep b), only from q != q0.
/// ClearBit: lexicographic eps2 (b -> 0, keep q), only from b == 1.
enum class EpsilonKind : std::uint8_t { Reset, ResetAutomaton, ClearBit };

std::string_view to_string(EpsilonKind kind);

/// Probability factor of a machine outcome. Kept symbolic so that a beta
/// schedule can be applied at step time.
enum class Weight : std::uint8_t { One, Beta, OneMinusBeta };

inline double weight_value(Weight w, double beta) noexcept {
  switch (w) {
    case Weight::One: return 1.0;
    case Weight::Beta: return beta;
    case Weight::OneMinusBeta: return 1.0 - beta;
  }
  return 0.0;
}

/// Effect of one machine transition. The reward actually paid is
/// `reward + (adds_external ? rho(s, s') : 0)`.
struct MachineOutcome {
  MachineState next;
  Weight weight = Weight::One;
  double reward = 0.0;
  bool adds_external = false;
  bool accepting = false;
  bool resets = false;
};

enum class MachineKind { Automaton, Reset, Lexicographic };

/// External reward rho(s, s') on MDP edges; edges without an entry pay 0.
class ExternalReward {
 public:
  ExternalReward() = default;
  ExternalReward(std::map<std::pair<StateId, StateId>, double> values, const Mdp& mdp);

  /// {"rewards": [{"from": s, "to": t, "value": r}, ...]}
  static ExternalReward from_json(const nlohmann::json& doc, const Mdp& mdp);

  double operator()(StateId s, StateId next) const;
  /// Bounds over the positive-probability edges of the MDP.
  double min() const noexcept { return min_; }
  double max() const noexcept { return max_; }
  const std::map<std::pair<StateId, StateId>, double>& values() const noexcept { return values_; }

 private:
  std::map<std::pair<StateId, StateId>, double> values_;
  double min_ = 0.0;
  double max_ = 0.0;
};

/// Nonincreasing beta(i) with limit 0.
class BetaSchedule {
 public:
  /// beta0 / (1 + i / scale).
  static BetaSchedule harmonic(double beta0, double scale);
  /// Checked on i = 0 and powers of two up to 2^62: must lie in (0,1), be
  /// nonincreasing and end below 1e-9. Throws BadSchedule otherwise.
  static BetaSchedule from_function(std::function<double(std::uint64_t)> f);

  double operator()(std::uint64_t step) const { return f_(step); }

 private:
  explicit BetaSchedule(std::function<double(std::uint64_t)> f) : f_(std::move(f)) {}
  std::function<double(std::uint64_t)> f_;
};

/// Common stepping interface over the three machines. Machines are
/// immutable; the product environment caches everything it queries.
class RewardMachine {
 public:
  explicit RewardMachine(BuchiAutomaton aut) : aut_(std::move(aut)) {}
  virtual ~RewardMachine() = default;

  const BuchiAutomaton& automaton() const noexcept { return aut_; }
  MachineState initial() const noexcept { return {aut_.initial(), 0}; }
  /// Index standing for "no automaton transition on this letter".
  std::size_t sink() const noexcept { return aut_.num_states(); }

  virtual MachineKind kind() const noexcept = 0;
  virtual std::size_t num_states() const noexcept = 0;
  /// Automaton successor choices offered as moves in state u on letter l.
  virtual std::vector<std::size_t> move_choices(MachineState u, Letter l) const = 0;
  /// Outcomes of choosing `choice`; weights sum to one.
  virtual std::vector<MachineOutcome> move_outcomes(MachineState u, Letter l, std::size_t choice) const = 0;
  /// Legal epsilon actions in u when the current MDP state reads l.
  virtual std::vector<EpsilonKind> epsilon_actions(MachineState u, Letter l) const = 0;
  /// Effect of an epsilon action; throws IllegalEpsilon if the machine has no
  /// such kind. Guards (q != q0, b == 1) are checked by epsilon_actions.
  virtual MachineOutcome epsilon_outcome(MachineState u, EpsilonKind kind) const = 0;
  /// Bit-flip probability at a training step (0 for machines without a bit).
  virtual double beta_at(std::uint64_t /*step*/) const { return 0.0; }
  virtual double external(StateId /*s*/, StateId /*next*/) const { return 0.0; }

 protected:
  BuchiAutomaton aut_;
};

/// Plain product M x A: reward 1 on accepting transitions, no epsilon.
/// Missing transitions lead to a rejecting sink.
class AutomatonMachine final : public RewardMachine {
 public:
  explicit AutomatonMachine(BuchiAutomaton aut) : RewardMachine(std::move(aut)) {}

  MachineKind kind() const noexcept override { return MachineKind::Automaton; }
  std::size_t num_states() const noexcept override { return aut_.num_states() + 1; }
  std::vector<std::size_t> move_choices(MachineState u, Letter l) const override;
  std::vector<MachineOutcome> move_outcomes(MachineState u, Letter l, std::size_t choice) const override;
  std::vector<EpsilonKind> epsilon_actions(MachineState, Letter) const override { return {}; }
  MachineOutcome epsilon_outcome(MachineState u, EpsilonKind kind) const override;
};

/// R_A: epsilon from every state to q0 with reward c < 0; accepting
/// transitions pay 1, the rest 0. With hard resets, every transition into a
/// non-coaccessible state (including the implicit sink) goes to q0 instead
/// and pays c.
class ResetRewardMachine final : public RewardMachine {
 public:
  ResetRewardMachine(BuchiAutomaton aut, double c, bool hard_resets);

  MachineKind kind() const noexcept override { return MachineKind::Reset; }
  std::size_t num_states() const noexcept override { return aut_.num_states(); }
  double reset_reward() const noexcept { return c_; }
  bool hard_resets() const noexcept { return hard_resets_; }
  const std::vector<bool>& coaccessible() const noexcept { return coaccessible_; }

  std::vector<std::size_t> move_choices(MachineState u, Letter l) const override;
  std::vector<MachineOutcome> move_outcomes(MachineState u, Letter l, std::size_t choice) const override;
  std::vector<EpsilonKind> epsilon_actions(MachineState u, Letter l) const override;
  MachineOutcome epsilon_outcome(MachineState u, EpsilonKind kind) const override;

 private:
  double c_;
  bool hard_resets_;
  std::vector<bool> coaccessible_;
};

struct LexicographicParams {
  double beta = 0.05;
  double c1 = -2.0;
  double c2 = -100.0;
  std::optional<BetaSchedule> schedule;
};

/// Two-layer machine over Q x {0,1}:
///   b=0, non-eps: b' = 1 w.p. beta, else 0; reward rho(s,s')
///   b=1, non-eps: b' = 0 iff the transition is accepting; reward c1 + rho(s,s')
///   eps1 (q != q0): q' = q0, b kept; eps2 (b = 1): b' = 0, q kept; reward c2.
/// In (q0, 0) with no automaton transition on the current letter, eps1 is
/// offered as a self-reset so that the product stays total.
class LexicographicRewardMachine final : public RewardMachine {
 public:
  LexicographicRewardMachine(BuchiAutomaton aut, ExternalReward rho, LexicographicParams params);

  MachineKind kind() const noexcept override { return MachineKind::Lexicographic; }
  std::size_t num_states() const noexcept override { return 2 * aut_.num_states(); }
  double beta() const noexcept { return params_.beta; }
  double c1() const noexcept { return params_.c1; }
  double c2() const noexcept { return params_.c2; }
  const ExternalReward& rho() const noexcept { return rho_; }

  std::vector<std::size_t> move_choices(MachineState u, Letter l) const override;
  std::vector<MachineOutcome> move_outcomes(MachineState u, Letter l, std::size_t choice) const override;
  std::vector<EpsilonKind> epsilon_actions(MachineState u, Letter l) const override;
  MachineOutcome epsilon_outcome(MachineState u, EpsilonKind kind) const override;
  double beta_at(std::uint64_t step) const override;
  double external(StateId s, StateId next) const override { return rho_(s, next); }

 private:
  ExternalReward rho_;
  LexicographicParams params_;
};

std::shared_ptr<const ResetRewardMachine> build_reset_machine(BuchiAutomaton aut, double c, bool hard_resets);
std::shared_ptr<const LexicographicRewardMachine> build_lexicographic_machine(BuchiAutomaton aut, ExternalReward rho,
                                                                              LexicographicParams params);

/// Default c1 = -(max rho - min rho) - 1, which satisfies c1 + max < min.
double default_c1(const ExternalReward& rho);

/// Machine input: a letter read in MDP state s together with the edge (s, s'),
/// or an epsilon kind.
struct LetterInput {
  Letter letter = 0;
  StateId from = 0;
  StateId to = 0;
};
using MachineInput = std::variant<LetterInput, EpsilonKind>;

struct MachineStep {
  MachineState next;
  double reward = 0.0;
  bool accepting = false;
};

/// Samples one machine transition. `chosen` is ignored for epsilon inputs.
/// Throws IllegalSuccessor / IllegalEpsilon (eps1 from q0, eps2 from b = 0,
/// or a kind the machine does not have).
MachineStep machine_step(const RewardMachine& machine, MachineState u, const MachineInput& input, std::size_t chosen,
                         Rng& rng, std::uint64_t step_index = 0);

/// Full transition table, for golden tests and `gen --emit-machine`.
nlohmann::json machine_table(const RewardMachine& machine);

}  // namespace omega_avg
