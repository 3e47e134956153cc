#include "omega_avg/reward_machine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "omega_avg/errors.hpp"

namespace omega_avg {

std::string_view to_string(EpsilonKind kind) {
  switch (kind) {
    case EpsilonKind::Reset: return "eps";
    case EpsilonKind::ResetAutomaton: return "eps1";
    case EpsilonKind::ClearBit: return "eps2";
  }
  return "eps";
}

// ---------------------------------------------------------------------------

ExternalReward::ExternalReward(std::map<std::pair<StateId, StateId>, double> values, const Mdp& mdp)
    : values_(std::move(values)) {
  for (const auto& [edge, r] : values_) {
    if (edge.first >= mdp.num_states() || edge.second >= mdp.num_states()) {
      throw Error(ErrorCode::BadConfig, "external reward on edge (" + std::to_string(edge.first) + ", " +
                                            std::to_string(edge.second) + ") outside the model");
    }
    if (!std::isfinite(r)) throw Error(ErrorCode::BadConfig, "non-finite external reward");
  }
  min_ = std::numeric_limits<double>::infinity();
  max_ = -std::numeric_limits<double>::infinity();
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    for (const auto& c : mdp.choices(s)) {
      for (const auto& succ : c.successors) {
        if (succ.probability <= 0.0) continue;
        const double r = (*this)(s, succ.target);
        min_ = std::min(min_, r);
        max_ = std::max(max_, r);
      }
    }
  }
}

ExternalReward ExternalReward::from_json(const nlohmann::json& doc, const Mdp& mdp) {
  if (!doc.is_object()) throw Error(ErrorCode::BadConfig, "reward file must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "rewards") throw Error(ErrorCode::BadConfig, "unknown key '" + key + "' in reward file");
  }
  std::map<std::pair<StateId, StateId>, double> values;
  for (const auto& entry : doc.at("rewards")) {
    for (const auto& [key, _] : entry.items()) {
      if (key != "from" && key != "to" && key != "value") {
        throw Error(ErrorCode::BadConfig, "unknown key '" + key + "' in reward entry");
      }
    }
    values[{entry.at("from").get<StateId>(), entry.at("to").get<StateId>()}] = entry.at("value").get<double>();
  }
  return ExternalReward(std::move(values), mdp);
}

double ExternalReward::operator()(StateId s, StateId next) const {
  const auto it = values_.find({s, next});
  return it == values_.end() ? 0.0 : it->second;
}

double default_c1(const ExternalReward& rho) { return -(rho.max() - rho.min()) - 1.0; }

// ---------------------------------------------------------------------------

BetaSchedule BetaSchedule::harmonic(double beta0, double scale) {
  if (!(scale > 0.0)) throw Error(ErrorCode::BadSchedule, "schedule scale must be positive");
  return from_function([beta0, scale](std::uint64_t i) { return beta0 / (1.0 + static_cast<double>(i) / scale); });
}

BetaSchedule BetaSchedule::from_function(std::function<double(std::uint64_t)> f) {
  double prev = f(0);
  if (!(prev > 0.0 && prev < 1.0)) throw Error(ErrorCode::BadSchedule, "beta(0) must lie in (0,1)");
  for (int k = 0; k <= 62; ++k) {
    const double v = f(std::uint64_t{1} << k);
    if (!(v >= 0.0 && v < 1.0)) throw Error(ErrorCode::BadSchedule, "beta outside [0,1)");
    if (v > prev) throw Error(ErrorCode::BadSchedule, "beta schedule increases at step 2^" + std::to_string(k));
    prev = v;
  }
  if (prev > 1e-9) throw Error(ErrorCode::BadSchedule, "beta schedule does not tend to 0");
  return BetaSchedule(std::move(f));
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> automaton_targets(const BuchiAutomaton& aut, std::size_t q, Letter l) {
  std::vector<std::size_t> out;
  for (const auto& e : aut.successors(q, l)) out.push_back(e.target);
  return out;
}

void require_choice(const std::vector<std::size_t>& choices, std::size_t choice) {
  if (std::find(choices.begin(), choices.end(), choice) == choices.end()) {
    throw Error(ErrorCode::IllegalSuccessor, "automaton successor " + std::to_string(choice) + " not available");
  }
}

}  // namespace

std::vector<std::size_t> AutomatonMachine::move_choices(MachineState u, Letter l) const {
  if (u.automaton_state == sink()) return {sink()};
  auto out = automaton_targets(aut_, u.automaton_state, l);
  if (out.empty()) out.push_back(sink());
  return out;
}

std::vector<MachineOutcome> AutomatonMachine::move_outcomes(MachineState u, Letter l, std::size_t choice) const {
  require_choice(move_choices(u, l), choice);
  MachineOutcome o;
  o.next = {choice, 0};
  if (u.automaton_state != sink() && choice != sink()) {
    o.accepting = aut_.is_accepting(u.automaton_state, l, choice);
    o.reward = o.accepting ? 1.0 : 0.0;
  }
  return {o};
}

MachineOutcome AutomatonMachine::epsilon_outcome(MachineState, EpsilonKind) const {
  throw Error(ErrorCode::IllegalEpsilon, "the plain product has no epsilon transitions");
}

// ---------------------------------------------------------------------------

ResetRewardMachine::ResetRewardMachine(BuchiAutomaton aut, double c, bool hard_resets)
    : RewardMachine(std::move(aut)), c_(c), hard_resets_(hard_resets) {
  if (!(c < 0.0)) throw Error(ErrorCode::NonNegativeC, "reset reward c must be negative");
  coaccessible_ = coaccessible_states(aut_);
}

std::vector<std::size_t> ResetRewardMachine::move_choices(MachineState u, Letter l) const {
  auto out = automaton_targets(aut_, u.automaton_state, l);
  if (out.empty() && hard_resets_) out.push_back(sink());
  return out;
}

std::vector<MachineOutcome> ResetRewardMachine::move_outcomes(MachineState u, Letter l, std::size_t choice) const {
  require_choice(move_choices(u, l), choice);
  MachineOutcome o;
  if (hard_resets_ && (choice == sink() || !coaccessible_[choice])) {
    o.next = {aut_.initial(), 0};
    o.reward = c_;
    o.resets = true;
    return {o};
  }
  o.next = {choice, 0};
  o.accepting = aut_.is_accepting(u.automaton_state, l, choice);
  o.reward = o.accepting ? 1.0 : 0.0;
  return {o};
}

std::vector<EpsilonKind> ResetRewardMachine::epsilon_actions(MachineState, Letter) const { return {EpsilonKind::Reset}; }

MachineOutcome ResetRewardMachine::epsilon_outcome(MachineState, EpsilonKind kind) const {
  if (kind != EpsilonKind::Reset) throw Error(ErrorCode::IllegalEpsilon, "the reset machine only has eps");
  MachineOutcome o;
  o.next = {aut_.initial(), 0};
  o.reward = c_;
  o.resets = true;
  return o;
}

// ---------------------------------------------------------------------------

LexicographicRewardMachine::LexicographicRewardMachine(BuchiAutomaton aut, ExternalReward rho,
                                                       LexicographicParams params)
    : RewardMachine(std::move(aut)), rho_(std::move(rho)), params_(std::move(params)) {
  if (!(params_.beta > 0.0 && params_.beta < 1.0)) throw Error(ErrorCode::BadBeta, "beta must lie in (0,1)");
  if (!(params_.c1 + rho_.max() < rho_.min())) {
    throw Error(ErrorCode::BadC1, "need c1 + max rho < min rho (c1 = " + std::to_string(params_.c1) +
                                      ", rho in [" + std::to_string(rho_.min()) + ", " + std::to_string(rho_.max()) +
                                      "])");
  }
  if (!(params_.c2 < 0.0)) throw Error(ErrorCode::BadC2, "c2 must be negative");
}

std::vector<std::size_t> LexicographicRewardMachine::move_choices(MachineState u, Letter l) const {
  return automaton_targets(aut_, u.automaton_state, l);
}

std::vector<MachineOutcome> LexicographicRewardMachine::move_outcomes(MachineState u, Letter l,
                                                                      std::size_t choice) const {
  require_choice(move_choices(u, l), choice);
  const bool acc = aut_.is_accepting(u.automaton_state, l, choice);
  if (u.bit == 0) {
    MachineOutcome stay{{choice, 0}, Weight::OneMinusBeta, 0.0, true, acc, false};
    MachineOutcome flip{{choice, 1}, Weight::Beta, 0.0, true, acc, false};
    return {stay, flip};
  }
  MachineOutcome o{{choice, static_cast<std::uint8_t>(acc ? 0 : 1)}, Weight::One, params_.c1, true, acc, false};
  return {o};
}

std::vector<EpsilonKind> LexicographicRewardMachine::epsilon_actions(MachineState u, Letter l) const {
  std::vector<EpsilonKind> out;
  if (u.automaton_state != aut_.initial()) out.push_back(EpsilonKind::ResetAutomaton);
  if (u.bit == 1) out.push_back(EpsilonKind::ClearBit);
  if (out.empty() && aut_.successors(u.automaton_state, l).empty()) out.push_back(EpsilonKind::ResetAutomaton);
  return out;
}

MachineOutcome LexicographicRewardMachine::epsilon_outcome(MachineState u, EpsilonKind kind) const {
  MachineOutcome o;
  o.reward = params_.c2;
  switch (kind) {
    case EpsilonKind::ResetAutomaton:
      o.next = {aut_.initial(), u.bit};
      o.resets = true;
      return o;
    case EpsilonKind::ClearBit:
      o.next = {u.automaton_state, 0};
      return o;
    case EpsilonKind::Reset: break;
  }
  throw Error(ErrorCode::IllegalEpsilon, "the lexicographic machine has eps1 and eps2 only");
}

double LexicographicRewardMachine::beta_at(std::uint64_t step) const {
  return params_.schedule ? (*params_.schedule)(step) : params_.beta;
}

// ---------------------------------------------------------------------------

std::shared_ptr<const ResetRewardMachine> build_reset_machine(BuchiAutomaton aut, double c, bool hard_resets) {
  return std::make_shared<const ResetRewardMachine>(std::move(aut), c, hard_resets);
}

std::shared_ptr<const LexicographicRewardMachine> build_lexicographic_machine(BuchiAutomaton aut, ExternalReward rho,
                                                                              LexicographicParams params) {
  return std::make_shared<const LexicographicRewardMachine>(std::move(aut), std::move(rho), std::move(params));
}

MachineStep machine_step(const RewardMachine& machine, MachineState u, const MachineInput& input, std::size_t chosen,
                         Rng& rng, std::uint64_t step_index) {
  if (const auto* kind = std::get_if<EpsilonKind>(&input)) {
    if (machine.kind() == MachineKind::Lexicographic) {
      if (*kind == EpsilonKind::ResetAutomaton && u.automaton_state == machine.automaton().initial()) {
        throw Error(ErrorCode::IllegalEpsilon, "eps1 requires q != q0");
      }
      if (*kind == EpsilonKind::ClearBit && u.bit == 0) throw Error(ErrorCode::IllegalEpsilon, "eps2 requires b = 1");
    }
    const auto o = machine.epsilon_outcome(u, *kind);
    return {o.next, o.reward, false};
  }
  const auto& in = std::get<LetterInput>(input);
  const auto outcomes = machine.move_outcomes(u, in.letter, chosen);
  const double beta = machine.beta_at(step_index);
  double x = rng.uniform();
  const MachineOutcome* picked = &outcomes.back();
  for (const auto& o : outcomes) {
    const double w = weight_value(o.weight, beta);
    if (x < w) {
      picked = &o;
      break;
    }
    x -= w;
  }
  const double reward = picked->reward + (picked->adds_external ? machine.external(in.from, in.to) : 0.0);
  return {picked->next, reward, picked->accepting};
}

nlohmann::json machine_table(const RewardMachine& machine) {
  using nlohmann::json;
  const auto& aut = machine.automaton();
  json doc;
  switch (machine.kind()) {
    case MachineKind::Automaton: doc["kind"] = "automaton"; break;
    case MachineKind::Reset: {
      const auto& m = static_cast<const ResetRewardMachine&>(machine);
      doc["kind"] = m.hard_resets() ? "reset-hard" : "reset";
      doc["c"] = m.reset_reward();
      break;
    }
    case MachineKind::Lexicographic: {
      const auto& m = static_cast<const LexicographicRewardMachine&>(machine);
      doc["kind"] = "lexicographic";
      doc["beta"] = m.beta();
      doc["c1"] = m.c1();
      doc["c2"] = m.c2();
      break;
    }
  }
  doc["aps"] = aut.atomic_props();
  doc["initial"] = {{"q", aut.initial()}, {"b", 0}};
  const bool two_layers = machine.kind() == MachineKind::Lexicographic;
  json rows = json::array();
  for (std::size_t q = 0; q < aut.num_states(); ++q) {
    for (std::uint8_t b = 0; b <= (two_layers ? 1 : 0); ++b) {
      const MachineState u{q, b};
      for (Letter l = 0; l < aut.num_letters(); ++l) {
        for (std::size_t choice : machine.move_choices(u, l)) {
          for (const auto& o : machine.move_outcomes(u, l, choice)) {
            json row = {{"q", q},
                        {"b", b},
                        {"letter", aut.letter_string(l)},
                        {"choice", choice == machine.sink() ? json("sink") : json(choice)},
                        {"next_q", o.next.automaton_state},
                        {"next_b", o.next.bit},
                        {"weight", o.weight == Weight::One ? "1" : (o.weight == Weight::Beta ? "beta" : "1-beta")},
                        {"reward", o.reward},
                        {"adds_external", o.adds_external},
                        {"accepting", o.accepting},
                        {"resets", o.resets}};
            rows.push_back(std::move(row));
          }
        }
        for (EpsilonKind k : machine.epsilon_actions(u, l)) {
          const auto o = machine.epsilon_outcome(u, k);
          rows.push_back({{"q", q},
                          {"b", b},
                          {"letter", aut.letter_string(l)},
                          {"epsilon", to_string(k)},
                          {"next_q", o.next.automaton_state},
                          {"next_b", o.next.bit},
                          {"weight", "1"},
                          {"reward", o.reward},
                          {"adds_external", false},
                          {"accepting", false},
                          {"resets", o.resets}});
        }
      }
    }
  }
  doc["transitions"] = std::move(rows);
  return doc;
}

}  // namespace omega_avg
