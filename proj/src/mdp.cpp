#include "omega_avg/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "omega_avg/errors.hpp"

namespace omega_avg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedModel: return "MalformedModel";
    case ErrorCode::ActionNotEnabled: return "ActionNotEnabled";
    case ErrorCode::PolicyMismatch: return "PolicyMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnsupportedFeature: return "UnsupportedFeature";
    case ErrorCode::NotDeterministic: return "NotDeterministic";
    case ErrorCode::NonNegativeC: return "NonNegativeC";
    case ErrorCode::BadBeta: return "BadBeta";
    case ErrorCode::BadC1: return "BadC1";
    case ErrorCode::BadC2: return "BadC2";
    case ErrorCode::IllegalSuccessor: return "IllegalSuccessor";
    case ErrorCode::IllegalEpsilon: return "IllegalEpsilon";
    case ErrorCode::BadSchedule: return "BadSchedule";
    case ErrorCode::IllegalAction: return "IllegalAction";
    case ErrorCode::ProductTooLarge: return "ProductTooLarge";
    case ErrorCode::BadZeta: return "BadZeta";
    case ErrorCode::BadGamma: return "BadGamma";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::UnknownGenerator: return "UnknownGenerator";
    case ErrorCode::GenerationNotCommunicating: return "GenerationNotCommunicating";
    case ErrorCode::BadRange: return "BadRange";
    case ErrorCode::IoError: return "IoError";
  }
  return "Error";
}

namespace {

std::string join_details(const std::vector<std::string>& details) {
  std::string out;
  for (const auto& d : details) {
    if (!out.empty()) out += "; ";
    out += d;
  }
  return out;
}

}  // namespace

MalformedModel::MalformedModel(std::vector<std::string> details)
    : Error(ErrorCode::MalformedModel, join_details(details)), details_(std::move(details)) {}

const Choice& Mdp::choice(StateId s, std::size_t local_action) const {
  const auto& row = choices_.at(s);
  if (local_action >= row.size()) {
    throw Error(ErrorCode::ActionNotEnabled,
                "state " + std::to_string(s) + " has no action #" + std::to_string(local_action));
  }
  return row[local_action];
}

std::size_t Mdp::num_state_actions() const noexcept {
  std::size_t n = 0;
  for (const auto& row : choices_) n += row.size();
  return n;
}

bool Mdp::holds(StateId s, const std::string& prop) const {
  const auto& l = labels_.at(s);
  return std::find(l.begin(), l.end(), prop) != l.end();
}

Mdp Mdp::with_initial(StateId s) const {
  if (s >= num_states()) throw Error(ErrorCode::MalformedModel, "initial state out of range");
  Mdp copy = *this;
  copy.initial_ = s;
  return copy;
}

Mdp validate_mdp(RawMdp raw) {
  std::vector<std::string> errors;
  const std::size_t n = raw.num_states;

  if (n == 0) errors.emplace_back("model has no states");
  if (raw.choices.size() != n) {
    errors.push_back("expected choices for " + std::to_string(n) + " states, got " +
                     std::to_string(raw.choices.size()));
  }
  if (raw.labels.size() != n) {
    errors.push_back("expected labels for " + std::to_string(n) + " states, got " +
                     std::to_string(raw.labels.size()));
  }
  if (n > 0 && raw.initial >= n) {
    errors.push_back("initial state " + std::to_string(raw.initial) + " out of range");
  }

  for (std::size_t s = 0; s < raw.labels.size(); ++s) {
    for (const auto& p : raw.labels[s]) {
      if (std::find(raw.atomic_props.begin(), raw.atomic_props.end(), p) == raw.atomic_props.end()) {
        errors.push_back("state " + std::to_string(s) + " labeled with undeclared proposition '" + p + "'");
      }
    }
  }

  for (std::size_t s = 0; s < raw.choices.size(); ++s) {
    const auto& row = raw.choices[s];
    if (row.empty()) errors.push_back("state " + std::to_string(s) + " has no enabled action");
    std::vector<ActionId> seen;
    for (const auto& c : row) {
      const std::string where = "state " + std::to_string(s) + " action #" + std::to_string(c.action);
      if (c.action >= raw.action_names.size()) {
        errors.push_back(where + ": unknown action id");
      } else if (std::find(seen.begin(), seen.end(), c.action) != seen.end()) {
        errors.push_back(where + " ('" + raw.action_names[c.action] + "'): duplicate action");
      }
      seen.push_back(c.action);
      if (c.successors.empty()) errors.push_back(where + ": empty distribution");
      double sum = 0.0;
      for (const auto& succ : c.successors) {
        if (succ.target >= n) {
          errors.push_back(where + ": successor " + std::to_string(succ.target) + " out of range");
        }
        if (!(succ.probability >= 0.0 && succ.probability <= 1.0)) {
          errors.push_back(where + ": probability " + std::to_string(succ.probability) + " outside [0,1]");
        }
        if (!std::isfinite(succ.reward)) errors.push_back(where + ": non-finite reward");
        sum += succ.probability;
      }
      if (!c.successors.empty() && std::abs(sum - 1.0) > kProbabilityTolerance) {
        errors.push_back(where + ": probabilities sum to " + std::to_string(sum));
      }
    }
  }

  if (!errors.empty()) throw MalformedModel(std::move(errors));

  Mdp m;
  m.initial_ = raw.initial;
  m.atomic_props_ = std::move(raw.atomic_props);
  m.labels_ = std::move(raw.labels);
  m.action_names_ = std::move(raw.action_names);
  m.choices_ = std::move(raw.choices);
  return m;
}

StateId sample_transition(const Mdp& mdp, StateId s, std::size_t local_action, Rng& rng) {
  const Choice& c = mdp.choice(s, local_action);
  double u = rng.uniform();
  for (const auto& succ : c.successors) {
    if (u < succ.probability) return succ.target;
    u -= succ.probability;
  }
  // Rounding slack: fall back to the last successor with positive mass.
  for (auto it = c.successors.rbegin(); it != c.successors.rend(); ++it) {
    if (it->probability > 0.0) return it->target;
  }
  return c.successors.back().target;
}

StationaryPolicy StationaryPolicy::pure(const Mdp& mdp, std::span<const std::size_t> actions) {
  if (actions.size() != mdp.num_states()) {
    throw Error(ErrorCode::PolicyMismatch, "positional policy has wrong number of states");
  }
  StationaryPolicy p;
  p.probabilities.resize(mdp.num_states());
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    if (actions[s] >= mdp.num_choices(s)) {
      throw Error(ErrorCode::PolicyMismatch, "action not enabled at state " + std::to_string(s));
    }
    p.probabilities[s].assign(mdp.num_choices(s), 0.0);
    p.probabilities[s][actions[s]] = 1.0;
  }
  return p;
}

void check_policy(const Mdp& mdp, const StationaryPolicy& policy) {
  if (policy.probabilities.size() != mdp.num_states()) {
    throw Error(ErrorCode::PolicyMismatch, "policy covers " + std::to_string(policy.probabilities.size()) +
                                               " states, model has " + std::to_string(mdp.num_states()));
  }
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    const auto& d = policy.probabilities[s];
    if (d.size() != mdp.num_choices(s)) {
      throw Error(ErrorCode::PolicyMismatch, "state " + std::to_string(s) + ": distribution over " +
                                                 std::to_string(d.size()) + " actions, " +
                                                 std::to_string(mdp.num_choices(s)) + " enabled");
    }
    double sum = 0.0;
    for (double p : d) {
      if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::PolicyMismatch, "bad probability at state " + std::to_string(s));
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbabilityTolerance) {
      throw Error(ErrorCode::PolicyMismatch, "state " + std::to_string(s) + ": distribution sums to " + std::to_string(sum));
    }
  }
}

MarkovChain induce_chain(const Mdp& mdp, const StationaryPolicy& policy) {
  check_policy(mdp, policy);
  MarkovChain chain;
  chain.initial = mdp.initial();
  chain.rows.resize(mdp.num_states());
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    // target -> (probability, probability-weighted reward)
    std::map<StateId, std::pair<double, double>> acc;
    const auto choices = mdp.choices(s);
    for (std::size_t a = 0; a < choices.size(); ++a) {
      const double pa = policy.probabilities[s][a];
      if (pa == 0.0) continue;
      for (const auto& succ : choices[a].successors) {
        auto& [p, r] = acc[succ.target];
        p += pa * succ.probability;
        r += pa * succ.probability * succ.reward;
      }
    }
    auto& row = chain.rows[s];
    row.reserve(acc.size());
    for (const auto& [t, pr] : acc) {
      row.push_back({t, pr.first, pr.first > 0.0 ? pr.second / pr.first : 0.0});
    }
  }
  return chain;
}

MarkovChain induce_chain(const Mdp& mdp, std::span<const std::size_t> positional) {
  return induce_chain(mdp, StationaryPolicy::pure(mdp, positional));
}

}  // namespace omega_avg
