#include "omega_avg/product.hpp"

#include <algorithm>

#include "omega_avg/errors.hpp"

namespace omega_avg {

ProductEnv::ProductEnv(std::shared_ptr<const Mdp> mdp, std::shared_ptr<const RewardMachine> machine)
    : mdp_(std::move(mdp)), machine_(std::move(machine)) {
  letters_ = machine_->automaton().letters_for(*mdp_);
  if (machine_->automaton().num_states() >= (std::size_t{1} << 20)) {
    throw Error(ErrorCode::ProductTooLarge, "automaton too large for product state keys");
  }
  intern({mdp_->initial(), machine_->initial()});
}

std::uint64_t ProductEnv::key(const ProductState& s) const noexcept {
  return (static_cast<std::uint64_t>(s.mdp_state) << 21) |
         (static_cast<std::uint64_t>(s.machine.automaton_state) << 1) | s.machine.bit;
}

std::size_t ProductEnv::intern(const ProductState& state) {
  const auto [it, inserted] = index_.try_emplace(key(state), states_.size());
  if (inserted) {
    states_.push_back(state);
    nodes_.emplace_back();
  }
  return it->second;
}

const ProductNode& ProductEnv::node(std::size_t id) {
  if (id >= nodes_.size()) throw Error(ErrorCode::IllegalAction, "unknown product state id " + std::to_string(id));
  if (!nodes_[id]) expand(id);
  return *nodes_[id];
}

void ProductEnv::expand(std::size_t id) {
  auto node = std::make_unique<ProductNode>();
  const ProductState here = states_[id];
  const StateId s = here.mdp_state;
  const MachineState u = here.machine;
  const Letter l = letters_[s];
  const auto choices = machine_->move_choices(u, l);
  const auto mdp_choices = mdp_->choices(s);

  for (std::size_t a = 0; a < mdp_choices.size(); ++a) {
    for (std::size_t q : choices) {
      const auto outcomes = machine_->move_outcomes(u, l, q);
      std::vector<ProductTransition> row;
      for (const auto& succ : mdp_choices[a].successors) {
        for (const auto& o : outcomes) {
          const double rho = o.adds_external ? machine_->external(s, succ.target) : 0.0;
          row.push_back({intern({succ.target, o.next}), succ.probability, o.weight, o.reward + rho, rho});
        }
      }
      node->actions.emplace_back(Move{a, q});
      node->transitions.push_back(std::move(row));
      node->accepting.push_back(outcomes.front().accepting);
      node->resets.push_back(outcomes.front().resets);
    }
  }
  for (EpsilonKind k : machine_->epsilon_actions(u, l)) {
    const auto o = machine_->epsilon_outcome(u, k);
    node->actions.emplace_back(Epsilon{k});
    node->transitions.push_back({{intern({s, o.next}), 1.0, Weight::One, o.reward, 0.0}});
    node->accepting.push_back(false);
    node->resets.push_back(o.resets);
  }
  nodes_[id] = std::move(node);
}

ProductEnv::Step ProductEnv::step(std::size_t id, std::size_t action, Rng& rng, double beta) {
  const ProductNode& n = node(id);
  if (action >= n.actions.size()) {
    throw Error(ErrorCode::IllegalAction, "action #" + std::to_string(action) + " not offered in product state " +
                                              std::to_string(id));
  }
  const auto& row = n.transitions[action];
  double x = rng.uniform();
  const ProductTransition* picked = nullptr;
  for (const auto& t : row) {
    const double p = t.mdp_probability * weight_value(t.weight, beta);
    if (x < p) {
      picked = &t;
      break;
    }
    x -= p;
  }
  if (picked == nullptr) {
    // Rounding slack: last outcome with positive mass.
    for (auto it = row.rbegin(); it != row.rend(); ++it) {
      if (it->mdp_probability * weight_value(it->weight, beta) > 0.0) {
        picked = &*it;
        break;
      }
    }
    if (picked == nullptr) picked = &row.back();
  }
  return {picked->next, picked->reward, n.accepting[action], n.resets[action]};
}

std::vector<ProductAction> product_actions(ProductEnv& env, const ProductState& state) {
  return env.node(env.intern(state)).actions;
}

StepOutcome product_step(ProductEnv& env, const ProductState& state, const ProductAction& action, Rng& rng,
                         std::uint64_t step_index) {
  const std::size_t id = env.intern(state);
  const auto& actions = env.node(id).actions;
  const auto it = std::find(actions.begin(), actions.end(), action);
  if (it == actions.end()) throw Error(ErrorCode::IllegalAction, "action not offered in this product state");
  const auto st = env.step(id, static_cast<std::size_t>(it - actions.begin()), rng, env.machine().beta_at(step_index));
  return {env.state(st.next), st.reward, st.accepting};
}

std::string state_name(const ProductState& state, const RewardMachine& machine) {
  std::string q = state.machine.automaton_state == machine.sink() ? "sink"
                                                                  : std::to_string(state.machine.automaton_state);
  std::string out = "(" + std::to_string(state.mdp_state) + ",q" + q;
  if (machine.kind() == MachineKind::Lexicographic) out += ",b" + std::to_string(state.machine.bit);
  return out + ")";
}

std::string action_name(const Mdp& mdp, const RewardMachine& machine, const ProductState& state,
                        const ProductAction& action) {
  if (const auto* e = std::get_if<Epsilon>(&action)) return std::string(to_string(e->kind));
  const auto& m = std::get<Move>(action);
  const std::string q = m.successor == machine.sink() ? "sink" : std::to_string(m.successor);
  return mdp.action_name(state.mdp_state, m.action) + "/q" + q;
}

std::optional<std::size_t> ExplicitProduct::find(const ProductState& s) const {
  // States are few at desk scale; a linear scan keeps the struct plain.
  const auto it = std::find(states.begin(), states.end(), s);
  if (it == states.end()) return std::nullopt;
  return static_cast<std::size_t>(it - states.begin());
}

ExplicitProduct build_explicit_product(std::shared_ptr<const Mdp> mdp, std::shared_ptr<const RewardMachine> machine,
                                       std::optional<double> beta, std::size_t cap) {
  ProductEnv env(mdp, machine);
  double b = 0.0;
  if (machine->kind() == MachineKind::Lexicographic) {
    b = beta.value_or(static_cast<const LexicographicRewardMachine&>(*machine).beta());
    if (!(b > 0.0 && b < 1.0)) throw Error(ErrorCode::BadBeta, "evaluation beta must lie in (0,1)");
  }
  for (std::size_t id = 0; id < env.num_known_states(); ++id) {
    if (env.num_known_states() > cap) {
      throw Error(ErrorCode::ProductTooLarge, "product exceeds " + std::to_string(cap) + " states");
    }
    env.node(id);
  }
  if (env.num_known_states() > cap) {
    throw Error(ErrorCode::ProductTooLarge, "product exceeds " + std::to_string(cap) + " states");
  }

  std::vector<ProductState> states;
  std::vector<std::vector<ProductAction>> actions;
  std::vector<std::vector<std::vector<double>>> external;
  std::vector<std::vector<bool>> is_move;
  RawMdp raw;
  raw.num_states = env.num_known_states();
  raw.initial = 0;
  raw.atomic_props = mdp->atomic_props();
  std::map<std::string, ActionId> names;
  for (std::size_t id = 0; id < env.num_known_states(); ++id) {
    const ProductState& ps = env.state(id);
    const ProductNode& n = env.node(id);
    states.push_back(ps);
    actions.push_back(n.actions);
    raw.labels.push_back(mdp->label(ps.mdp_state));
    std::vector<Choice> row;
    std::vector<std::vector<double>> ext;
    std::vector<bool> moves;
    for (std::size_t a = 0; a < n.actions.size(); ++a) {
      const std::string name = action_name(*mdp, *machine, ps, n.actions[a]);
      auto [it, inserted] = names.try_emplace(name, raw.action_names.size());
      if (inserted) raw.action_names.push_back(name);
      Choice c;
      c.action = it->second;
      c.accepting = n.accepting[a];
      c.resets = n.resets[a];
      std::vector<double> e;
      for (const auto& t : n.transitions[a]) {
        c.successors.push_back({t.next, t.mdp_probability * weight_value(t.weight, b), t.reward});
        e.push_back(t.external);
      }
      row.push_back(std::move(c));
      ext.push_back(std::move(e));
      moves.push_back(std::holds_alternative<Move>(n.actions[a]));
    }
    raw.choices.push_back(std::move(row));
    external.push_back(std::move(ext));
    is_move.push_back(std::move(moves));
  }
  return ExplicitProduct{validate_mdp(std::move(raw)), std::move(states), std::move(actions), std::move(external),
                         std::move(is_move), std::move(machine)};
}

ExplicitProduct build_automaton_product(std::shared_ptr<const Mdp> mdp, const BuchiAutomaton& aut, std::size_t cap) {
  return build_explicit_product(std::move(mdp), std::make_shared<const AutomatonMachine>(aut), std::nullopt, cap);
}

}  // namespace omega_avg
