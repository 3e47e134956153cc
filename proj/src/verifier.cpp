#include "omega_avg/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "omega_avg/errors.hpp"
#include "omega_avg/mdp_analysis.hpp"

namespace omega_avg {

std::string_view to_string(ResultKind kind) {
  switch (kind) {
    case ResultKind::OptimalSat: return "optimal_sat";
    case ResultKind::PolicySat: return "policy_sat";
    case ResultKind::PolicyGain: return "policy_gain";
    case ResultKind::Reach: return "reach";
  }
  return "reach";
}

std::vector<double> max_reach_probabilities(const Mdp& mdp, const std::vector<bool>& target, const SolverOptions& opts,
                                            double* residual) {
  const std::size_t n = mdp.num_states();
  if (target.size() != n) throw Error(ErrorCode::BadConfig, "target mask has wrong size");
  const auto maybe = can_reach(support_graph(mdp), target);
  std::vector<double> x(n, 0.0);
  std::vector<StateId> open;
  for (StateId s = 0; s < n; ++s) {
    if (target[s]) {
      x[s] = 1.0;
    } else if (maybe[s]) {
      open.push_back(s);
    }
  }
  double delta = 0.0;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    delta = 0.0;
    for (StateId s : open) {
      double best = 0.0;
      for (const auto& c : mdp.choices(s)) {
        double v = 0.0;
        for (const auto& succ : c.successors) v += succ.probability * x[succ.target];
        best = std::max(best, v);
      }
      delta = std::max(delta, std::abs(best - x[s]));
      x[s] = best;
    }
    if (delta < opts.tolerance) break;
  }
  if (residual) *residual = delta;
  return x;
}

VerificationResult max_reach_probability(const Mdp& mdp, const std::vector<bool>& target, const SolverOptions& opts) {
  double residual = 0.0;
  const auto x = max_reach_probabilities(mdp, target, opts, &residual);
  return {x[mdp.initial()], residual, ResultKind::Reach};
}

std::vector<bool> accepting_mec_states(const Mdp& product) {
  std::vector<bool> out(product.num_states(), false);
  for (const auto& mec : mec_decomposition(product).components) {
    bool accepting = false;
    for (std::size_t i = 0; i < mec.states.size() && !accepting; ++i) {
      for (std::size_t a : mec.actions[i]) {
        if (product.choice(mec.states[i], a).accepting) {
          accepting = true;
          break;
        }
      }
    }
    if (accepting) {
      for (StateId s : mec.states) out[s] = true;
    }
  }
  return out;
}

VerificationResult optimal_satisfaction_probability(std::shared_ptr<const Mdp> mdp, const BuchiAutomaton& aut,
                                                    const SolverOptions& opts, std::size_t cap) {
  const auto product = build_automaton_product(std::move(mdp), aut, cap);
  auto r = max_reach_probability(product.mdp, accepting_mec_states(product.mdp), opts);
  r.kind = ResultKind::OptimalSat;
  return r;
}

ResolvedPolicy resolve_policy(const ExplicitProduct& product, const ProductPolicy& policy) {
  ResolvedPolicy out;
  out.actions.assign(product.num_states(), 0);
  for (std::size_t s = 0; s < product.num_states(); ++s) {
    const auto it = policy.find(product.states[s]);
    if (it == policy.end()) {
      ++out.defaulted;
      continue;
    }
    const auto& acts = product.actions[s];
    const auto pos = std::find(acts.begin(), acts.end(), it->second);
    if (pos == acts.end()) {
      throw Error(ErrorCode::PolicyMismatch, "policy action at " + state_name(product.states[s], *product.machine) +
                                                 " is not offered there");
    }
    out.actions[s] = static_cast<std::size_t>(pos - acts.begin());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Markov chain analysis

ChainDecomposition decompose_chain(const MarkovChain& chain) {
  ChainDecomposition out;
  out.bsccs = bottom_sccs(chain);
  const std::size_t n = chain.num_states();
  std::vector<long> bscc_of(n, -1);
  for (std::size_t i = 0; i < out.bsccs.size(); ++i) {
    for (StateId s : out.bsccs[i]) bscc_of[s] = static_cast<long>(i);
  }
  out.absorption.assign(out.bsccs.size(), 0.0);
  if (bscc_of[chain.initial] >= 0) {
    out.absorption[static_cast<std::size_t>(bscc_of[chain.initial])] = 1.0;
    return out;
  }

  // Transient states that the initial state can reach.
  const auto reach = reachable_from(support_graph(chain), {chain.initial});
  std::vector<long> local(n, -1);
  std::vector<StateId> transient;
  for (StateId s = 0; s < n; ++s) {
    if (reach[s] && bscc_of[s] < 0) {
      local[s] = static_cast<long>(transient.size());
      transient.push_back(s);
    }
  }
  const auto m = static_cast<Eigen::Index>(transient.size());
  const auto k = static_cast<Eigen::Index>(out.bsccs.size());
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, k);
  for (Eigen::Index i = 0; i < m; ++i) {
    triplets.emplace_back(i, i, 1.0);
    for (const auto& e : chain.rows[transient[static_cast<std::size_t>(i)]]) {
      if (local[e.target] >= 0) {
        triplets.emplace_back(i, local[e.target], -e.probability);
      } else if (bscc_of[e.target] >= 0) {
        rhs(i, bscc_of[e.target]) += e.probability;
      }
    }
  }
  Eigen::SparseMatrix<double> a(m, m);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw Error(ErrorCode::BadConfig, "absorption system is singular");
  const Eigen::MatrixXd x = lu.solve(rhs);
  out.residual = (a * x - rhs).cwiseAbs().maxCoeff();
  const auto row = local[chain.initial];
  for (Eigen::Index j = 0; j < k; ++j) out.absorption[static_cast<std::size_t>(j)] = std::clamp(x(row, j), 0.0, 1.0);
  return out;
}

std::vector<double> stationary_distribution(const MarkovChain& chain, const std::vector<StateId>& bscc,
                                            const SolverOptions& opts, double* residual) {
  const std::size_t m = bscc.size();
  std::vector<long> local(chain.num_states(), -1);
  for (std::size_t i = 0; i < m; ++i) local[bscc[i]] = static_cast<long>(i);

  auto apply = [&](const std::vector<double>& pi) {
    std::vector<double> next(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      for (const auto& e : chain.rows[bscc[i]]) {
        if (local[e.target] >= 0) next[static_cast<std::size_t>(local[e.target])] += pi[i] * e.probability;
      }
    }
    return next;
  };

  std::vector<double> pi(m, 1.0 / static_cast<double>(m));
  if (m < 1000) {
    const auto n = static_cast<Eigen::Index>(m);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < m; ++i) {
      for (const auto& e : chain.rows[bscc[i]]) {
        if (local[e.target] >= 0) a(local[e.target], static_cast<Eigen::Index>(i)) += e.probability;
      }
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) -= 1.0;
    }
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    const Eigen::VectorXd x = a.partialPivLu().solve(b);
    for (std::size_t i = 0; i < m; ++i) pi[i] = x(static_cast<Eigen::Index>(i));
  } else {
    // Damped power iteration; the lazy chain is aperiodic with the same
    // stationary distribution.
    for (std::size_t it = 0; it < opts.max_iterations; ++it) {
      const auto next = apply(pi);
      double delta = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double v = 0.5 * pi[i] + 0.5 * next[i];
        delta = std::max(delta, std::abs(v - pi[i]));
        pi[i] = v;
      }
      if (delta < opts.tolerance * 1e-2) break;
    }
  }
  if (residual) {
    const auto next = apply(pi);
    double r = 0.0;
    for (std::size_t i = 0; i < m; ++i) r = std::max(r, std::abs(next[i] - pi[i]));
    *residual = r;
  }
  return pi;
}

namespace {

/// Chain of a positional policy with caller-chosen edge values; duplicate
/// targets are kept as separate edges.
MarkovChain policy_chain(const Mdp& mdp, std::span<const std::size_t> positional,
                         const std::function<double(StateId, std::size_t, std::size_t)>& value) {
  if (positional.size() != mdp.num_states()) {
    throw Error(ErrorCode::PolicyMismatch, "positional policy covers " + std::to_string(positional.size()) +
                                               " states, product has " + std::to_string(mdp.num_states()));
  }
  MarkovChain chain;
  chain.initial = mdp.initial();
  chain.rows.resize(mdp.num_states());
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    if (positional[s] >= mdp.num_choices(s)) {
      throw Error(ErrorCode::PolicyMismatch, "action not enabled at product state " + std::to_string(s));
    }
    const auto& c = mdp.choice(s, positional[s]);
    for (std::size_t k = 0; k < c.successors.size(); ++k) {
      chain.rows[s].push_back({c.successors[k].target, c.successors[k].probability, value(s, positional[s], k)});
    }
  }
  return chain;
}

double rate(const MarkovChain& chain, const std::vector<StateId>& bscc, const std::vector<double>& pi) {
  double g = 0.0;
  for (std::size_t i = 0; i < bscc.size(); ++i) {
    double r = 0.0;
    for (const auto& e : chain.rows[bscc[i]]) r += e.probability * e.reward;
    g += pi[i] * r;
  }
  return g;
}

}  // namespace

VerificationResult markov_chain_gain(const MarkovChain& chain, const SolverOptions& opts) {
  const auto dec = decompose_chain(chain);
  double value = 0.0;
  double residual = dec.residual;
  for (std::size_t i = 0; i < dec.bsccs.size(); ++i) {
    if (dec.absorption[i] == 0.0) continue;
    double r = 0.0;
    const auto pi = stationary_distribution(chain, dec.bsccs[i], opts, &r);
    residual = std::max(residual, r);
    value += dec.absorption[i] * rate(chain, dec.bsccs[i], pi);
  }
  return {value, residual, ResultKind::PolicyGain};
}

VerificationResult policy_satisfaction_probability(const ExplicitProduct& product,
                                                   std::span<const std::size_t> positional,
                                                   const SolverOptions& /*opts*/) {
  const Mdp& mdp = product.mdp;
  const auto chain = policy_chain(mdp, positional, [](StateId, std::size_t, std::size_t) { return 0.0; });
  const auto dec = decompose_chain(chain);
  double value = 0.0;
  for (std::size_t i = 0; i < dec.bsccs.size(); ++i) {
    bool accepting = false, resets = false;
    for (StateId s : dec.bsccs[i]) {
      const auto& c = mdp.choice(s, positional[s]);
      accepting = accepting || c.accepting;
      resets = resets || c.resets;
    }
    if (accepting && !resets) value += dec.absorption[i];
  }
  return {std::clamp(value, 0.0, 1.0), dec.residual, ResultKind::PolicySat};
}

VerificationResult policy_average_reward(const Mdp& product, std::span<const std::size_t> positional,
                                         const SolverOptions& opts) {
  const auto chain = policy_chain(product, positional, [&](StateId s, std::size_t a, std::size_t k) {
    return product.choice(s, a).successors[k].reward;
  });
  return markov_chain_gain(chain, opts);
}

VerificationResult policy_external_gain(const ExplicitProduct& product, std::span<const std::size_t> positional,
                                        const SolverOptions& opts) {
  const auto chain = policy_chain(product.mdp, positional, [&](StateId s, std::size_t a, std::size_t k) {
    return product.external[s][a][k];
  });
  const auto dec = decompose_chain(chain);
  double value = 0.0;
  double residual = dec.residual;
  for (std::size_t i = 0; i < dec.bsccs.size(); ++i) {
    if (dec.absorption[i] == 0.0) continue;
    double r = 0.0;
    const auto& bscc = dec.bsccs[i];
    const auto pi = stationary_distribution(chain, bscc, opts, &r);
    residual = std::max(residual, r);
    double moves = 0.0;
    for (std::size_t j = 0; j < bscc.size(); ++j) {
      if (product.is_move[bscc[j]][positional[bscc[j]]]) moves += pi[j];
    }
    if (moves > 0.0) value += dec.absorption[i] * rate(chain, bscc, pi) / moves;
  }
  return {value, residual, ResultKind::PolicyGain};
}

PolicyEnumeration enumerate_gain_optimal_policies(const Mdp& product, double tie_tolerance, std::size_t limit) {
  const std::size_t n = product.num_states();
  std::size_t total = 1;
  for (StateId s = 0; s < n; ++s) {
    const std::size_t k = product.num_choices(s);
    if (total > limit / k) throw Error(ErrorCode::BadConfig, "too many positional policies to enumerate");
    total *= k;
  }
  PolicyEnumeration out;
  out.best_gain = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> policy(n, 0);
  std::vector<std::pair<double, std::vector<std::size_t>>> near_best;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (StateId s = 0; s < n; ++s) {
      policy[s] = rest % product.num_choices(s);
      rest /= product.num_choices(s);
    }
    const double g = policy_average_reward(product, policy).value;
    if (g > out.best_gain) {
      out.best_gain = g;
      std::erase_if(near_best, [&](const auto& e) { return e.first < g - tie_tolerance; });
    }
    if (g >= out.best_gain - tie_tolerance) near_best.emplace_back(g, policy);
  }
  out.evaluated = total;
  for (auto& [g, p] : near_best) out.optimal.push_back(std::move(p));
  return out;
}

}  // namespace omega_avg
