#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "omega_avg/benchmarks.hpp"
#include "omega_avg/errors.hpp"
#include "omega_avg/mdp_analysis.hpp"
#include "omega_avg/verifier.hpp"

using namespace omega_avg;
using oracle::make_mdp;

namespace {

/// Positional policy picking, in each product state, the action with the
/// given name; states not listed take their first action.
std::vector<std::size_t> by_name(const ExplicitProduct& p, const std::map<std::string, std::string>& choice) {
  std::vector<std::size_t> out(p.num_states(), 0);
  for (std::size_t s = 0; s < p.num_states(); ++s) {
    const auto it = choice.find(state_name(p.states[s], *p.machine));
    if (it == choice.end()) continue;
    bool found = false;
    for (std::size_t a = 0; a < p.mdp.num_choices(s); ++a) {
      if (p.mdp.action_name(s, a) == it->second) {
        out[s] = a;
        found = true;
      }
    }
    REQUIRE_MESSAGE(found, (it->first + " " + it->second));
  }
  return out;
}

/// The k-cycle strategy on the infinite-memory model, unrolled into a chain:
/// 0 (a) -> 1 -> ... -> k+1 -> 0 where the k edges inside the unlabeled state
/// pay +1.
Mdp k_cycle(std::size_t k) {
  std::vector<oracle::Edge> edges;
  edges.push_back({0, "go", {{1, 1.0}}, 0.0});
  for (std::size_t i = 1; i <= k; ++i) edges.push_back({i, "stay", {{i + 1, 1.0}}, 1.0});
  edges.push_back({k + 1, "go", {{0, 1.0}}, 0.0});
  std::vector<std::vector<std::string>> labels(k + 2);
  labels[0] = {"a"};
  return make_mdp(k + 2, {"a"}, labels, edges);
}

}  // namespace

TEST_CASE("max reachability") {
  const auto mdp = make_mdp(3, {}, {}, {{0, "try", {{0, 0.5}, {1, 0.5}}}, {1, "stay", {{1, 1.0}}},
                                         {2, "stay", {{2, 1.0}}}});
  CHECK(max_reach_probability(mdp, {true, false, false}).value == 1.0);
  CHECK(max_reach_probability(mdp, {false, false, true}).value == 0.0);
  const auto r = max_reach_probability(mdp, {false, true, false});
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.residual <= 1e-10);

  // max over actions: 0.3 direct vs 0.6 via a detour.
  const auto choice = make_mdp(4, {}, {}, {{0, "a", {{2, 0.3}, {3, 0.7}}}, {0, "b", {{1, 1.0}}},
                                             {1, "c", {{2, 0.6}, {3, 0.4}}}, {2, "s", {{2, 1.0}}},
                                             {3, "s", {{3, 1.0}}}});
  CHECK(max_reach_probability(choice, {false, false, true, false}).value == doctest::Approx(0.6));
}

TEST_CASE("optimal satisfaction") {
  const auto top = BuchiAutomaton("top", {}, 0, {{{{0, true}}}});
  auto grid = std::make_shared<const Mdp>(grid_mdp(3, 3, 0.2));
  CHECK(optimal_satisfaction_probability(grid, top).value == doctest::Approx(1.0));

  auto two = std::make_shared<const Mdp>(two_state_mdp());
  CHECK(optimal_satisfaction_probability(two, bundled_automaton("fg-a-or-fg-not-a")).value ==
        doctest::Approx(1.0));
  CHECK(optimal_satisfaction_probability(two, bundled_automaton("fga")).value == doctest::Approx(1.0));

  auto ring = std::make_shared<const Mdp>(ring_mdp(4));
  CHECK(optimal_satisfaction_probability(ring, bundled_automaton("fgb")).value == doctest::Approx(0.0));

  // F a from a state that reaches a only with probability 0.25.
  const auto leaky = std::make_shared<const Mdp>(make_mdp(
      3, {"a"}, {{}, {"a"}, {}}, {{0, "x", {{1, 0.25}, {2, 0.75}}}, {1, "s", {{1, 1.0}}}, {2, "s", {{2, 1.0}}}}));
  CHECK(optimal_satisfaction_probability(leaky, bundled_automaton("fa")).value == doctest::Approx(0.25));
}

TEST_CASE("policy satisfaction") {
  auto two = std::make_shared<const Mdp>(two_state_mdp());
  const auto product = build_explicit_product(two, build_reset_machine(bundled_automaton("fga"), -1.0, false));
  SUBCASE("stay on the accepting loop") {
    const auto pol = by_name(product, {{"(0,q0)", "go/q0"}, {"(1,q0)", "stay/q1"}, {"(1,q1)", "stay/q1"}});
    CHECK(policy_satisfaction_probability(product, pol).value == doctest::Approx(1.0));
  }
  SUBCASE("trapped without acceptance") {
    const auto pol = by_name(product, {{"(0,q0)", "stay/q0"}});
    CHECK(policy_satisfaction_probability(product, pol).value == 0.0);
  }
  SUBCASE("cycling through resets does not count") {
    // Accepting edge (1,q1) -> (0,q1), then a reset back to q0.
    const auto pol = by_name(product, {{"(0,q0)", "go/q0"}, {"(1,q0)", "stay/q1"}, {"(1,q1)", "go/q1"},
                                       {"(0,q1)", "eps"}});
    CHECK(policy_satisfaction_probability(product, pol).value == 0.0);
  }
  SUBCASE("k-cycle strategy satisfies GF a") {
    for (std::size_t k : {1, 2, 10}) {
      auto mdp = std::make_shared<const Mdp>(k_cycle(k));
      const auto p = build_automaton_product(mdp, bundled_automaton("gfa"));
      const std::vector<std::size_t> only(p.num_states(), 0);
      CHECK(policy_satisfaction_probability(p, only).value == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("policy average reward") {
  SUBCASE("unit reward everywhere") {
    const auto mdp = make_mdp(2, {}, {}, {{0, "x", {{0, 0.3}, {1, 0.7}}, 1.0}, {1, "y", {{0, 1.0}}, 1.0}});
    CHECK(policy_average_reward(mdp, std::vector<std::size_t>{0, 0}).value == doctest::Approx(1.0));
  }
  SUBCASE("k-cycle gains") {
    for (std::size_t k : {1, 2, 10}) {
      const auto mdp = k_cycle(k);
      const std::vector<std::size_t> only(mdp.num_states(), 0);
      const double expected = double(k) / double(k + 2);
      CHECK(std::abs(policy_average_reward(mdp, only).value - expected) < 1e-9);
    }
  }
  SUBCASE("two bottom components reached with probability one half") {
    const auto mdp = make_mdp(3, {}, {}, {{0, "x", {{1, 0.5}, {2, 0.5}}}, {1, "s", {{1, 1.0}}, 0.0},
                                           {2, "s", {{2, 1.0}}, 1.0}});
    CHECK(policy_average_reward(mdp, std::vector<std::size_t>{0, 0, 0}).value == doctest::Approx(0.5));
  }
  SUBCASE("agrees with Cesaro averaging") {
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 2 + rng.below(5);
      std::vector<oracle::Edge> edges;
      for (StateId s = 0; s < n; ++s) {
        const StateId t1 = rng.below(n), t2 = rng.below(n);
        const double p = 0.1 + 0.8 * rng.uniform();
        if (t1 == t2) {
          edges.push_back({s, "x", {{t1, 1.0}}, rng.uniform()});
        } else {
          edges.push_back({s, "x", {{t1, p}, {t2, 1.0 - p}}, rng.uniform()});
        }
      }
      const auto mdp = make_mdp(n, {}, {}, edges);
      const std::vector<std::size_t> only(n, 0);
      CHECK(std::abs(policy_average_reward(mdp, only).value - oracle::cesaro_gain(mdp, only, 200000)) < 1e-3);
    }
  }
  SUBCASE("unichain gain does not depend on the start") {
    const auto mdp = grid_mdp(3, 3, 0.2);
    std::vector<std::size_t> pol(mdp.num_states(), 0);
    for (StateId s = 0; s < mdp.num_states(); ++s) pol[s] = s % mdp.num_choices(s);
    // Reward 1 on entering the corner: rebuild with rewards on state 8 edges.
    RawMdp raw;
    raw.num_states = mdp.num_states();
    raw.atomic_props = mdp.atomic_props();
    raw.action_names = mdp.action_names();
    for (StateId s = 0; s < mdp.num_states(); ++s) {
      raw.labels.push_back(mdp.label(s));
      std::vector<Choice> cs(mdp.choices(s).begin(), mdp.choices(s).end());
      for (auto& c : cs) {
        for (auto& succ : c.successors) succ.reward = succ.target == 8 ? 1.0 : 0.0;
      }
      raw.choices.push_back(std::move(cs));
    }
    const auto rewarded = validate_mdp(std::move(raw));
    const auto chain = induce_chain(rewarded, pol);
    REQUIRE(bottom_sccs(chain).size() == 1);
    const double g0 = policy_average_reward(rewarded, pol).value;
    for (StateId s = 1; s < rewarded.num_states(); ++s) {
      CHECK(std::abs(policy_average_reward(rewarded.with_initial(s), pol).value - g0) < 1e-9);
    }
  }
}

TEST_CASE("stationary distribution") {
  // Birth-death chain with detailed balance: pi_i proportional to 2^i.
  const auto mdp = make_mdp(3, {}, {}, {{0, "x", {{0, 1.0 / 3}, {1, 2.0 / 3}}}, {1, "x", {{0, 1.0 / 3}, {2, 2.0 / 3}}},
                                         {2, "x", {{1, 1.0 / 3}, {2, 2.0 / 3}}}});
  const auto chain = induce_chain(mdp, std::vector<std::size_t>{0, 0, 0});
  const auto pi = stationary_distribution(chain, {0, 1, 2});
  CHECK(pi[0] == doctest::Approx(1.0 / 7));
  CHECK(pi[1] == doctest::Approx(2.0 / 7));
  CHECK(pi[2] == doctest::Approx(4.0 / 7));

  const auto decomposition = decompose_chain(induce_chain(
      make_mdp(4, {}, {}, {{0, "x", {{1, 0.2}, {2, 0.8}}}, {1, "x", {{1, 1.0}}}, {2, "x", {{3, 1.0}}},
                           {3, "x", {{2, 1.0}}}}),
      std::vector<std::size_t>{0, 0, 0, 0}));
  REQUIRE(decomposition.bsccs.size() == 2);
  double total = 0;
  for (double a : decomposition.absorption) total += a;
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("policy enumeration") {
  // Stay for 0 or move to a state paying 1 forever.
  const auto mdp = make_mdp(2, {}, {}, {{0, "stay", {{0, 1.0}}, 0.0}, {0, "go", {{1, 1.0}}, 0.0},
                                         {1, "stay", {{1, 1.0}}, 1.0}, {1, "back", {{0, 1.0}}, 0.0}});
  const auto e = enumerate_gain_optimal_policies(mdp);
  CHECK(e.evaluated == 4);
  CHECK(e.best_gain == doctest::Approx(1.0));
  REQUIRE(e.optimal.size() == 1);
  CHECK(e.optimal[0] == std::vector<std::size_t>{1, 0});
  try {
    enumerate_gain_optimal_policies(mdp, 1e-9, 3);
    FAIL("expected BadConfig");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::BadConfig);
  }
}

TEST_CASE("binary satisfaction on bundled benchmarks") {
  for (const auto& name : benchmark_names()) {
    const auto b = load_benchmark(name);
    const double v = optimal_satisfaction_probability(b.mdp, b.automaton).value;
    CHECK_MESSAGE((std::abs(v) < 1e-6 || std::abs(v - 1.0) < 1e-6), name);
  }
}
