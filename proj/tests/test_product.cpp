#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "omega_avg/benchmarks.hpp"
#include "omega_avg/errors.hpp"
#include "omega_avg/mdp_analysis.hpp"
#include "omega_avg/product.hpp"

using namespace omega_avg;

namespace {

std::size_t count_moves(const std::vector<ProductAction>& actions) {
  std::size_t n = 0;
  for (const auto& a : actions) n += std::holds_alternative<Move>(a);
  return n;
}

}  // namespace

TEST_CASE("action sets") {
  auto mdp = std::make_shared<const Mdp>(two_state_mdp());
  SUBCASE("two MDP actions times two automaton successors") {
    ProductEnv env(mdp, build_reset_machine(bundled_automaton("fga"), -1.0, false));
    const auto actions = product_actions(env, {1, {0, 0}});
    CHECK(actions.size() == 5);
    CHECK(count_moves(actions) == 4);
    CHECK(std::holds_alternative<Epsilon>(actions.back()));
  }
  SUBCASE("deterministic automaton") {
    ProductEnv env(mdp, build_reset_machine(bundled_automaton("gfa"), -1.0, false));
    const auto actions = product_actions(env, {0, {0, 0}});
    CHECK(actions.size() == 3);
    CHECK(count_moves(actions) == 2);
  }
  SUBCASE("rejecting dead end offers only epsilon") {
    ProductEnv env(mdp, build_reset_machine(bundled_automaton("fga"), -1.0, false));
    const auto actions = product_actions(env, {0, {1, 0}});
    REQUIRE(actions.size() == 1);
    CHECK(std::holds_alternative<Epsilon>(actions[0]));
  }
}

TEST_CASE("product steps") {
  auto mdp = std::make_shared<const Mdp>(two_state_mdp());
  ProductEnv env(mdp, build_reset_machine(bundled_automaton("fga"), -1.0, false));
  Rng rng(11);
  SUBCASE("epsilon keeps the MDP state") {
    const auto out = product_step(env, {1, {1, 0}}, Epsilon{EpsilonKind::Reset}, rng);
    CHECK(out.next == ProductState{1, {0, 0}});
    CHECK(out.reward == -1.0);
    CHECK_FALSE(out.accepting_edge);
  }
  SUBCASE("accepting move") {
    std::size_t stay = 0;
    while (mdp->action_name(1, stay) != "stay") ++stay;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng r(seed);
      const auto out = product_step(env, {1, {1, 0}}, Move{stay, 1}, r);
      CHECK(out.next == ProductState{1, {1, 0}});
      CHECK(out.reward == 1.0);
      CHECK(out.accepting_edge);
    }
  }
  SUBCASE("illegal action") {
    try {
      product_step(env, {0, {1, 0}}, Move{0, 1}, rng);
      FAIL("expected IllegalAction");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::IllegalAction);
    }
  }
}

TEST_CASE("explicit product sizes") {
  auto two = std::make_shared<const Mdp>(two_state_mdp());
  CHECK(build_explicit_product(two, build_reset_machine(bundled_automaton("fga"), -1.0, false)).num_states() <= 4);

  auto grid = std::make_shared<const Mdp>(grid_mdp(4, 4, 0.0));
  const auto abc = bundled_automaton("f-abc");
  CHECK(abc.num_states() == 4);
  CHECK(build_explicit_product(grid, build_reset_machine(abc, -1.0, false)).num_states() <= 64);

  auto inf = std::make_shared<const Mdp>(infmem_mdp());
  LexicographicParams p;
  const auto lex = build_lexicographic_machine(bundled_automaton("gfa"), infmem_rewards(*inf), p);
  CHECK(build_explicit_product(inf, lex).num_states() <= 8);
}

TEST_CASE("explicit product reproduces on-the-fly trajectories") {
  auto mdp = std::make_shared<const Mdp>(grid_mdp(3, 3, 0.2));
  const auto machine = build_reset_machine(bundled_automaton("gfa-gfb"), -1.0, false);
  const auto product = build_explicit_product(mdp, machine);
  ProductEnv env(mdp, machine);
  Rng a(5), b(5), pick(9);
  std::size_t s_env = env.initial(), s_exp = 0;
  for (int t = 0; t < 5000; ++t) {
    REQUIRE(env.num_actions(s_env) == product.mdp.num_choices(s_exp));
    const std::size_t act = pick.below(product.mdp.num_choices(s_exp));
    const auto st = env.step(s_env, act, a, 0.0);
    const auto next = sample_transition(product.mdp, s_exp, act, b);
    // Ids of a trajectory-driven env follow visit order; compare states.
    REQUIRE(env.state(st.next) == product.states[next]);
    s_env = st.next;
    s_exp = next;
  }
  CHECK(env.num_known_states() <= product.num_states());
}

TEST_CASE("products with resets are communicating") {
  for (const auto& name : benchmark_names()) {
    const auto b = load_benchmark(name);
    const auto product = build_explicit_product(b.mdp, build_reset_machine(b.automaton, -1.0, false));
    CHECK_MESSAGE(is_communicating(product.mdp), name);
    CHECK(oracle::communicating(product.mdp) == is_communicating(product.mdp));
  }
}

TEST_CASE("product cap") {
  auto grid = std::make_shared<const Mdp>(grid_mdp(4, 4, 0.1));
  try {
    build_explicit_product(grid, build_reset_machine(bundled_automaton("f-goal"), -1.0, false), std::nullopt, 5);
    FAIL("expected ProductTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ProductTooLarge);
  }
}

TEST_CASE("names") {
  auto mdp = std::make_shared<const Mdp>(two_state_mdp());
  const auto m = build_reset_machine(bundled_automaton("fga"), -1.0, false);
  CHECK(state_name({1, {0, 0}}, *m) == "(1,q0)");
  std::size_t stay = 0;
  while (mdp->action_name(1, stay) != "stay") ++stay;
  CHECK(action_name(*mdp, *m, {1, {0, 0}}, Move{stay, 1}) == "stay/q1");
  CHECK(action_name(*mdp, *m, {1, {0, 0}}, Epsilon{EpsilonKind::Reset}) == "eps");
}
