#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "omega_avg/automaton.hpp"
#include "omega_avg/benchmarks.hpp"
#include "omega_avg/errors.hpp"

using namespace omega_avg;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

const char* kTop = R"(HOA: v1
States: 1
Start: 0
AP: 0
acc-name: Buchi
Acceptance: 1 Inf(0)
--BODY--
State: 0
[t] 0 {0}
--END--
)";

}  // namespace

TEST_CASE("parse FG a") {
  const auto aut = bundled_automaton("fga");
  CHECK(aut.num_states() == 2);
  CHECK_FALSE(aut.deterministic());
  CHECK(aut.is_accepting(1, 1, 1));
  CHECK_FALSE(aut.has_transition(1, 0, 1));
  CHECK(aut.has_transition(0, 0, 0));
  CHECK(aut.has_transition(0, 1, 1));
}

TEST_CASE("parse the all-accepting automaton") {
  const auto aut = parse_automaton(kTop);
  CHECK(aut.num_states() == 1);
  CHECK(aut.num_letters() == 1);
  CHECK(aut.is_accepting(0, 0, 0));
  CHECK(aut.deterministic());
  CHECK(aut.complete());
}

TEST_CASE("label expressions") {
  const auto aut = parse_automaton(R"(HOA: v1
States: 2
Start: 0
AP: 2 "a" "b"
acc-name: Buchi
Acceptance: 1 Inf(0)
--BODY--
/* comment */
State: 0
[!(0 | 1)] 0
[0 & !1 | t & 1] 1 {0}
State: 1
[t] 1
--END--
)");
  CHECK(aut.has_transition(0, 0b00, 0));
  CHECK(aut.is_accepting(0, 0b01, 1));
  CHECK(aut.is_accepting(0, 0b10, 1));
  CHECK(aut.is_accepting(0, 0b11, 1));
  CHECK_FALSE(aut.has_transition(0, 0b00, 1));
}

TEST_CASE("unsupported and malformed documents") {
  std::string parity = kTop;
  parity.replace(parity.find("acc-name: Buchi"), 15, "acc-name: parity min even 2");
  CHECK(code_of([&] { parse_automaton(parity); }) == ErrorCode::UnsupportedFeature);

  std::string generalized = kTop;
  generalized.replace(generalized.find("Acceptance: 1 Inf(0)"), 20, "Acceptance: 2 Inf(0)&Inf(1)");
  CHECK(code_of([&] { parse_automaton(generalized); }) == ErrorCode::UnsupportedFeature);

  std::string bad_target = kTop;
  bad_target.replace(bad_target.find("[t] 0"), 5, "[t] 7");
  CHECK(code_of([&] { parse_automaton(bad_target); }) == ErrorCode::ParseError);

  CHECK(code_of([] { parse_automaton("HOA: v2\n"); }) == ErrorCode::ParseError);
}

TEST_CASE("HOA round trip") {
  for (const auto& [name, text] : bundled_automata()) {
    const auto a = parse_automaton(text);
    const auto b = parse_automaton(to_hoa(a));
    REQUIRE(a.num_states() == b.num_states());
    for (std::size_t q = 0; q < a.num_states(); ++q) {
      for (Letter l = 0; l < a.num_letters(); ++l) {
        const auto x = a.successors(q, l), y = b.successors(q, l);
        CHECK(std::vector<AutomatonEdge>(x.begin(), x.end()) == std::vector<AutomatonEdge>(y.begin(), y.end()));
      }
    }
  }
}

TEST_CASE("coaccessibility") {
  SUBCASE("rejecting sink excluded") {
    const auto aut = parse_automaton(R"(HOA: v1
States: 3
Start: 0
AP: 1 "a"
acc-name: Buchi
Acceptance: 1 Inf(0)
--BODY--
State: 0
[0] 1
[!0] 2
State: 1
[t] 1 {0}
State: 2
[t] 2
--END--
)");
    CHECK(coaccessible_states(aut) == std::vector<bool>{true, true, false});
  }
  SUBCASE("multichain automaton") {
    CHECK(coaccessible_states(bundled_automaton("fg-a-or-fg-not-a")) == std::vector<bool>{true, true, true});
  }
  SUBCASE("no accepting transitions") {
    const auto aut = BuchiAutomaton("none", {"a"}, 0, {{{{0, false}}, {{0, false}}}});
    CHECK(coaccessible_states(aut) == std::vector<bool>{false});
  }
}

TEST_CASE("containment on F a") {
  const auto aut = bundled_automaton("fa");
  CHECK(det_language_containment(aut, 0, 0));
  CHECK(det_language_containment(aut, 0, 1));
  CHECK_FALSE(det_language_containment(aut, 1, 0));
  CHECK(oracle::lasso_containment(aut, 0, 1, 4, 4));
  CHECK_FALSE(oracle::lasso_containment(aut, 1, 0, 4, 4));
  CHECK(code_of([] { det_language_containment(bundled_automaton("fga"), 0, 1); }) == ErrorCode::NotDeterministic);
}

TEST_CASE("classification") {
  auto cls = classify_specification(bundled_automaton("fa"));
  CHECK(cls.absolute_liveness);
  CHECK_FALSE(cls.stable);
  CHECK_FALSE(cls.fairness);

  CHECK_FALSE(classify_specification(bundled_automaton("a-or-fb")).absolute_liveness);

  cls = classify_specification(bundled_automaton("gfa"));
  CHECK(cls.absolute_liveness);
  CHECK(cls.stable);
  CHECK(cls.fairness);

  cls = classify_specification(bundled_automaton("ga-or-gfb"));
  CHECK(cls.stable);
  CHECK_FALSE(cls.absolute_liveness);

  // Empty language is not absolutely live.
  const auto empty = BuchiAutomaton("none", {"a"}, 0, {{{{0, false}}, {{0, false}}}});
  CHECK_FALSE(classify_specification(empty).absolute_liveness);

  CHECK(code_of([] { classify_specification(bundled_automaton("fga")); }) == ErrorCode::NotDeterministic);
}

TEST_CASE("containment agrees with lassos on random one-letter-prop automata") {
  Rng rng(7);
  for (int i = 0; i < 40; ++i) {
    const auto aut = oracle::random_deterministic(rng, 1 + rng.below(4), 1, 0.9, 0.3);
    for (std::size_t p = 0; p < aut.num_states(); ++p) {
      for (std::size_t q = 0; q < aut.num_states(); ++q) {
        CHECK(det_language_containment(aut, p, q) == oracle::lasso_containment(aut, p, q, 5, 5));
      }
    }
  }
}

TEST_CASE("letters of MDP states") {
  const auto aut = bundled_automaton("gfa-gfb");
  CHECK(aut.letter_of({"b"}) == 0b10);
  CHECK(aut.letter_of({"a", "b", "zzz"}) == 0b11);
  const auto letters = aut.letters_for(grid_mdp(2, 2, 0.0));
  CHECK(letters[1] == 0b01);
  CHECK(letters[3] == 0b10);
}
