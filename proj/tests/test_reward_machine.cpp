#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "omega_avg/benchmarks.hpp"
#include "omega_avg/errors.hpp"
#include "omega_avg/reward_machine.hpp"

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

BuchiAutomaton top() { return BuchiAutomaton("top", {}, 0, {{{{0, true}}}}); }

}  // namespace

TEST_CASE("reset machine over FG a") {
  const auto m = build_reset_machine(bundled_automaton("fga"), -1.0, false);
  Rng rng(0);
  for (std::size_t q = 0; q < 2; ++q) {
    CHECK(m->epsilon_actions({q, 0}, 0) == std::vector<EpsilonKind>{EpsilonKind::Reset});
    const auto st = machine_step(*m, {q, 0}, EpsilonKind::Reset, 0, rng);
    CHECK(st.next == MachineState{0, 0});
    CHECK(st.reward == -1.0);
    CHECK_FALSE(st.accepting);
  }
  const auto loop = machine_step(*m, {1, 0}, LetterInput{1, 1, 1}, 1, rng);
  CHECK(loop.next == MachineState{1, 0});
  CHECK(loop.reward == 1.0);
  CHECK(loop.accepting);
  const auto wait = machine_step(*m, {0, 0}, LetterInput{1, 1, 1}, 0, rng);
  CHECK(wait.reward == 0.0);
  // q1 has no move on !a without hard resets.
  CHECK(m->move_choices({1, 0}, 0).empty());
  CHECK(code_of([&] { machine_step(*m, {1, 0}, LetterInput{0, 0, 0}, 1, rng); }) == ErrorCode::IllegalSuccessor);
}

TEST_CASE("reset machine over the all-accepting automaton") {
  const auto m = build_reset_machine(top(), -1.0, false);
  Rng rng(0);
  CHECK(machine_step(*m, {0, 0}, EpsilonKind::Reset, 0, rng).reward == -1.0);
  CHECK(machine_step(*m, {0, 0}, LetterInput{0, 0, 0}, 0, rng).reward == 1.0);
}

TEST_CASE("reset reward must be negative") {
  CHECK(code_of([] { build_reset_machine(top(), 0.0, false); }) == ErrorCode::NonNegativeC);
  CHECK(code_of([] { build_reset_machine(top(), 0.5, true); }) == ErrorCode::NonNegativeC);
}

TEST_CASE("hard resets") {
  // q0 -a-> q1 (accepting loop), q0 -!a-> q2 (rejecting sink).
  const BuchiAutomaton aut("split", {"a"}, 0,
                           {{{{2, false}}, {{1, false}}}, {{{1, true}}, {{1, true}}}, {{{2, false}}, {{2, false}}}});
  const auto m = build_reset_machine(aut, -2.0, true);
  Rng rng(0);
  const auto st = machine_step(*m, {0, 0}, LetterInput{0, 0, 0}, 2, rng);
  CHECK(st.next == MachineState{0, 0});
  CHECK(st.reward == -2.0);
  CHECK(m->move_outcomes({0, 0}, 0, 2)[0].resets);

  // Missing transitions become a reset through the sink choice.
  const auto fga = build_reset_machine(bundled_automaton("fga"), -1.0, true);
  CHECK(fga->move_choices({1, 0}, 0) == std::vector<std::size_t>{fga->sink()});
  CHECK(machine_step(*fga, {1, 0}, LetterInput{0, 0, 0}, fga->sink(), rng).next == MachineState{0, 0});
}

TEST_CASE("lexicographic machine construction") {
  const auto mdp = infmem_mdp();
  const auto rho = infmem_rewards(mdp);
  CHECK(rho.min() == 0.0);
  CHECK(rho.max() == 1.0);
  CHECK(default_c1(rho) == -2.0);

  LexicographicParams p;
  p.c1 = -1.5;
  const auto m = build_lexicographic_machine(bundled_automaton("gfa"), rho, p);
  CHECK(m->num_states() == 4);

  p.c1 = -0.5;
  CHECK(code_of([&] { build_lexicographic_machine(bundled_automaton("gfa"), rho, p); }) == ErrorCode::BadC1);
  p.c1 = -2.0;
  p.beta = 0.0;
  CHECK(code_of([&] { build_lexicographic_machine(bundled_automaton("gfa"), rho, p); }) == ErrorCode::BadBeta);
  p.beta = 1.0;
  CHECK(code_of([&] { build_lexicographic_machine(bundled_automaton("gfa"), rho, p); }) == ErrorCode::BadBeta);
  p.beta = 0.05;
  p.c2 = 0.0;
  CHECK(code_of([&] { build_lexicographic_machine(bundled_automaton("gfa"), rho, p); }) == ErrorCode::BadC2);
}

TEST_CASE("lexicographic machine steps") {
  const auto mdp = infmem_mdp();
  const auto rho = infmem_rewards(mdp);
  LexicographicParams p;
  p.c1 = -2.0;
  p.c2 = -50.0;
  const auto m = build_lexicographic_machine(bundled_automaton("gfa"), rho, p);
  Rng rng(3);

  SUBCASE("b=1 accepting edge clears the bit and pays c1 + rho") {
    // gfa: q0 -a-> q1 accepting. Reading a in MDP state 0, edge (0, 0).
    const auto st = machine_step(*m, {0, 1}, LetterInput{1, 0, 0}, 1, rng);
    CHECK(st.next == MachineState{1, 0});
    CHECK(st.reward == -2.0);
    CHECK(st.accepting);
    const auto paid = machine_step(*m, {0, 1}, LetterInput{0, 1, 1}, 0, rng);
    CHECK(paid.next == MachineState{0, 1});
    CHECK(paid.reward == doctest::Approx(-1.0));
  }
  SUBCASE("flip frequency at b=0") {
    int flips = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) flips += machine_step(*m, {0, 0}, LetterInput{0, 1, 1}, 0, rng).next.bit;
    CHECK(std::abs(flips / double(n) - 0.05) < 0.005);
  }
  SUBCASE("b=0 pays rho") {
    const auto st = machine_step(*m, {0, 0}, LetterInput{0, 1, 1}, 0, rng);
    CHECK(st.reward == 1.0);
  }
  SUBCASE("epsilon guards") {
    CHECK(m->epsilon_actions({0, 0}, 0).empty());
    CHECK(m->epsilon_actions({1, 1}, 0) ==
          std::vector<EpsilonKind>{EpsilonKind::ResetAutomaton, EpsilonKind::ClearBit});
    CHECK(code_of([&] { machine_step(*m, {0, 1}, EpsilonKind::ResetAutomaton, 0, rng); }) ==
          ErrorCode::IllegalEpsilon);
    CHECK(code_of([&] { machine_step(*m, {1, 0}, EpsilonKind::ClearBit, 0, rng); }) == ErrorCode::IllegalEpsilon);
    const auto e1 = machine_step(*m, {1, 1}, EpsilonKind::ResetAutomaton, 0, rng);
    CHECK(e1.next == MachineState{0, 1});
    CHECK(e1.reward == -50.0);
    const auto e2 = machine_step(*m, {1, 1}, EpsilonKind::ClearBit, 0, rng);
    CHECK(e2.next == MachineState{1, 0});
    CHECK(e2.reward == -50.0);
  }
}

TEST_CASE("beta schedules") {
  const auto s = BetaSchedule::harmonic(0.05, 1e6);
  CHECK(s(0) == 0.05);
  double prev = s(0);
  for (std::uint64_t i = 1; i < (std::uint64_t{1} << 60); i *= 7) {
    CHECK(s(i) < prev);
    prev = s(i);
  }
  CHECK(code_of([] { BetaSchedule::from_function([](std::uint64_t i) { return 0.01 + 1e-12 * double(i); }); }) ==
        ErrorCode::BadSchedule);
  CHECK(code_of([] { BetaSchedule::from_function([](std::uint64_t) { return 0.05; }); }) == ErrorCode::BadSchedule);

  const auto mdp = infmem_mdp();
  LexicographicParams p;
  p.schedule = s;
  const auto m = build_lexicographic_machine(bundled_automaton("gfa"), infmem_rewards(mdp), p);
  CHECK(m->beta_at(0) == 0.05);
  CHECK(m->beta_at(1'000'000) == doctest::Approx(0.025));
}

TEST_CASE("machine table") {
  const auto t = machine_table(*build_reset_machine(bundled_automaton("fga"), -1.0, false));
  CHECK(t["kind"] == "reset");
  CHECK(t["c"] == -1.0);
  const auto mdp = infmem_mdp();
  const auto lex = machine_table(*build_lexicographic_machine(bundled_automaton("gfa"), infmem_rewards(mdp), {}));
  CHECK(lex["kind"] == "lexicographic");
}
