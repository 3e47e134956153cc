#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "omega_avg/benchmarks.hpp"
#include "omega_avg/errors.hpp"
#include "omega_avg/experiment.hpp"
#include "omega_avg/mdp_analysis.hpp"
#include "omega_avg/verifier.hpp"

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

std::vector<std::string> data_rows(const std::string& csv) {
  std::vector<std::string> rows;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("benchmark,", 0) == 0) continue;
    rows.push_back(line);
  }
  return rows;
}

}  // namespace

TEST_CASE("generators") {
  const auto inf = generate_benchmark("infmem", {});
  CHECK(inf.mdp.num_states() == 2);
  CHECK(inf.mdp.holds(0, "a"));
  REQUIRE(inf.rho);
  CHECK((*inf.rho)(1, 1) == 1.0);
  CHECK((*inf.rho)(0, 0) == 0.0);
  CHECK((*inf.rho)(0, 1) == 0.0);

  GeneratorParams g;
  g.n = 4;
  g.m = 4;
  g.slip = 0.0;
  const auto grid = generate_mdp("grid", g);
  CHECK(grid.num_states() == 16);
  for (StateId s = 0; s < 16; ++s) {
    for (const auto& c : grid.choices(s)) CHECK(c.successors.size() == 1);
  }
  g.slip = 0.3;
  CHECK(is_communicating(generate_mdp("grid", g)));
  CHECK(code_of([] { generate_mdp("torus", {}); }) == ErrorCode::UnknownGenerator);
}

TEST_CASE("bundled benchmarks are communicating") {
  CHECK(benchmark_names().size() >= 6);
  for (const auto& name : benchmark_names()) {
    const auto b = load_benchmark(name);
    CHECK_MESSAGE(is_communicating(*b.mdp), name);
  }
}

TEST_CASE("log-uniform sampling") {
  Rng rng(0);
  std::vector<double> xs;
  for (int i = 0; i < 10000; ++i) {
    const double x = log_uniform({0.01, 0.5}, rng);
    CHECK(x >= 0.01);
    CHECK(x <= 0.5);
    xs.push_back(std::log(x));
  }
  std::nth_element(xs.begin(), xs.begin() + 5000, xs.end());
  const double median = std::exp(xs[5000]);
  const double center = std::sqrt(0.01 * 0.5);
  CHECK(std::abs(median - center) / center < 0.1);

  CHECK(log_uniform({0.3, 0.3}, rng) == 0.3);
  CHECK(code_of([&] { log_uniform({0.0, 1.0}, rng); }) == ErrorCode::BadRange);
  CHECK(code_of([&] { log_uniform({-1.0, 1.0}, rng); }) == ErrorCode::BadRange);
}

TEST_CASE("hyperparameter samples are deterministic per index") {
  SweepSpec s;
  s.master_seed = 17;
  const auto a = sample_hyperparameters(s, 3);
  const auto b = sample_hyperparameters(s, 3);
  const auto c = sample_hyperparameters(s, 4);
  CHECK(a.values == b.values);
  CHECK(a.seed == b.seed);
  CHECK(a.values != c.values);
  for (const auto& [name, v] : a.values) {
    const auto r = s.ranges.at(name);
    CHECK(v >= r.lo);
    CHECK(v <= r.hi);
  }
  s.ranges["alpha"] = {0.0, 0.1};
  CHECK(code_of([&] { sample_hyperparameters(s, 0); }) == ErrorCode::BadRange);
}

TEST_CASE("sweep rows") {
  SweepSpec s;
  s.base.benchmark = "two-state-fga";
  s.base.learner.steps = 20000;
  s.base.reproducible = true;
  s.samples = 4;
  s.master_seed = 5;
  const auto bench = load_benchmark("two-state-fga");
  const auto csv = run_sweep(s, bench);
  CHECK(csv.rfind("# omega-avg ", 0) == 0);
  CHECK(csv.find("master_seed=5") != std::string::npos);
  CHECK(csv.find(csv_header()) != std::string::npos);
  const auto rows = data_rows(csv);
  REQUIRE(rows.size() == 4);

  // One sample equals a direct run with the same sampled parameters.
  s.samples = 1;
  const auto single = data_rows(run_sweep(s, bench));
  REQUIRE(single.size() == 1);
  const auto run = sweep_run_spec(s, 0);
  const auto out = run_learning(bench.mdp, bench.automaton, bench.rho, run);
  CHECK(single[0] == csv_row(run, out.eval, 0.0));
  CHECK(single[0] == rows[0]);

  // Thread count does not change the rows.
  s.samples = 4;
  s.threads = 3;
  CHECK(data_rows(run_sweep(s, bench)) == rows);

  const auto fields = std::count(rows[0].begin(), rows[0].end(), ',');
  const auto header = csv_header();
  CHECK(fields == std::count(header.begin(), header.end(), ','));
}

TEST_CASE("result documents") {
  const auto bench = load_benchmark("two-state-fga");
  RunSpec spec;
  spec.benchmark = bench.name;
  spec.learner.steps = 30000;
  spec.reproducible = true;
  const auto out = run_learning(bench.mdp, bench.automaton, bench.rho, spec);
  const auto doc = outcome_to_json(spec, out, *bench.mdp, *out.machine);
  CHECK(doc["wall_time_s"] == 0.0);
  CHECK(doc["verification"]["sat_prob"] == out.eval.sat_prob);

  const auto back = spec_from_json(doc["config"]);
  CHECK(spec_to_json(back) == doc["config"]);

  const auto product = learning_product(bench.mdp, bench.automaton, bench.rho, back);
  const auto policy = policy_from_json(doc, product);
  CHECK(policy == out.train.greedy);
  const auto again = evaluate_policy(bench.mdp, bench.automaton, bench.rho, back, policy);
  CHECK(again.sat_prob == out.eval.sat_prob);
  CHECK(again.product_gain == out.eval.product_gain);

  auto broken = doc;
  broken["policy"][0]["action"] = "fly/q9";
  CHECK(code_of([&] { policy_from_json(broken, product); }) == ErrorCode::PolicyMismatch);
}

TEST_CASE("worker count") {
  CHECK(worker_count(4, 2) == 2);
  CHECK(worker_count(1, 100) == 1);
  CHECK(worker_count(0, 0) == 1);
}
