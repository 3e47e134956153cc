// omega-avg: generate benchmarks, classify automata, learn, verify and sweep.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "omega_avg/automaton.hpp"
#include "omega_avg/benchmarks.hpp"
#include "omega_avg/errors.hpp"
#include "omega_avg/experiment.hpp"
#include "omega_avg/mdp_io.hpp"
#include "omega_avg/verifier.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace omega_avg;

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
}

json rewards_to_json(const ExternalReward& rho) {
  json list = json::array();
  for (const auto& [edge, v] : rho.values()) list.push_back({{"from", edge.first}, {"to", edge.second}, {"value", v}});
  return {{"rewards", list}};
}

// Model given either as a bundled benchmark or as files.
struct ModelArgs {
  std::string benchmark;
  std::string mdp_path;
  std::string automaton_path;
  std::string rewards_path;

  void add(CLI::App* app, bool allow_benchmark) {
    if (allow_benchmark) app->add_option("--benchmark", benchmark, "bundled benchmark name");
    app->add_option("--mdp", mdp_path, "MDP JSON file");
    app->add_option("--automaton", automaton_path, "HOA automaton file");
    app->add_option("--rewards", rewards_path, "external reward JSON file");
  }

  Benchmark load() const {
    if (!benchmark.empty()) {
      if (!mdp_path.empty() || !automaton_path.empty()) {
        throw Error(ErrorCode::BadConfig, "--benchmark excludes --mdp/--automaton");
      }
      auto b = load_benchmark(benchmark);
      if (!rewards_path.empty()) b.rho = ExternalReward::from_json(load_json(rewards_path), *b.mdp);
      return b;
    }
    if (mdp_path.empty() || automaton_path.empty()) {
      throw Error(ErrorCode::BadConfig, "need --benchmark or both --mdp and --automaton");
    }
    auto mdp = std::make_shared<const Mdp>(load_mdp(mdp_path));
    auto aut = load_automaton(automaton_path);
    ExternalReward rho({}, *mdp);
    if (!rewards_path.empty()) rho = ExternalReward::from_json(load_json(rewards_path), *mdp);
    return Benchmark{fs::path(mdp_path).stem().string(), mdp, std::move(aut), std::move(rho),
                     fs::path(automaton_path).stem().string()};
  }
};

// Flags shared by learn and sweep.
struct RunArgs {
  std::string method = "diff-q";
  std::string machine = "reset";
  std::optional<double> c;
  std::optional<double> c2;

  void add(CLI::App* app, RunSpec& spec) {
    app->add_option("--method", method, "diff-q | hahn-q | bozkurt-q")->capture_default_str();
    app->add_option("--machine", machine, "reset | reset-hard | lexicographic")->capture_default_str();
    app->add_option("--steps", spec.learner.steps, "training steps")->capture_default_str();
    app->add_option("--c", c, "reset reward (negative); for the lexicographic machine a penalty magnitude for c2");
    app->add_option("--beta", spec.beta, "bit-flip probability of the lexicographic machine")->capture_default_str();
    app->add_option("--c1", spec.c1, "lexicographic reset reward, default -(max rho - min rho) - 1");
    app->add_option("--c2", c2, "lexicographic clear-bit penalty");
    app->add_option("--beta-decay", spec.beta_schedule_scale, "beta(i) = beta / (1 + i / scale)");
    app->add_option("--eval-beta", spec.eval_beta, "beta for the limit gain evaluation")->capture_default_str();
    app->add_flag("--episodic", spec.learner.episodic, "episodic training for the discounted baselines");
    app->add_option("--episode-length", spec.learner.episode_length)->capture_default_str();
    app->add_flag("--reproducible", spec.reproducible, "write wall-clock times as 0");
  }

  void apply(RunSpec& spec) const {
    spec.method = parse_method(method);
    spec.machine = parse_machine(machine);
    if (c) {
      if (spec.machine == MachineChoice::Lexicographic) {
        spec.c2 = -std::abs(*c);
      } else {
        spec.c = *c;
      }
    }
    if (c2) spec.c2 = *c2;
  }
};

void add_learner_options(CLI::App* app, LearnerConfig& l) {
  app->add_option("--alpha", l.alpha)->capture_default_str();
  app->add_option("--eta", l.eta)->capture_default_str();
  app->add_option("--epsilon", l.epsilon)->capture_default_str();
  app->add_option("--alpha-decay", l.alpha_decay)->capture_default_str();
  app->add_option("--zeta", l.zeta)->capture_default_str();
  app->add_option("--gamma-b", l.gamma_b)->capture_default_str();
  app->add_option("--gamma", l.gamma)->capture_default_str();
  app->add_option("--seed", l.seed)->capture_default_str();
}

// ---------------------------------------------------------------------------

int cmd_gen(const std::string& id, const GeneratorParams& params, const std::string& out_dir, bool emit_machine) {
  const auto files = generate_benchmark(id, params);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  save_json(dir / "mdp.json", mdp_to_json(files.mdp));
  const ExternalReward rho = files.rho.value_or(ExternalReward({}, files.mdp));
  if (files.rho) save_json(dir / "rewards.json", rewards_to_json(*files.rho));
  for (const auto& name : files.automata) {
    write_text((dir / (name + ".hoa")).string(), bundled_automata().at(name));
    if (emit_machine) {
      const auto aut = bundled_automaton(name);
      save_json(dir / ("machine-" + name + "-reset.json"), machine_table(*build_reset_machine(aut, -1.0, false)));
      if (files.rho) {
        LexicographicParams p;
        p.c1 = default_c1(rho);
        save_json(dir / ("machine-" + name + "-lexicographic.json"),
                  machine_table(*build_lexicographic_machine(aut, rho, p)));
      }
    }
  }
  json summary = {{"id", id}, {"states", files.mdp.num_states()}, {"automata", files.automata},
                  {"out_dir", out_dir}};
  std::cout << summary.dump() << '\n';
  return 0;
}

int cmd_check(const std::string& path) {
  const auto aut = load_automaton(path);
  json out = {{"states", aut.num_states()}, {"deterministic", aut.deterministic()}, {"complete", aut.complete()}};
  if (!aut.deterministic()) {
    out["status"] = "unchecked";
    out["absolute_liveness"] = nullptr;
    out["stable"] = nullptr;
    out["fairness"] = nullptr;
  } else {
    const auto cls = classify_specification(aut);
    out["status"] = "checked";
    out["absolute_liveness"] = cls.absolute_liveness;
    out["stable"] = cls.stable;
    out["fairness"] = cls.fairness;
  }
  std::cout << out.dump() << '\n';
  return 0;
}

int cmd_learn(const ModelArgs& model, RunSpec spec, const RunArgs& run, const std::string& out) {
  run.apply(spec);
  const auto bench = model.load();
  spec.benchmark = bench.name;
  if (spec.machine == MachineChoice::Lexicographic && !spec.c1) spec.c1 = default_c1(bench.rho);
  const auto outcome = run_learning(bench.mdp, bench.automaton, bench.rho, spec);
  const auto doc = outcome_to_json(spec, outcome, *bench.mdp, *outcome.machine);
  write_text(out, doc.dump(2) + "\n");
  return 0;
}

int cmd_verify(const ModelArgs& model, const std::string& policy_path, const std::string& dump_product) {
  const auto bench = model.load();
  const json doc = load_json(policy_path);
  RunSpec spec = spec_from_json(doc.at("config"));
  const auto product = learning_product(bench.mdp, bench.automaton, bench.rho, spec);
  const auto policy = policy_from_json(doc, product);
  const auto ev = evaluate_policy(bench.mdp, bench.automaton, bench.rho, spec, policy);
  const auto best = optimal_satisfaction_probability(bench.mdp, bench.automaton);
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json out = {{"policy_sat", {{"value", ev.sat_prob}, {"kind", to_string(ResultKind::PolicySat)}}},
              {"policy_gain", {{"value", ev.product_gain}, {"kind", to_string(ResultKind::PolicyGain)}}},
              {"optimal_sat", {{"value", best.value}, {"residual", best.residual},
                               {"kind", to_string(ResultKind::OptimalSat)}}},
              {"avg_reward", ev.avg_reward()},
              {"external_gain", opt(ev.external_gain)},
              {"external_gain_limit", opt(ev.external_gain_limit)},
              {"product_states", ev.product_states},
              {"unvisited_defaulted", ev.unvisited_defaulted},
              {"residual", ev.residual}};
  if (!dump_product.empty()) save_json(dump_product, mdp_to_json(product.mdp, true));
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_sweep(const std::string& benchmark, SweepSpec sweep, const RunArgs& run, const std::string& out) {
  run.apply(sweep.base);
  sweep.base.benchmark = benchmark;
  const auto bench = load_benchmark(benchmark);
  write_text(out, run_sweep(sweep, bench));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Average-reward learning for omega-regular objectives"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "write a generated benchmark to disk");
  std::string gen_id, gen_out = ".";
  GeneratorParams gp;
  bool emit_machine = false;
  gen->add_option("--id", gen_id, "two-state-fga | multichain-example | infmem | grid | ring")->required();
  gen->add_option("--n", gp.n)->capture_default_str();
  gen->add_option("--m", gp.m)->capture_default_str();
  gen->add_option("--slip", gp.slip)->capture_default_str();
  gen->add_option("--k", gp.k)->capture_default_str();
  gen->add_option("--out-dir", gen_out)->capture_default_str();
  gen->add_flag("--emit-machine", emit_machine, "also dump reward machine tables");

  auto* check = app.add_subcommand("check", "classify a deterministic automaton");
  std::string check_path;
  check->add_option("--automaton", check_path)->required();

  auto* learn = app.add_subcommand("learn", "train on one model and verify the greedy policy");
  ModelArgs learn_model;
  RunSpec learn_spec;
  RunArgs learn_run;
  std::string learn_out = "-";
  learn_model.add(learn, true);
  learn_run.add(learn, learn_spec);
  add_learner_options(learn, learn_spec.learner);
  learn->add_option("--out", learn_out, "result JSON ('-' for stdout)")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "evaluate a stored policy exactly");
  ModelArgs verify_model;
  std::string policy_path, dump_product;
  verify_model.add(verify, true);
  verify->add_option("--policy", policy_path, "result JSON written by learn")->required();
  verify->add_option("--dump-product", dump_product, "write the explicit product as JSON");

  auto* sweep = app.add_subcommand("sweep", "log-uniform hyperparameter sweep");
  std::string sweep_bench, sweep_out = "-";
  SweepSpec sweep_spec;
  RunArgs sweep_run;
  sweep->add_option("--benchmark", sweep_bench)->required();
  sweep_run.add(sweep, sweep_spec.base);
  sweep->add_option("--samples", sweep_spec.samples)->capture_default_str();
  sweep->add_option("--master-seed", sweep_spec.master_seed)->capture_default_str();
  sweep->add_option("--threads", sweep_spec.threads, "0 = hardware concurrency")->capture_default_str();
  sweep->add_option("--out", sweep_out, "CSV file ('-' for stdout)")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen(gen_id, gp, gen_out, emit_machine);
    if (*check) return cmd_check(check_path);
    if (*learn) return cmd_learn(learn_model, learn_spec, learn_run, learn_out);
    if (*verify) return cmd_verify(verify_model, policy_path, dump_product);
    if (*sweep) return cmd_sweep(sweep_bench, sweep_spec, sweep_run, sweep_out);
  } catch (const Error& e) {
    std::cerr << "omega-avg: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "omega-avg: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
