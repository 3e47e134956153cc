#include "omega_avg/benchmarks.hpp"

#include <algorithm>

#include "omega_avg/errors.hpp"
#include "omega_avg/mdp_analysis.hpp"

namespace omega_avg {

namespace {

/// Builder for deterministic and slippery toy models.
struct ModelBuilder {
  RawMdp raw;
  std::map<std::string, ActionId> ids;

  ModelBuilder(std::size_t n, std::vector<std::string> aps) {
    raw.num_states = n;
    raw.atomic_props = std::move(aps);
    raw.labels.resize(n);
    raw.choices.resize(n);
  }

  void add(StateId s, const std::string& action, std::vector<Successor> succ) {
    auto [it, inserted] = ids.try_emplace(action, raw.action_names.size());
    if (inserted) raw.action_names.push_back(action);
    Choice c;
    c.action = it->second;
    c.successors = std::move(succ);
    raw.choices[s].push_back(std::move(c));
  }

  void go(StateId s, const std::string& action, StateId t) { add(s, action, {{t, 1.0, 0.0}}); }

  Mdp build() { return validate_mdp(std::move(raw)); }
};

Mdp two_state(bool initial_labeled) {
  ModelBuilder b(2, {"a"});
  const StateId labeled = initial_labeled ? 0 : 1;
  b.raw.labels[labeled] = {"a"};
  for (StateId s = 0; s < 2; ++s) {
    b.go(s, "stay", s);
    b.go(s, "go", 1 - s);
  }
  return b.build();
}

}  // namespace

Mdp two_state_mdp() { return two_state(false); }

Mdp infmem_mdp() { return two_state(true); }

ExternalReward infmem_rewards(const Mdp& mdp) { return ExternalReward({{{1, 1}, 1.0}}, mdp); }

Mdp grid_mdp(std::size_t n, std::size_t m, double slip) {
  if (n == 0 || m == 0) throw Error(ErrorCode::BadConfig, "grid needs positive dimensions");
  if (!(slip >= 0.0 && slip < 1.0)) throw Error(ErrorCode::BadConfig, "slip must lie in [0,1)");
  ModelBuilder b(n * m, {"a", "b", "c", "goal"});
  auto id = [m](std::size_t r, std::size_t c) { return r * m + c; };
  b.raw.labels[id(0, m - 1)].push_back("a");
  b.raw.labels[id(n - 1, m - 1)].push_back("b");
  b.raw.labels[id(n - 1, 0)].push_back("c");
  b.raw.labels[id(n - 1, m - 1)].push_back("goal");
  for (auto& l : b.raw.labels) {
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
  }

  // Direction deltas in the order N, E, S, W.
  const int dr[4] = {-1, 0, 1, 0};
  const int dc[4] = {0, 1, 0, -1};
  const char* names[4] = {"N", "E", "S", "W"};
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      auto target = [&](int d) {
        const long nr = static_cast<long>(r) + dr[d];
        const long nc = static_cast<long>(c) + dc[d];
        if (nr < 0 || nc < 0 || nr >= static_cast<long>(n) || nc >= static_cast<long>(m)) return id(r, c);
        return id(static_cast<std::size_t>(nr), static_cast<std::size_t>(nc));
      };
      for (int d = 0; d < 4; ++d) {
        std::map<StateId, double> dist;
        dist[target(d)] += 1.0 - slip;
        if (slip > 0.0) {
          dist[target((d + 1) % 4)] += slip / 2.0;
          dist[target((d + 3) % 4)] += slip / 2.0;
        }
        std::vector<Successor> succ;
        for (const auto& [t, p] : dist) succ.push_back({t, p, 0.0});
        b.add(id(r, c), names[d], std::move(succ));
      }
    }
  }
  return b.build();
}

Mdp ring_mdp(std::size_t k) {
  if (k == 0) throw Error(ErrorCode::BadConfig, "ring needs at least one state");
  ModelBuilder b(k, {"a", "b"});
  b.raw.labels[0] = {"a"};
  for (StateId s = 0; s < k; ++s) {
    b.go(s, "next", (s + 1) % k);
    b.go(s, "stay", s);
  }
  return b.build();
}

Mdp lollipop_mdp(std::size_t prefix, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::BadConfig, "ring needs at least one state");
  ModelBuilder b(prefix + k, {"a", "b"});
  b.raw.labels[prefix] = {"a"};
  for (StateId s = 0; s < prefix; ++s) b.go(s, "next", s + 1);
  for (StateId i = 0; i < k; ++i) {
    b.go(prefix + i, "next", prefix + (i + 1) % k);
    b.go(prefix + i, "stay", prefix + i);
  }
  return b.build();
}

Mdp generate_mdp(std::string_view id, const GeneratorParams& params) {
  Mdp mdp = [&] {
    if (id == "two-state-fga" || id == "multichain-example") return two_state_mdp();
    if (id == "infmem") return infmem_mdp();
    if (id == "grid") return grid_mdp(params.n, params.m, params.slip);
    if (id == "ring") return ring_mdp(params.k);
    throw Error(ErrorCode::UnknownGenerator, "unknown generator '" + std::string(id) + "'");
  }();
  if (!is_communicating(mdp)) {
    throw Error(ErrorCode::GenerationNotCommunicating, "generated model '" + std::string(id) + "' is not communicating");
  }
  return mdp;
}

// ---------------------------------------------------------------------------

namespace {

std::string hoa(const std::string& name, const std::string& aps, std::size_t states, const std::string& body) {
  std::size_t count = static_cast<std::size_t>(std::count(aps.begin(), aps.end(), '"') / 2);
  return "HOA: v1\nname: \"" + name + "\"\nStates: " + std::to_string(states) + "\nStart: 0\nAP: " +
         std::to_string(count) + (aps.empty() ? "" : " " + aps) +
         "\nacc-name: Buchi\nAcceptance: 1 Inf(0)\nproperties: trans-labels explicit-labels trans-acc\n--BODY--\n" +
         body + "--END--\n";
}

}  // namespace

const std::map<std::string, std::string>& bundled_automata() {
  static const std::map<std::string, std::string> table = {
      {"fga", hoa("FG a", "\"a\"", 2,
                  "State: 0\n[t] 0\n[0] 1\n"
                  "State: 1\n[0] 1 {0}\n")},
      {"fg-a-or-fg-not-a", hoa("FG a | FG !a", "\"a\"", 3,
                               "State: 0\n[t] 0\n[0] 1\n[!0] 2\n"
                               "State: 1\n[0] 1 {0}\n"
                               "State: 2\n[!0] 2 {0}\n")},
      {"gfa", hoa("GF a", "\"a\"", 2,
                  "State: 0\n[!0] 0\n[0] 1 {0}\n"
                  "State: 1\n[0] 1 {0}\n[!0] 0\n")},
      {"fa", hoa("F a", "\"a\"", 2,
                 "State: 0\n[!0] 0\n[0] 1\n"
                 "State: 1\n[t] 1 {0}\n")},
      {"a-or-fb", hoa("a | F b", "\"a\" \"b\"", 3,
                      "State: 0\n[0 | 1] 1\n[!0 & !1] 2\n"
                      "State: 1\n[t] 1 {0}\n"
                      "State: 2\n[1] 1\n[!1] 2\n")},
      {"ga-or-gfb", hoa("G a | GF b", "\"a\" \"b\"", 2,
                        "State: 0\n[0] 0 {0}\n[!0] 1\n"
                        "State: 1\n[1] 1 {0}\n[!1] 1\n")},
      {"f-goal", hoa("F goal", "\"goal\"", 2,
                     "State: 0\n[!0] 0\n[0] 1\n"
                     "State: 1\n[t] 1 {0}\n")},
      {"f-abc", hoa("F(a & F(b & F c))", "\"a\" \"b\" \"c\"", 4,
                    "State: 0\n[!0] 0\n[0 & !1] 1\n[0 & 1 & !2] 2\n[0 & 1 & 2] 3\n"
                    "State: 1\n[!1] 1\n[1 & !2] 2\n[1 & 2] 3\n"
                    "State: 2\n[!2] 2\n[2] 3\n"
                    "State: 3\n[t] 3 {0}\n")},
      {"gfa-gfb", hoa("GF a & GF b", "\"a\" \"b\"", 2,
                      "State: 0\n[!0] 0\n[0 & 1] 0 {0}\n[0 & !1] 1\n"
                      "State: 1\n[!1] 1\n[1] 0 {0}\n")},
      {"fgb", hoa("FG b", "\"b\"", 2,
                  "State: 0\n[t] 0\n[0] 1\n"
                  "State: 1\n[0] 1 {0}\n")},
  };
  return table;
}

BuchiAutomaton bundled_automaton(const std::string& name) {
  const auto& table = bundled_automata();
  const auto it = table.find(name);
  if (it == table.end()) throw Error(ErrorCode::BadConfig, "unknown bundled automaton '" + name + "'");
  return parse_automaton(it->second);
}

std::vector<std::string> benchmark_names() {
  return {"two-state-fga", "multichain-example", "infmem",   "grid4x4-goal",
          "grid4x4-abc",   "grid3x3-gfab",       "ring5-gfa", "ring4-fgb"};
}

Benchmark load_benchmark(const std::string& name) {
  auto make = [&](Mdp mdp, const std::string& aut) {
    auto shared = std::make_shared<const Mdp>(std::move(mdp));
    return Benchmark{name, shared, bundled_automaton(aut), ExternalReward({}, *shared), aut};
  };
  if (name == "two-state-fga") return make(two_state_mdp(), "fga");
  if (name == "multichain-example") return make(two_state_mdp(), "fg-a-or-fg-not-a");
  if (name == "infmem") {
    auto b = make(infmem_mdp(), "gfa");
    b.rho = infmem_rewards(*b.mdp);
    return b;
  }
  if (name == "grid4x4-goal") return make(grid_mdp(4, 4, 0.1), "f-goal");
  if (name == "grid4x4-abc") return make(grid_mdp(4, 4, 0.0), "f-abc");
  if (name == "grid3x3-gfab") return make(grid_mdp(3, 3, 0.2), "gfa-gfb");
  if (name == "ring5-gfa") return make(ring_mdp(5), "gfa");
  if (name == "ring4-fgb") return make(ring_mdp(4), "fgb");
  throw Error(ErrorCode::BadConfig, "unknown benchmark '" + name + "'");
}

GeneratedFiles generate_benchmark(std::string_view id, const GeneratorParams& params) {
  GeneratedFiles out{generate_mdp(id, params), {}, std::nullopt};
  if (id == "two-state-fga") out.automata = {"fga"};
  if (id == "multichain-example") out.automata = {"fg-a-or-fg-not-a"};
  if (id == "infmem") {
    out.automata = {"gfa"};
    out.rho = infmem_rewards(out.mdp);
  }
  if (id == "grid") out.automata = {"f-goal", "f-abc", "gfa-gfb"};
  if (id == "ring") out.automata = {"gfa", "fgb"};
  return out;
}

}  // namespace omega_avg
