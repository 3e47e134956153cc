#include "omega_avg/mdp_analysis.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace omega_avg {

std::vector<std::size_t> scc_index(const Graph& graph, std::size_t* count) {
  constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
  const std::size_t n = graph.size();
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0), comp(n, kUnvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<StateId> stack;
  std::vector<std::pair<StateId, std::size_t>> work;  // (node, next edge)
  std::size_t next_index = 0, next_comp = 0;

  for (StateId root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    work.emplace_back(root, 0);
    while (!work.empty()) {
      auto& [v, edge] = work.back();
      if (edge == 0 && index[v] == kUnvisited) {
        index[v] = low[v] = next_index++;
        stack.push_back(v);
        on_stack[v] = true;
      }
      if (edge < graph[v].size()) {
        const StateId w = graph[v][edge++];
        if (index[w] == kUnvisited) {
          work.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        StateId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = next_comp;
        } while (w != v);
        ++next_comp;
      }
      const StateId done = v;
      work.pop_back();
      if (!work.empty()) {
        const StateId parent = work.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
    }
  }
  if (count) *count = next_comp;
  return comp;
}

Graph support_graph(const Mdp& mdp) {
  Graph g(mdp.num_states());
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    for (const auto& c : mdp.choices(s)) {
      for (const auto& succ : c.successors) {
        if (succ.probability > 0.0) g[s].push_back(succ.target);
      }
    }
    std::sort(g[s].begin(), g[s].end());
    g[s].erase(std::unique(g[s].begin(), g[s].end()), g[s].end());
  }
  return g;
}

Graph support_graph(const MarkovChain& chain) {
  Graph g(chain.num_states());
  for (StateId s = 0; s < chain.num_states(); ++s) {
    for (const auto& succ : chain.rows[s]) {
      if (succ.probability > 0.0) g[s].push_back(succ.target);
    }
  }
  return g;
}

std::vector<bool> reachable_from(const Graph& graph, const std::vector<StateId>& sources) {
  std::vector<bool> seen(graph.size(), false);
  std::deque<StateId> queue;
  for (StateId s : sources) {
    if (!seen[s]) {
      seen[s] = true;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const StateId s = queue.front();
    queue.pop_front();
    for (StateId t : graph[s]) {
      if (!seen[t]) {
        seen[t] = true;
        queue.push_back(t);
      }
    }
  }
  return seen;
}

std::vector<bool> can_reach(const Graph& graph, const std::vector<bool>& targets) {
  Graph reverse(graph.size());
  for (StateId s = 0; s < graph.size(); ++s) {
    for (StateId t : graph[s]) reverse[t].push_back(s);
  }
  std::vector<StateId> sources;
  for (StateId s = 0; s < targets.size(); ++s) {
    if (targets[s]) sources.push_back(s);
  }
  return reachable_from(reverse, sources);
}

MecDecomposition mec_decomposition(const Mdp& mdp) {
  const std::size_t n = mdp.num_states();
  std::vector<std::vector<bool>> alive(n);
  std::vector<bool> active(n, true);
  for (StateId s = 0; s < n; ++s) alive[s].assign(mdp.num_choices(s), true);

  std::vector<std::size_t> comp;
  for (;;) {
    Graph g(n);
    for (StateId s = 0; s < n; ++s) {
      if (!active[s]) continue;
      const auto choices = mdp.choices(s);
      for (std::size_t a = 0; a < choices.size(); ++a) {
        if (!alive[s][a]) continue;
        for (const auto& succ : choices[a].successors) {
          if (succ.probability > 0.0 && active[succ.target]) g[s].push_back(succ.target);
        }
      }
    }
    comp = scc_index(g);

    bool changed = false;
    for (StateId s = 0; s < n; ++s) {
      if (!active[s]) continue;
      const auto choices = mdp.choices(s);
      bool any = false;
      for (std::size_t a = 0; a < choices.size(); ++a) {
        if (!alive[s][a]) continue;
        for (const auto& succ : choices[a].successors) {
          if (succ.probability > 0.0 && (!active[succ.target] || comp[succ.target] != comp[s])) {
            alive[s][a] = false;
            changed = true;
            break;
          }
        }
        any = any || alive[s][a];
      }
      if (!any) {
        active[s] = false;
        changed = true;
      }
    }
    if (!changed) break;
  }

  MecDecomposition result;
  result.membership.assign(n, std::nullopt);
  std::vector<std::optional<std::size_t>> comp_to_mec;
  for (StateId s = 0; s < n; ++s) {
    if (!active[s]) continue;
    if (comp[s] >= comp_to_mec.size()) comp_to_mec.resize(comp[s] + 1);
    auto& slot = comp_to_mec[comp[s]];
    if (!slot) {
      slot = result.components.size();
      result.components.emplace_back();
    }
    auto& ec = result.components[*slot];
    ec.states.push_back(s);
    std::vector<std::size_t> acts;
    for (std::size_t a = 0; a < alive[s].size(); ++a) {
      if (alive[s][a]) acts.push_back(a);
    }
    ec.actions.push_back(std::move(acts));
    result.membership[s] = *slot;
  }
  return result;
}

bool is_communicating(const Mdp& mdp) {
  std::size_t count = 0;
  scc_index(support_graph(mdp), &count);
  return count == 1;
}

bool is_weakly_communicating(const Mdp& mdp) {
  const auto mecs = mec_decomposition(mdp);
  const auto comp = scc_index(support_graph(mdp));
  std::optional<std::size_t> shared;
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    if (!mecs.membership[s]) continue;
    if (!shared) shared = comp[s];
    if (comp[s] != *shared) return false;
  }
  return true;
}

std::vector<std::vector<StateId>> bottom_sccs(const MarkovChain& chain) {
  const Graph g = support_graph(chain);
  std::size_t count = 0;
  const auto comp = scc_index(g, &count);
  std::vector<bool> bottom(count, true);
  for (StateId s = 0; s < g.size(); ++s) {
    for (StateId t : g[s]) {
      if (comp[t] != comp[s]) bottom[comp[s]] = false;
    }
  }
  std::vector<std::vector<StateId>> by_comp(count);
  for (StateId s = 0; s < g.size(); ++s) {
    if (bottom[comp[s]]) by_comp[comp[s]].push_back(s);
  }
  std::vector<std::vector<StateId>> out;
  for (auto& c : by_comp) {
    if (!c.empty()) out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace omega_avg
