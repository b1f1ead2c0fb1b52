#include "mtgbn/graph.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace mtgbn {

namespace {

void check_node(int node, int p, const char* what) {
  if (node < 0 || node >= p) {
    throw DimensionMismatch(std::string(what) + ": node index out of range");
  }
}

}  // namespace

Dag::Dag(std::vector<std::string> names)
    : names_(std::move(names)), parents_(names_.size()) {
  if (names_.empty()) throw DimensionMismatch("Dag: need at least one node");
}

Dag::Dag(std::vector<std::string> names, const std::vector<std::pair<int, int>>& edges)
    : Dag(std::move(names)) {
  const int p = num_nodes();
  for (auto [src, dst] : edges) {
    check_node(src, p, "Dag");
    check_node(dst, p, "Dag");
    if (src == dst) throw DomainError("Dag: self loop rejected");
    if (has_edge(src, dst)) throw DomainError("Dag: duplicate edge rejected");
    parents_[dst].push_back(src);
  }
  for (auto& ps : parents_) std::sort(ps.begin(), ps.end());
  validate();
}

void Dag::validate() const {
  // Kahn peel; leftover nodes mean a directed cycle.
  if (topological_order().size() != names_.size()) {
    throw DomainError("Dag: edge set contains a directed cycle");
  }
}

bool Dag::has_edge(int src, int dst) const {
  const auto& ps = parents_[dst];
  return std::binary_search(ps.begin(), ps.end(), src);
}

int Dag::num_edges() const {
  int total = 0;
  for (const auto& ps : parents_) total += static_cast<int>(ps.size());
  return total;
}

std::vector<std::pair<int, int>> Dag::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(num_edges());
  for (int child = 0; child < num_nodes(); ++child) {
    for (int parent : parents_[child]) out.emplace_back(parent, child);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Dag Dag::with_edge(int src, int dst) const {
  auto es = edges();
  es.emplace_back(src, dst);
  return Dag(names_, es);
}

Dag Dag::without_edge(int src, int dst) const {
  if (!has_edge(src, dst)) throw DomainError("Dag: cannot remove absent edge");
  auto es = edges();
  es.erase(std::remove(es.begin(), es.end(), std::make_pair(src, dst)), es.end());
  return Dag(names_, es);
}

Dag Dag::with_reversed_edge(int src, int dst) const {
  if (!has_edge(src, dst)) throw DomainError("Dag: cannot reverse absent edge");
  auto es = edges();
  es.erase(std::remove(es.begin(), es.end(), std::make_pair(src, dst)), es.end());
  es.emplace_back(dst, src);
  return Dag(names_, es);
}

bool Dag::can_add_edge(int src, int dst) const {
  if (src == dst || has_edge(src, dst)) return false;
  // Legal iff there is no directed path dst -> ... -> src.
  const int p = num_nodes();
  std::vector<std::vector<int>> children(p);
  for (int child = 0; child < p; ++child) {
    for (int parent : parents_[child]) children[parent].push_back(child);
  }
  std::vector<char> seen(p, 0);
  std::vector<int> stack{dst};
  seen[dst] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (v == src) return false;
    for (int c : children[v]) {
      if (!seen[c]) {
        seen[c] = 1;
        stack.push_back(c);
      }
    }
  }
  return true;
}

std::vector<int> Dag::topological_order() const {
  const int p = num_nodes();
  std::vector<int> indegree(p, 0);
  std::vector<std::vector<int>> children(p);
  for (int child = 0; child < p; ++child) {
    indegree[child] = static_cast<int>(parents_[child].size());
    for (int parent : parents_[child]) children[parent].push_back(child);
  }
  // Ready set kept sorted so the order is deterministic.
  std::set<int> ready;
  for (int v = 0; v < p; ++v) {
    if (indegree[v] == 0) ready.insert(v);
  }
  std::vector<int> order;
  order.reserve(p);
  while (!ready.empty()) {
    int v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (int c : children[v]) {
      if (--indegree[c] == 0) ready.insert(c);
    }
  }
  return order;  // shorter than p iff cyclic
}

UGraph::UGraph(std::vector<std::string> names)
    : names_(std::move(names)),
      adj_(names_.size(), std::vector<unsigned char>(names_.size(), 0)) {
  if (names_.empty()) throw DimensionMismatch("UGraph: need at least one node");
}

UGraph::UGraph(std::vector<std::string> names, const std::vector<std::pair<int, int>>& edges)
    : UGraph(std::move(names)) {
  for (auto [a, b] : edges) {
    check_node(a, num_nodes(), "UGraph");
    check_node(b, num_nodes(), "UGraph");
    if (has_edge(a, b)) {
      throw DomainError("UGraph: duplicate edge " + names_[a] + " -- " + names_[b]);
    }
    add_edge(a, b);
  }
}

void UGraph::add_edge(int a, int b) {
  check_node(a, num_nodes(), "UGraph");
  check_node(b, num_nodes(), "UGraph");
  if (a == b) throw DomainError("UGraph: self loop rejected");
  adj_[a][b] = adj_[b][a] = 1;
}

std::vector<int> UGraph::neighbors(int node) const {
  std::vector<int> out;
  for (int v = 0; v < num_nodes(); ++v) {
    if (adj_[node][v]) out.push_back(v);
  }
  return out;
}

int UGraph::degree(int node) const {
  int d = 0;
  for (int v = 0; v < num_nodes(); ++v) d += adj_[node][v];
  return d;
}

int UGraph::num_edges() const {
  int total = 0;
  for (int a = 0; a < num_nodes(); ++a) {
    for (int b = a + 1; b < num_nodes(); ++b) total += adj_[a][b];
  }
  return total;
}

std::vector<std::pair<int, int>> UGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < num_nodes(); ++a) {
    for (int b = a + 1; b < num_nodes(); ++b) {
      if (adj_[a][b]) out.emplace_back(a, b);
    }
  }
  return out;
}

UGraph skeleton(const Dag& dag) {
  UGraph g(dag.names());
  for (auto [src, dst] : dag.edges()) g.add_edge(src, dst);
  return g;
}

UGraph moralize(const Dag& dag) {
  UGraph g(dag.names());
  for (auto [src, dst] : dag.edges()) g.add_edge(src, dst);
  for (int child = 0; child < dag.num_nodes(); ++child) {
    const auto& ps = dag.parents(child);
    for (size_t i = 0; i < ps.size(); ++i) {
      for (size_t j = i + 1; j < ps.size(); ++j) g.add_edge(ps[i], ps[j]);
    }
  }
  return g;
}

namespace {

// Fill edges created by eliminating `v` from the working graph: all pairs of
// currently-live neighbors of v that are not yet adjacent.
std::vector<std::pair<int, int>> fill_edges_for(
    const std::vector<std::vector<unsigned char>>& adj, const std::vector<char>& live, int v) {
  const int p = static_cast<int>(adj.size());
  std::vector<int> nbrs;
  for (int u = 0; u < p; ++u) {
    if (live[u] && u != v && adj[v][u]) nbrs.push_back(u);
  }
  std::vector<std::pair<int, int>> fill;
  for (size_t i = 0; i < nbrs.size(); ++i) {
    for (size_t j = i + 1; j < nbrs.size(); ++j) {
      if (!adj[nbrs[i]][nbrs[j]]) fill.emplace_back(nbrs[i], nbrs[j]);
    }
  }
  return fill;  // pairs already (min,max)-ordered and lexicographically sorted
}

}  // namespace

UGraph triangulate(const UGraph& g) {
  const int p = g.num_nodes();
  std::vector<std::vector<unsigned char>> adj(p, std::vector<unsigned char>(p, 0));
  for (auto [a, b] : g.edges()) adj[a][b] = adj[b][a] = 1;
  std::vector<char> live(p, 1);
  UGraph out = g;
  for (int step = 0; step < p; ++step) {
    int best = -1;
    std::vector<std::pair<int, int>> best_fill;
    for (int v = 0; v < p; ++v) {
      if (!live[v]) continue;
      auto fill = fill_edges_for(adj, live, v);
      if (best < 0 || fill.size() < best_fill.size() ||
          (fill.size() == best_fill.size() && fill < best_fill)) {
        best = v;
        best_fill = std::move(fill);
      }
    }
    for (auto [a, b] : best_fill) {
      adj[a][b] = adj[b][a] = 1;
      out.add_edge(a, b);
    }
    live[best] = 0;
  }
  return out;
}

namespace {

// Maximum-cardinality search visit order; ties broken by lowest index.
std::vector<int> mcs_order(const UGraph& g) {
  const int p = g.num_nodes();
  std::vector<int> weight(p, 0);
  std::vector<char> visited(p, 0);
  std::vector<int> order;
  order.reserve(p);
  for (int step = 0; step < p; ++step) {
    int best = -1;
    for (int v = 0; v < p; ++v) {
      if (!visited[v] && (best < 0 || weight[v] > weight[best])) best = v;
    }
    visited[best] = 1;
    order.push_back(best);
    for (int u = 0; u < p; ++u) {
      if (!visited[u] && g.has_edge(best, u)) ++weight[u];
    }
  }
  return order;
}

}  // namespace

bool is_chordal(const UGraph& g) {
  const int p = g.num_nodes();
  auto order = mcs_order(g);
  std::vector<int> rank(p);
  for (int i = 0; i < p; ++i) rank[order[i]] = i;
  // MCS order reversed is a perfect elimination order iff g is chordal: each
  // vertex's earlier-visited neighbors must form a clique.
  for (int i = 0; i < p; ++i) {
    int v = order[i];
    std::vector<int> earlier;
    for (int u : g.neighbors(v)) {
      if (rank[u] < i) earlier.push_back(u);
    }
    for (size_t a = 0; a < earlier.size(); ++a) {
      for (size_t b = a + 1; b < earlier.size(); ++b) {
        if (!g.has_edge(earlier[a], earlier[b])) return false;
      }
    }
  }
  return true;
}

CliqueSequence clique_sequence(const UGraph& g) {
  if (!is_chordal(g)) throw NotDecomposable("clique_sequence: graph is not chordal");
  const int p = g.num_nodes();
  auto order = mcs_order(g);
  std::vector<int> rank(p);
  for (int i = 0; i < p; ++i) rank[order[i]] = i;

  // Candidate clique at visit i: the vertex plus its earlier-visited neighbors.
  std::vector<std::vector<int>> candidates(p);
  for (int i = 0; i < p; ++i) {
    int v = order[i];
    std::vector<int>& c = candidates[i];
    c.push_back(v);
    for (int u : g.neighbors(v)) {
      if (rank[u] < i) c.push_back(u);
    }
    std::sort(c.begin(), c.end());
  }
  // Keep candidates not strictly contained in another candidate; visit order of the
  // completing vertex gives a running-intersection order of the maximal cliques.
  CliqueSequence cs;
  for (int i = 0; i < p; ++i) {
    const auto& a = candidates[i];
    bool maximal = true;
    for (int j = 0; j < p && maximal; ++j) {
      if (j == i || candidates[j].size() <= a.size()) continue;
      const auto& b = candidates[j];
      maximal = !std::includes(b.begin(), b.end(), a.begin(), a.end());
    }
    if (maximal) cs.cliques.push_back(a);
  }
  std::vector<int> history;
  for (size_t j = 0; j < cs.cliques.size(); ++j) {
    const auto& c = cs.cliques[j];
    if (j > 0) {
      std::vector<int> sep;
      std::set_intersection(history.begin(), history.end(), c.begin(), c.end(),
                            std::back_inserter(sep));
      cs.separators.push_back(std::move(sep));
    }
    std::vector<int> merged;
    std::set_union(history.begin(), history.end(), c.begin(), c.end(),
                   std::back_inserter(merged));
    history = std::move(merged);
    cs.histories.push_back(history);
  }
  // Running-intersection property: each separator lies inside some earlier clique.
  // Guaranteed for chordal graphs with the order above; cheap to verify outright.
  for (size_t j = 0; j < cs.separators.size(); ++j) {
    const auto& sep = cs.separators[j];
    bool covered = false;
    for (size_t k = 0; k <= j && !covered; ++k) {
      covered = std::includes(cs.cliques[k].begin(), cs.cliques[k].end(),
                              sep.begin(), sep.end());
    }
    if (!covered) {
      throw NotDecomposable("clique_sequence: running-intersection property violated");
    }
  }
  return cs;
}

CliqueSequence decomposable_cover(const Dag& dag) {
  return clique_sequence(triangulate(moralize(dag)));
}

}  // namespace mtgbn
