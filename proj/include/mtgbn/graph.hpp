#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mtgbn/errors.hpp"

namespace mtgbn {

// Directed acyclic graph over named nodes; immutable after construction.
//
// Node index order is the order of `names`; edges are stored per child as sorted
// parent lists. Construction validates: no self loops, no duplicate edges, acyclic.
class Dag {
 public:
  explicit Dag(std::vector<std::string> names);
  Dag(std::vector<std::string> names, const std::vector<std::pair<int, int>>& edges);

  int num_nodes() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<int>& parents(int node) const { return parents_[node]; }
  const std::vector<std::vector<int>>& parent_sets() const { return parents_; }
  bool has_edge(int src, int dst) const;
  int num_edges() const;
  // All edges as (src, dst), sorted lexicographically.
  std::vector<std::pair<int, int>> edges() const;

  // Copy-with-change constructors used by search and perturbation code.
  Dag with_edge(int src, int dst) const;
  Dag without_edge(int src, int dst) const;
  Dag with_reversed_edge(int src, int dst) const;

  // True iff adding src->dst would keep the graph acyclic (edge must not exist yet).
  bool can_add_edge(int src, int dst) const;

  // Deterministic topological order (Kahn's algorithm, lowest index first among ready nodes).
  std::vector<int> topological_order() const;

  bool operator==(const Dag& other) const {
    return names_ == other.names_ && parents_ == other.parents_;
  }
  bool operator!=(const Dag& other) const { return !(*this == other); }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<int>> parents_;  // parents_[child] sorted ascending
  void validate() const;
};

// Simple undirected graph over named nodes, adjacency-matrix backed.
class UGraph {
 public:
  explicit UGraph(std::vector<std::string> names);
  UGraph(std::vector<std::string> names, const std::vector<std::pair<int, int>>& edges);

  int num_nodes() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  bool has_edge(int a, int b) const { return adj_[a][b] != 0; }
  void add_edge(int a, int b);
  // Neighbors of `node`, ascending.
  std::vector<int> neighbors(int node) const;
  int degree(int node) const;
  int num_edges() const;
  // All edges as (min, max) pairs, sorted lexicographically.
  std::vector<std::pair<int, int>> edges() const;

  bool operator==(const UGraph& other) const {
    return names_ == other.names_ && adj_ == other.adj_;
  }
  bool operator!=(const UGraph& other) const { return !(*this == other); }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<unsigned char>> adj_;
};

// Clique/separator/history sequence of a decomposable (chordal) graph.
//
// Cliques are the maximal cliques in an order satisfying the running-intersection
// property; separators[j] = histories[j-1] intersect cliques[j] (so there is one
// fewer separator than cliques; separators may be empty for disconnected graphs);
// histories[j] = union of cliques[0..j]. All index lists sorted ascending.
struct CliqueSequence {
  std::vector<std::vector<int>> cliques;
  std::vector<std::vector<int>> separators;
  std::vector<std::vector<int>> histories;
};

// Undirected version of a DAG: one edge per directed edge, orientation dropped.
UGraph skeleton(const Dag& dag);

// Moral graph: skeleton plus an edge between every pair of co-parents.
UGraph moralize(const Dag& dag);

// Chordal supergraph via min-fill elimination.
//
// Vertex choice: fewest fill edges; ties broken by lexicographically smallest
// fill-edge set, then lowest vertex index. Chordal inputs come back unchanged.
UGraph triangulate(const UGraph& g);

// True iff g is chordal (maximum-cardinality search yields a perfect elimination order).
bool is_chordal(const UGraph& g);

// Maximal cliques, separators and histories of a chordal graph in running-intersection
// order (maximum-cardinality search). Throws NotDecomposable if g is not chordal.
CliqueSequence clique_sequence(const UGraph& g);

// Clique sequence of the triangulated moral graph of a DAG — the decomposable
// cover used by all covariance-prior evaluations.
CliqueSequence decomposable_cover(const Dag& dag);

}  // namespace mtgbn
