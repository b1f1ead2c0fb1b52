#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mtgbn/graph.hpp"

namespace mtgbn {

// Confusion counts over graph positions: unordered node pairs for adjacency
// comparison, ordered pairs for arrowhead comparison. tp+fp+fn+tn always equals
// the number of evaluated positions.
struct ConfusionCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;

  long total() const { return tp + fp + fn + tn; }
};

// Derived metrics. precision is absent when tp+fp = 0 (nothing predicted),
// recall when tp+fn = 0 (nothing to find); fscore requires both plus a nonzero
// sum. edge_distance = fp + fn, the symmetric-difference size — for directed
// comparison a reversed edge therefore costs 2.
struct MetricRow {
  double error = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> fscore;
  long edge_distance = 0;
};

// Counts over all p(p-1)/2 unordered pairs. Throws DimensionMismatch when the
// graphs differ in node count.
ConfusionCounts adjacency_confusion(const UGraph& learned, const UGraph& truth);

// Counts over all p(p-1) ordered pairs (orientation matters: a reversed edge is
// one false positive plus one false negative).
ConfusionCounts arrowhead_confusion(const Dag& learned, const Dag& truth);

// error = (fp+fn)/total, precision = tp/(tp+fp), recall = tp/(tp+fn),
// fscore = 2pr/(p+r). Throws DomainError when total = 0.
MetricRow metrics(const ConfusionCounts& c);

// Per-node degree sums across a set of networks.
struct DegreeRow {
  std::string name;
  long in = 0;
  long out = 0;
  long total = 0;  // in + out
};

struct DegreeTable {
  std::vector<DegreeRow> rows;
  long grand_total = 0;  // sum of row totals = 2 x total edge count
};

// Sums in/out/total degree per node across `dags` (all must share p).
DegreeTable degree_table(const std::vector<Dag>& dags);

// counts(i, j) = number of input networks containing the edge i -> j.
Eigen::MatrixXi connection_counts(const std::vector<Dag>& dags);

// One-sided two-sample proportion test with pooled variance, no continuity
// correction; returns the upper-tail p-value of z (alternative: group-1
// proportion greater). Degenerate pooled proportion (0 or 1) yields 1 when
// k1/n1 <= k2/n2, else 0. Throws DomainError on invalid counts.
double proportion_test(long k1, long n1, long k2, long n2);

}  // namespace mtgbn
