#include "mtgbn/evalkit.hpp"

#include <cmath>

#include "mtgbn/errors.hpp"

namespace mtgbn {

ConfusionCounts adjacency_confusion(const UGraph& learned, const UGraph& truth) {
  if (learned.num_nodes() != truth.num_nodes()) {
    throw DimensionMismatch("adjacency_confusion: node counts differ");
  }
  const int p = learned.num_nodes();
  ConfusionCounts c;
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      const bool in_learned = learned.has_edge(i, j);
      const bool in_truth = truth.has_edge(i, j);
      if (in_learned && in_truth) ++c.tp;
      else if (in_learned) ++c.fp;
      else if (in_truth) ++c.fn;
      else ++c.tn;
    }
  }
  return c;
}

ConfusionCounts arrowhead_confusion(const Dag& learned, const Dag& truth) {
  if (learned.num_nodes() != truth.num_nodes()) {
    throw DimensionMismatch("arrowhead_confusion: node counts differ");
  }
  const int p = learned.num_nodes();
  ConfusionCounts c;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (i == j) continue;
      const bool in_learned = learned.has_edge(i, j);
      const bool in_truth = truth.has_edge(i, j);
      if (in_learned && in_truth) ++c.tp;
      else if (in_learned) ++c.fp;
      else if (in_truth) ++c.fn;
      else ++c.tn;
    }
  }
  return c;
}

MetricRow metrics(const ConfusionCounts& c) {
  const long total = c.total();
  if (total <= 0) throw DomainError("metrics: empty confusion counts");
  MetricRow row;
  row.error = static_cast<double>(c.fp + c.fn) / static_cast<double>(total);
  row.edge_distance = c.fp + c.fn;
  if (c.tp + c.fp > 0) {
    row.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  }
  if (c.tp + c.fn > 0) {
    row.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  }
  if (row.precision && row.recall && *row.precision + *row.recall > 0.0) {
    row.fscore = 2.0 * *row.precision * *row.recall / (*row.precision + *row.recall);
  }
  return row;
}

DegreeTable degree_table(const std::vector<Dag>& dags) {
  DegreeTable table;
  if (dags.empty()) return table;
  const int p = dags.front().num_nodes();
  table.rows.resize(p);
  for (int i = 0; i < p; ++i) table.rows[i].name = dags.front().names()[i];
  for (const Dag& dag : dags) {
    if (dag.num_nodes() != p) throw DimensionMismatch("degree_table: node counts differ");
    for (auto [src, dst] : dag.edges()) {
      ++table.rows[src].out;
      ++table.rows[dst].in;
    }
  }
  for (auto& row : table.rows) {
    row.total = row.in + row.out;
    table.grand_total += row.total;
  }
  return table;
}

Eigen::MatrixXi connection_counts(const std::vector<Dag>& dags) {
  if (dags.empty()) return Eigen::MatrixXi();
  const int p = dags.front().num_nodes();
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(p, p);
  for (const Dag& dag : dags) {
    if (dag.num_nodes() != p) throw DimensionMismatch("connection_counts: node counts differ");
    for (auto [src, dst] : dag.edges()) ++counts(src, dst);
  }
  return counts;
}

double proportion_test(long k1, long n1, long k2, long n2) {
  if (n1 < 1 || n2 < 1) throw DomainError("proportion_test: group sizes must be positive");
  if (k1 < 0 || k1 > n1 || k2 < 0 || k2 > n2) {
    throw DomainError("proportion_test: counts must lie in [0, n]");
  }
  const double p1 = static_cast<double>(k1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(k2) / static_cast<double>(n2);
  const double pooled = static_cast<double>(k1 + k2) / static_cast<double>(n1 + n2);
  if (pooled <= 0.0 || pooled >= 1.0) {
    // Zero pooled variance: the test is degenerate, fall back to a convention.
    return p1 <= p2 ? 1.0 : 0.0;
  }
  const double se = std::sqrt(pooled * (1.0 - pooled) *
                              (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
  const double z = (p1 - p2) / se;
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace mtgbn
