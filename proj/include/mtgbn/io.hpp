#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mtgbn/graph.hpp"

namespace mtgbn {

// Numeric CSV, comma-separated. Reading auto-detects a header row (a first line
// whose fields are not all numeric); writing emits values with 17 significant
// digits so a read-back is bit-exact. All rows must have equal width.
struct CsvMatrix {
  std::vector<std::string> header;  // empty when the file had none
  Eigen::MatrixXd values;
};

CsvMatrix read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& values,
                      const std::vector<std::string>& header = {});

// Plain-text graph format, one item per line:
//   # comment (ignored)
//   <name>              declares a node; declaration order fixes indices
//   <src> -> <dst>      directed edge (Dag files)
//   <a> -- <b>          undirected edge (UGraph files)
// Writers emit every node declaration first, then edges sorted by index, so a
// write/read round trip reproduces the graph exactly. Names appearing only in
// edge lines are appended in first-use order. Mixing edge kinds in one file is
// an IoError, as are unknown lines and edges violating graph invariants.
Dag read_dag(const std::string& path);
void write_dag(const std::string& path, const Dag& dag);
UGraph read_ugraph(const std::string& path);
void write_ugraph(const std::string& path, const UGraph& g);

// Graphviz form of the same graphs, for rendering only (not read back).
std::string to_dot(const Dag& dag);
std::string to_dot(const UGraph& g);

// Full-content read; IoError on failure.
std::string read_text_file(const std::string& path);

// Writes via a temporary in the same directory plus rename, so readers never
// observe a partial file.
void atomic_write_text(const std::string& path, const std::string& content);

// Shell-style glob expansion (sorted). A pattern without metacharacters must
// name an existing file; otherwise IoError.
std::vector<std::string> expand_glob(const std::string& pattern);

// Formats a double with round-trip precision (%.17g).
std::string format_double(double value);

}  // namespace mtgbn
