#include "mtgbn/io.hpp"

#include <glob.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "mtgbn/errors.hpp"

namespace mtgbn {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

bool parse_double(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) return false;
  *out = v;
  return true;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

CsvMatrix read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  CsvMatrix out;
  std::string line;
  bool first = true;
  size_t width = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (size_t i = 0; i < fields.size(); ++i) {
      if (!parse_double(fields[i], &row[i])) {
        numeric = false;
        break;
      }
    }
    if (first) {
      first = false;
      width = fields.size();
      if (!numeric) {
        out.header = fields;
        continue;
      }
    } else if (fields.size() != width) {
      throw IoError(path + ": ragged row (expected " + std::to_string(width) + " fields, got " +
                    std::to_string(fields.size()) + ")");
    }
    if (!numeric) throw IoError(path + ": non-numeric value in data row");
    rows.push_back(std::move(row));
  }
  if (rows.empty() && out.header.empty()) throw IoError(path + ": empty file");
  out.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < width; ++c) out.values(r, c) = rows[r][c];
  }
  return out;
}

void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& values,
                      const std::vector<std::string>& header) {
  if (!header.empty() && static_cast<Eigen::Index>(header.size()) != values.cols()) {
    throw IoError(path + ": header width does not match matrix");
  }
  std::string content;
  if (!header.empty()) {
    for (size_t i = 0; i < header.size(); ++i) {
      if (i) content += ',';
      content += header[i];
    }
    content += '\n';
  }
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (c) content += ',';
      content += format_double(values(r, c));
    }
    content += '\n';
  }
  atomic_write_text(path, content);
}

namespace {

struct ParsedGraph {
  std::vector<std::string> names;
  std::vector<std::pair<int, int>> edges;
};

// Shared parser; `arrow` selects the edge token and hence the graph kind.
ParsedGraph parse_graph_file(const std::string& path, const std::string& arrow,
                             const std::string& other_arrow) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  ParsedGraph g;
  std::map<std::string, int> index;
  auto node_id = [&](const std::string& name) {
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(g.names.size());
    g.names.push_back(name);
    index.emplace(name, id);
    return id;
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto where = [&] { return path + ":" + std::to_string(lineno); };
    if (text.find(other_arrow) != std::string::npos) {
      throw IoError(where() + ": wrong edge kind ('" + other_arrow + "' in a '" + arrow +
                    "' graph file)");
    }
    const auto pos = text.find(arrow);
    if (pos == std::string::npos) {
      if (text.find(' ') != std::string::npos || text.find('\t') != std::string::npos) {
        throw IoError(where() + ": unrecognized line");
      }
      node_id(text);
      continue;
    }
    const std::string lhs = trim(text.substr(0, pos));
    const std::string rhs = trim(text.substr(pos + arrow.size()));
    if (lhs.empty() || rhs.empty()) throw IoError(where() + ": malformed edge");
    g.edges.emplace_back(node_id(lhs), node_id(rhs));
  }
  if (g.names.empty()) throw IoError(path + ": no nodes");
  return g;
}

}  // namespace

Dag read_dag(const std::string& path) {
  const ParsedGraph g = parse_graph_file(path, "->", "--");
  try {
    return Dag(g.names, g.edges);
  } catch (const Error& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_dag(const std::string& path, const Dag& dag) {
  std::string content;
  for (const auto& name : dag.names()) content += name + '\n';
  for (auto [src, dst] : dag.edges()) {
    content += dag.names()[src] + " -> " + dag.names()[dst] + '\n';
  }
  atomic_write_text(path, content);
}

UGraph read_ugraph(const std::string& path) {
  const ParsedGraph g = parse_graph_file(path, "--", "->");
  try {
    return UGraph(g.names, g.edges);
  } catch (const Error& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_ugraph(const std::string& path, const UGraph& g) {
  std::string content;
  for (const auto& name : g.names()) content += name + '\n';
  for (auto [a, b] : g.edges()) {
    content += g.names()[a] + " -- " + g.names()[b] + '\n';
  }
  atomic_write_text(path, content);
}

namespace {

std::string dot_quote(const std::string& name) {
  std::string out = "\"";
  for (char c : name) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string to_dot(const Dag& dag) {
  std::string out = "digraph G {\n";
  for (const auto& name : dag.names()) out += "  " + dot_quote(name) + ";\n";
  for (auto [src, dst] : dag.edges()) {
    out += "  " + dot_quote(dag.names()[src]) + " -> " + dot_quote(dag.names()[dst]) + ";\n";
  }
  out += "}\n";
  return out;
}

std::string to_dot(const UGraph& g) {
  std::string out = "graph G {\n";
  for (const auto& name : g.names()) out += "  " + dot_quote(name) + ";\n";
  for (auto [a, b] : g.edges()) {
    out += "  " + dot_quote(g.names()[a]) + " -- " + dot_quote(g.names()[b]) + ";\n";
  }
  out += "}\n";
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) throw IoError("read failed for " + path);
  return buf.str();
}

void atomic_write_text(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out.good()) {
      std::remove(tmp.c_str());
      throw IoError("write failed for " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    const std::string why = std::strerror(errno);
    std::remove(tmp.c_str());
    throw IoError("cannot rename " + tmp + " to " + path + ": " + why);
  }
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  ::glob_t results;
  const int rc = ::glob(pattern.c_str(), GLOB_ERR, nullptr, &results);
  if (rc == GLOB_NOMATCH) {
    ::globfree(&results);
    throw IoError("no files match " + pattern);
  }
  if (rc != 0) {
    ::globfree(&results);
    throw IoError("glob failed for " + pattern);
  }
  std::vector<std::string> paths(results.gl_pathv, results.gl_pathv + results.gl_pathc);
  ::globfree(&results);
  return paths;
}

}  // namespace mtgbn
