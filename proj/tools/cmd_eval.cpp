#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <memory>

#include "cli_common.hpp"
#include "mtgbn/evalkit.hpp"
#include "mtgbn/io.hpp"

namespace cli {

namespace {

namespace fs = std::filesystem;

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::string opt_field(const std::optional<double>& v) {
  return v ? mtgbn::format_double(*v) : std::string();
}

// Per-task rows plus an "avg" row; absent ratios average over the tasks where
// they are defined and stay blank when defined nowhere.
std::string metrics_csv(const std::vector<mtgbn::ConfusionCounts>& counts) {
  std::string out = "task,tp,fp,fn,tn,error,precision,recall,fscore,edge_distance\n";
  double err_sum = 0.0, dist_sum = 0.0;
  double tp_sum = 0.0, fp_sum = 0.0, fn_sum = 0.0, tn_sum = 0.0;
  double prec_sum = 0.0, rec_sum = 0.0, f_sum = 0.0;
  int prec_n = 0, rec_n = 0, f_n = 0;
  const int m = static_cast<int>(counts.size());
  for (int i = 0; i < m; ++i) {
    const mtgbn::MetricRow row = mtgbn::metrics(counts[i]);
    out += std::to_string(i + 1) + ',' + std::to_string(counts[i].tp) + ',' +
           std::to_string(counts[i].fp) + ',' + std::to_string(counts[i].fn) + ',' +
           std::to_string(counts[i].tn) + ',' + mtgbn::format_double(row.error) + ',' +
           opt_field(row.precision) + ',' + opt_field(row.recall) + ',' +
           opt_field(row.fscore) + ',' + std::to_string(row.edge_distance) + '\n';
    err_sum += row.error;
    dist_sum += static_cast<double>(row.edge_distance);
    tp_sum += static_cast<double>(counts[i].tp);
    fp_sum += static_cast<double>(counts[i].fp);
    fn_sum += static_cast<double>(counts[i].fn);
    tn_sum += static_cast<double>(counts[i].tn);
    if (row.precision) { prec_sum += *row.precision; ++prec_n; }
    if (row.recall) { rec_sum += *row.recall; ++rec_n; }
    if (row.fscore) { f_sum += *row.fscore; ++f_n; }
  }
  const double dm = static_cast<double>(m);
  out += "avg," + mtgbn::format_double(tp_sum / dm) + ',' + mtgbn::format_double(fp_sum / dm) +
         ',' + mtgbn::format_double(fn_sum / dm) + ',' + mtgbn::format_double(tn_sum / dm) +
         ',' + mtgbn::format_double(err_sum / dm) + ',' +
         (prec_n ? mtgbn::format_double(prec_sum / prec_n) : std::string()) + ',' +
         (rec_n ? mtgbn::format_double(rec_sum / rec_n) : std::string()) + ',' +
         (f_n ? mtgbn::format_double(f_sum / f_n) : std::string()) + ',' +
         mtgbn::format_double(dist_sum / dm) + '\n';
  return out;
}

std::string degree_csv(const mtgbn::DegreeTable& table) {
  std::string out = "node,in,out,total\n";
  for (const auto& row : table.rows) {
    out += row.name + ',' + std::to_string(row.in) + ',' + std::to_string(row.out) + ',' +
           std::to_string(row.total) + '\n';
  }
  out += "TOTAL,,," + std::to_string(table.grand_total) + '\n';
  return out;
}

// Aligned-column rendering of the same table for terminal reading.
std::string degree_text(const mtgbn::DegreeTable& table) {
  size_t name_w = 5;
  for (const auto& row : table.rows) name_w = std::max(name_w, row.name.size());
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-*s %8s %8s %8s\n", static_cast<int>(name_w), "node",
                "total", "in", "out");
  std::string out = buf;
  for (const auto& row : table.rows) {
    std::snprintf(buf, sizeof(buf), "%-*s %8ld %8ld %8ld\n", static_cast<int>(name_w),
                  row.name.c_str(), row.total, row.in, row.out);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "%-*s %8ld\n", static_cast<int>(name_w), "TOTAL",
                table.grand_total);
  out += buf;
  return out;
}

std::string counts_csv(const Eigen::MatrixXi& counts, const std::vector<std::string>& names) {
  std::string out = "src";
  for (const auto& name : names) out += ',' + name;
  out += '\n';
  for (Eigen::Index i = 0; i < counts.rows(); ++i) {
    out += names[i];
    for (Eigen::Index j = 0; j < counts.cols(); ++j) {
      out += ',' + std::to_string(counts(i, j));
    }
    out += '\n';
  }
  return out;
}

struct EvalOpts {
  std::vector<std::string> learned_patterns;
  std::vector<std::string> truth_patterns;
  std::string mode = "both";
  std::string adjacency_from = "skeleton";
  bool degree = false;
  bool connections = false;
  std::string config_path;
  std::string out_dir;
};

}  // namespace

void register_eval(CLI::App& app) {
  auto* sub = app.add_subcommand("eval", "Score learned structures against ground truth");
  auto o = std::make_shared<EvalOpts>();

  sub->add_option("--learned", o->learned_patterns, "Learned graph files (globs allowed)");
  sub->add_option("--truth", o->truth_patterns, "Ground-truth graph files, aligned by order");
  sub->add_option("--mode", o->mode, "adjacency, arrowhead, or both")
      ->check(CLI::IsMember({"adjacency", "arrowhead", "both"}));
  sub->add_option("--adjacency-from", o->adjacency_from,
                  "Undirected view of a directed graph: skeleton or moral")
      ->check(CLI::IsMember({"skeleton", "moral"}));
  sub->add_flag("--degree-table", o->degree, "Also write per-node degree sums of the learned set");
  sub->add_flag("--connection-counts", o->connections,
                "Also write the per-edge task-count matrix of the learned set");
  sub->add_option("--config", o->config_path, "JSON config or manifest to start from");
  sub->add_option("--out", o->out_dir, "Output directory")->required();

  sub->callback([sub, o]() {
    json defaults;
    defaults["learned"] = json::array();
    defaults["truth"] = json::array();
    defaults["mode"] = "both";
    defaults["adjacency_from"] = "skeleton";
    defaults["degree_table"] = false;
    defaults["connection_counts"] = false;

    ConfigLayers layers(sub, defaults, o->config_path);
    layers.overlay("--learned", "learned", o->learned_patterns);
    layers.overlay("--truth", "truth", o->truth_patterns);
    layers.overlay("--mode", "mode", o->mode);
    layers.overlay("--adjacency-from", "adjacency_from", o->adjacency_from);
    layers.overlay("--degree-table", "degree_table", o->degree);
    layers.overlay("--connection-counts", "connection_counts", o->connections);

    const json& cfg = layers.get();
    const std::string mode = cfg.at("mode").get<std::string>();
    const std::string adjacency_from = cfg.at("adjacency_from").get<std::string>();

    const auto learned_pats = cfg.at("learned").get<std::vector<std::string>>();
    if (learned_pats.empty()) throw mtgbn::ConfigError("eval: no --learned files given");
    const std::vector<std::string> learned_files = expand_patterns(learned_pats);

    std::vector<std::string> truth_files;
    const auto truth_pats = cfg.at("truth").get<std::vector<std::string>>();
    const bool need_truth = mode == "adjacency" || mode == "arrowhead" || mode == "both";
    if (!truth_pats.empty()) {
      truth_files = expand_patterns(truth_pats);
      if (truth_files.size() != learned_files.size()) {
        throw mtgbn::ConfigError(
            "eval: learned/truth counts differ (" + std::to_string(learned_files.size()) +
            " vs " + std::to_string(truth_files.size()) + ")");
      }
    } else if (need_truth && !(cfg.at("degree_table").get<bool>() ||
                               cfg.at("connection_counts").get<bool>())) {
      throw mtgbn::ConfigError("eval: no --truth files given");
    }

    std::vector<LoadedGraph> learned, truth;
    for (const auto& path : learned_files) learned.push_back(load_graph(path));
    for (const auto& path : truth_files) truth.push_back(load_graph(path));

    ensure_dir(o->out_dir);
    std::vector<std::string> outputs;

    if (!truth.empty() && (mode == "adjacency" || mode == "both")) {
      std::vector<mtgbn::ConfusionCounts> counts;
      for (size_t i = 0; i < learned.size(); ++i) {
        counts.push_back(mtgbn::adjacency_confusion(learned[i].adjacency(adjacency_from),
                                                    truth[i].adjacency(adjacency_from)));
      }
      mtgbn::atomic_write_text(join(o->out_dir, "metrics_adjacency.csv"), metrics_csv(counts));
      outputs.push_back("metrics_adjacency.csv");
    }
    if (!truth.empty() && (mode == "arrowhead" || mode == "both")) {
      std::vector<mtgbn::ConfusionCounts> counts;
      for (size_t i = 0; i < learned.size(); ++i) {
        counts.push_back(
            mtgbn::arrowhead_confusion(learned[i].as_dag(), truth[i].as_dag()));
      }
      mtgbn::atomic_write_text(join(o->out_dir, "metrics_arrowhead.csv"), metrics_csv(counts));
      outputs.push_back("metrics_arrowhead.csv");
    }
    if (cfg.at("degree_table").get<bool>() || cfg.at("connection_counts").get<bool>()) {
      std::vector<mtgbn::Dag> dags;
      for (const auto& g : learned) dags.push_back(g.as_dag());
      if (cfg.at("degree_table").get<bool>()) {
        const mtgbn::DegreeTable table = mtgbn::degree_table(dags);
        mtgbn::atomic_write_text(join(o->out_dir, "degree.csv"), degree_csv(table));
        outputs.push_back("degree.csv");
        std::fputs(degree_text(table).c_str(), stdout);
      }
      if (cfg.at("connection_counts").get<bool>()) {
        mtgbn::atomic_write_text(join(o->out_dir, "connection_counts.csv"),
                                 counts_csv(mtgbn::connection_counts(dags),
                                            dags.front().names()));
        outputs.push_back("connection_counts.csv");
      }
    }

    json cfg_echo = cfg;
    json resolved = json::array();
    for (const auto& path : learned_files) {
      resolved.push_back(fs::weakly_canonical(path).string());
    }
    cfg_echo["learned"] = resolved;
    json resolved_truth = json::array();
    for (const auto& path : truth_files) {
      resolved_truth.push_back(fs::weakly_canonical(path).string());
    }
    cfg_echo["truth"] = resolved_truth;

    std::vector<std::string> inputs = learned_files;
    inputs.insert(inputs.end(), truth_files.begin(), truth_files.end());
    if (!o->config_path.empty()) inputs.push_back(o->config_path);
    write_manifest(o->out_dir, "eval", cfg_echo, inputs, outputs);
  });
}

}  // namespace cli
