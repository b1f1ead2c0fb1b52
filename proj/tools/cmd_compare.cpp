#include <filesystem>
#include <memory>

#include "cli_common.hpp"
#include "mtgbn/evalkit.hpp"
#include "mtgbn/io.hpp"
#include "mtgbn/parallel.hpp"
#include "mtgbn/rng.hpp"
#include "mtgbn/simgen.hpp"

namespace cli {

namespace {

namespace fs = std::filesystem;

struct CompareOpts {
  std::vector<int> grid_n;
  std::vector<int> grid_m;
  std::vector<double> grid_density;
  std::vector<double> grid_level;
  int p = 15;
  int n = 250;
  int m = 10;
  double density = 0.3;
  double level = 0.05;
  int base_edges = 0;  // 0: round(1.5 p)
  int repeats = 10;
  std::vector<std::string> methods;
  std::uint64_t seed = 0;
  std::string adjacency_from = "skeleton";
  std::string config_path;
  std::string out_dir;
  LearnFlags flags;
};

struct Cell {
  int n = 0;
  int m = 0;
  double density = 0.0;  // synth sweeps
  double level = 0.0;    // perturbation sweeps
};

// One results.csv line per (cell, repeat, method, metric); metric values are
// averages over the cell's m tasks.
struct ResultRow {
  int cell = 0;
  int repeat = 0;
  std::string sweep;
  Cell params;
  int p = 0;
  std::string method;
  std::string metric;
  bool have_values = false;
  double error = 0.0;
  std::optional<double> precision, recall, fscore;
  double edge_distance = 0.0;
  std::string status = "ok";
};

struct AvgMetrics {
  double error = 0.0;
  std::optional<double> precision, recall, fscore;
  double edge_distance = 0.0;
};

AvgMetrics average_metrics(const std::vector<mtgbn::ConfusionCounts>& counts) {
  AvgMetrics avg;
  double prec = 0.0, rec = 0.0, f = 0.0;
  int prec_n = 0, rec_n = 0, f_n = 0;
  for (const auto& c : counts) {
    const mtgbn::MetricRow row = mtgbn::metrics(c);
    avg.error += row.error;
    avg.edge_distance += static_cast<double>(row.edge_distance);
    if (row.precision) { prec += *row.precision; ++prec_n; }
    if (row.recall) { rec += *row.recall; ++rec_n; }
    if (row.fscore) { f += *row.fscore; ++f_n; }
  }
  const double dm = static_cast<double>(counts.size());
  avg.error /= dm;
  avg.edge_distance /= dm;
  if (prec_n) avg.precision = prec / prec_n;
  if (rec_n) avg.recall = rec / rec_n;
  if (f_n) avg.fscore = f / f_n;
  return avg;
}

std::string status_for(const std::exception& e) {
  if (dynamic_cast<const mtgbn::ConfigError*>(&e)) return "config";
  if (dynamic_cast<const mtgbn::RetriesExhausted*>(&e)) return "generation";
  if (dynamic_cast<const mtgbn::ChainDiverged*>(&e)) return "sampler";
  if (dynamic_cast<const mtgbn::IoError*>(&e)) return "io";
  return "other";
}

std::string render_rows(const std::vector<ResultRow>& rows, bool perturb_sweep) {
  auto opt_field = [](const std::optional<double>& v) {
    return v ? mtgbn::format_double(*v) : std::string();
  };
  std::string out =
      "cell,repeat,sweep,n,m,p,density,level,method,metric,error,precision,recall,fscore,"
      "edge_distance,status\n";
  for (const auto& r : rows) {
    out += std::to_string(r.cell) + ',' + std::to_string(r.repeat) + ',' + r.sweep + ',' +
           std::to_string(r.params.n) + ',' + std::to_string(r.params.m) + ',' +
           std::to_string(r.p) + ',';
    out += perturb_sweep ? std::string() : mtgbn::format_double(r.params.density);
    out += ',';
    out += perturb_sweep ? mtgbn::format_double(r.params.level) : std::string();
    out += ',' + r.method + ',' + r.metric + ',';
    if (r.have_values) {
      out += mtgbn::format_double(r.error) + ',' + opt_field(r.precision) + ',' +
             opt_field(r.recall) + ',' + opt_field(r.fscore) + ',' +
             mtgbn::format_double(r.edge_distance);
    } else {
      out += ",,,,";
    }
    out += ',' + r.status + '\n';
  }
  return out;
}

}  // namespace

void register_compare(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "compare", "Sweep simulate -> learn -> eval over a parameter grid, all methods");
  auto o = std::make_shared<CompareOpts>();

  sub->add_option("--grid-n", o->grid_n, "Sample sizes to sweep")->delimiter(',');
  sub->add_option("--grid-m", o->grid_m, "Task counts to sweep")->delimiter(',');
  sub->add_option("--grid-density", o->grid_density, "Edge densities to sweep (synthetic sweep)")
      ->delimiter(',');
  sub->add_option("--grid-level", o->grid_level,
                  "Perturbation levels to sweep (switches to the benchmark generator)")
      ->delimiter(',');
  sub->add_option("--p", o->p, "Number of variables");
  sub->add_option("--n", o->n, "Rows per task when --grid-n is absent");
  sub->add_option("--m", o->m, "Tasks when --grid-m is absent");
  sub->add_option("--density", o->density, "Density when --grid-density is absent");
  sub->add_option("--level", o->level, "Perturbation level when --grid-level is absent");
  sub->add_option("--base-edges", o->base_edges,
                  "Edges of the random base structure (0: 1.5p, benchmark sweep)");
  sub->add_option("--repeats", o->repeats, "Repetitions per grid cell");
  sub->add_option("--methods", o->methods, "Subset of mtgbn,sig,avg (default: all)")
      ->delimiter(',');
  sub->add_option("--seed", o->seed, "Root random seed");
  sub->add_option("--adjacency-from", o->adjacency_from,
                  "Undirected view for adjacency scoring: skeleton or moral")
      ->check(CLI::IsMember({"skeleton", "moral"}));
  sub->add_option("--config", o->config_path, "JSON config or manifest to start from");
  sub->add_option("--out", o->out_dir, "Output directory")->required();
  add_learn_flags(sub, o->flags);

  sub->callback([sub, o]() {
    json defaults;
    defaults["grid_n"] = json::array();
    defaults["grid_m"] = json::array();
    defaults["grid_density"] = json::array();
    defaults["grid_level"] = json::array();
    defaults["p"] = CompareOpts().p;
    defaults["n"] = CompareOpts().n;
    defaults["m"] = CompareOpts().m;
    defaults["density"] = CompareOpts().density;
    defaults["level"] = CompareOpts().level;
    defaults["base_edges"] = CompareOpts().base_edges;
    defaults["repeats"] = CompareOpts().repeats;
    defaults["methods"] = std::vector<std::string>{"mtgbn", "sig", "avg"};
    defaults["seed"] = CompareOpts().seed;
    defaults["adjacency_from"] = "skeleton";
    learn_flag_defaults(defaults);

    ConfigLayers layers(sub, defaults, o->config_path);
    layers.overlay("--grid-n", "grid_n", o->grid_n);
    layers.overlay("--grid-m", "grid_m", o->grid_m);
    layers.overlay("--grid-density", "grid_density", o->grid_density);
    layers.overlay("--grid-level", "grid_level", o->grid_level);
    layers.overlay("--p", "p", o->p);
    layers.overlay("--n", "n", o->n);
    layers.overlay("--m", "m", o->m);
    layers.overlay("--density", "density", o->density);
    layers.overlay("--level", "level", o->level);
    layers.overlay("--base-edges", "base_edges", o->base_edges);
    layers.overlay("--repeats", "repeats", o->repeats);
    layers.overlay("--methods", "methods", o->methods);
    layers.overlay("--seed", "seed", o->seed);
    layers.overlay("--adjacency-from", "adjacency_from", o->adjacency_from);
    overlay_learn_flags(layers, o->flags);

    const json& cfg = layers.get();
    const int p = cfg.at("p").get<int>();
    const int repeats = cfg.at("repeats").get<int>();
    if (p < 1 || repeats < 1) throw mtgbn::ConfigError("compare: p and repeats must be positive");
    const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
    const std::string adjacency_from = cfg.at("adjacency_from").get<std::string>();
    const auto methods = cfg.at("methods").get<std::vector<std::string>>();
    if (methods.empty()) throw mtgbn::ConfigError("compare: no methods selected");
    for (const auto& method : methods) {
      if (method != "mtgbn" && method != "sig" && method != "avg") {
        throw mtgbn::ConfigError("compare: unknown method '" + method + "'");
      }
    }

    auto axis_int = [&](const char* grid_key, const char* scalar_key) {
      auto axis = cfg.at(grid_key).get<std::vector<int>>();
      if (axis.empty()) axis.push_back(cfg.at(scalar_key).get<int>());
      return axis;
    };
    const std::vector<int> ns = axis_int("grid_n", "n");
    const std::vector<int> ms = axis_int("grid_m", "m");
    const bool perturb_sweep = !cfg.at("grid_level").get<std::vector<double>>().empty();
    std::vector<double> third = perturb_sweep
                                    ? cfg.at("grid_level").get<std::vector<double>>()
                                    : cfg.at("grid_density").get<std::vector<double>>();
    if (third.empty()) {
      third.push_back(cfg.at(perturb_sweep ? "level" : "density").get<double>());
    }
    int base_edges = cfg.at("base_edges").get<int>();
    if (base_edges == 0) base_edges = (3 * p) / 2;

    std::vector<Cell> cells;
    for (int n : ns) {
      for (int m : ms) {
        for (double t : third) {
          Cell cell;
          cell.n = n;
          cell.m = m;
          (perturb_sweep ? cell.level : cell.density) = t;
          cells.push_back(cell);
        }
      }
    }

    mtgbn::RunConfig base_run = run_config_from(cfg);
    const int jobs = base_run.jobs;   // --jobs bounds the sweep pool here
    base_run.jobs = 1;                // cells must not nest worker pools
    const double corr_threshold = cfg.at("corr_skeleton").get<double>();
    const double nu0 = cfg.at("nu0").get<double>();

    const int total_items = static_cast<int>(cells.size()) * repeats;
    std::vector<std::vector<ResultRow>> slots(total_items);

    mtgbn::parallel_for(total_items, jobs, [&](int w) {
      const int cell_index = w / repeats;
      const int repeat = w % repeats;
      const Cell& cell = cells[cell_index];
      const std::uint64_t item_seed = mtgbn::mix64(seed ^ mtgbn::mix64(0xC0000000ull + w));

      auto emit = [&](const std::string& method, const std::string& metric) {
        ResultRow row;
        row.cell = cell_index;
        row.repeat = repeat;
        row.sweep = perturb_sweep ? "perturb" : "synth";
        row.params = cell;
        row.p = p;
        row.method = method;
        row.metric = metric;
        return row;
      };

      std::vector<mtgbn::TaskData> tasks;
      std::vector<mtgbn::UGraph> truth_adjacency;
      std::vector<mtgbn::Dag> truth_dags;
      std::vector<std::string> names;
      try {
        if (perturb_sweep) {
          mtgbn::Rng base_rng(mtgbn::mix64(item_seed ^ 3));
          const mtgbn::Dag base = mtgbn::random_dag(p, base_edges, base_rng);
          mtgbn::PerturbSpec spec;
          spec.level = cell.level;
          spec.m = cell.m;
          spec.seed = mtgbn::mix64(item_seed ^ 1);
          truth_dags = mtgbn::perturb_benchmark(base, spec);
          names = base.names();
          const mtgbn::Rng data_root(mtgbn::mix64(item_seed ^ 4));
          for (int l = 0; l < cell.m; ++l) {
            mtgbn::Rng rng = data_root.derive(l + 1);
            tasks.push_back(
                mtgbn::TaskData::from_data(mtgbn::sample_sem_data(truth_dags[l], cell.n, rng)));
            truth_adjacency.push_back(adjacency_from == "moral"
                                          ? mtgbn::moralize(truth_dags[l])
                                          : mtgbn::skeleton(truth_dags[l]));
          }
        } else {
          mtgbn::SynthSpec spec;
          spec.m = cell.m;
          spec.p = p;
          spec.n = {cell.n};
          spec.density = cell.density;
          spec.nu0 = nu0;
          spec.seed = mtgbn::mix64(item_seed ^ 1);
          mtgbn::SynthOutput synth = mtgbn::generate_synthetic(spec);
          tasks = std::move(synth.tasks);
          truth_adjacency = std::move(synth.graphs);
          names = truth_adjacency.front().names();
        }
      } catch (const std::exception& e) {
        for (const auto& method : methods) {
          ResultRow row = emit(method, "adjacency");
          row.status = status_for(e);
          slots[w].push_back(row);
        }
        return;
      }

      for (const auto& method : methods) {
        try {
          mtgbn::RunConfig run = base_run;
          run.seed = mtgbn::mix64(item_seed ^ 2);
          const std::vector<mtgbn::Dag> dags =
              run_method(method, tasks, names, run, corr_threshold, nullptr);

          std::vector<mtgbn::ConfusionCounts> adjacency;
          for (size_t l = 0; l < dags.size(); ++l) {
            const mtgbn::UGraph learned_u = adjacency_from == "moral"
                                                ? mtgbn::moralize(dags[l])
                                                : mtgbn::skeleton(dags[l]);
            adjacency.push_back(mtgbn::adjacency_confusion(learned_u, truth_adjacency[l]));
          }
          {
            ResultRow row = emit(method, "adjacency");
            const AvgMetrics avg = average_metrics(adjacency);
            row.have_values = true;
            row.error = avg.error;
            row.precision = avg.precision;
            row.recall = avg.recall;
            row.fscore = avg.fscore;
            row.edge_distance = avg.edge_distance;
            slots[w].push_back(row);
          }
          if (perturb_sweep) {
            std::vector<mtgbn::ConfusionCounts> arrowhead;
            for (size_t l = 0; l < dags.size(); ++l) {
              arrowhead.push_back(mtgbn::arrowhead_confusion(dags[l], truth_dags[l]));
            }
            ResultRow row = emit(method, "arrowhead");
            const AvgMetrics avg = average_metrics(arrowhead);
            row.have_values = true;
            row.error = avg.error;
            row.precision = avg.precision;
            row.recall = avg.recall;
            row.fscore = avg.fscore;
            row.edge_distance = avg.edge_distance;
            slots[w].push_back(row);
          }
        } catch (const std::exception& e) {
          ResultRow row = emit(method, "adjacency");
          row.status = status_for(e);
          slots[w].push_back(row);
        }
      }
    });

    std::vector<ResultRow> rows;
    for (auto& slot : slots) {
      for (auto& row : slot) rows.push_back(std::move(row));
    }

    ensure_dir(o->out_dir);
    mtgbn::atomic_write_text((fs::path(o->out_dir) / "results.csv").string(),
                             render_rows(rows, perturb_sweep));
    json extra;
    extra["cells"] = static_cast<int>(cells.size());
    extra["rows"] = static_cast<int>(rows.size());
    extra["seeds"] = {{"root", seed}, {"derivation", "per work item from the root seed"}};
    std::vector<std::string> inputs;
    if (!o->config_path.empty()) inputs.push_back(o->config_path);
    write_manifest(o->out_dir, "compare", cfg, inputs, {"results.csv"}, extra);
  });
}

}  // namespace cli
