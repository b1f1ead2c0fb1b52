#include <filesystem>
#include <memory>

#include "cli_common.hpp"
#include "mtgbn/io.hpp"
#include "mtgbn/rng.hpp"
#include "mtgbn/simgen.hpp"

namespace cli {

namespace {

namespace fs = std::filesystem;

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

struct SimulateOpts {
  std::string mode;
  std::string config_path;
  std::string out_dir;
  int m = 10;
  int p = 15;
  int n = 250;
  double density = 0.3;
  double nu0 = 0.0;
  int max_retries = 100;
  std::uint64_t seed = 0;
  std::string base;
  double level = 0.05;
};

void run_synth(const json& cfg, const std::string& out_dir, const std::string& config_path) {
  mtgbn::SynthSpec spec;
  spec.m = cfg.at("m").get<int>();
  spec.p = cfg.at("p").get<int>();
  spec.n = {cfg.at("n").get<int>()};
  spec.density = cfg.at("density").get<double>();
  spec.nu0 = cfg.at("nu0").get<double>();
  spec.max_retries = cfg.at("max_retries").get<int>();
  spec.seed = cfg.at("seed").get<std::uint64_t>();
  spec.validate();

  const mtgbn::SynthOutput out = mtgbn::generate_synthetic(spec);
  ensure_dir(out_dir);
  std::vector<std::string> names;
  for (int i = 1; i <= spec.p; ++i) names.push_back("X" + std::to_string(i));

  std::vector<std::string> outputs;
  for (int l = 0; l < spec.m; ++l) {
    const std::string data_name = indexed_name("data", l + 1, spec.m, ".csv");
    mtgbn::write_csv_matrix(join(out_dir, data_name), out.tasks[l].data, names);
    outputs.push_back(data_name);

    const std::string graph_name = indexed_name("graph", l + 1, spec.m, ".txt");
    mtgbn::write_ugraph(join(out_dir, graph_name), out.graphs[l]);
    outputs.push_back(graph_name);

    const std::string prec_name = indexed_name("precision", l + 1, spec.m, ".csv");
    mtgbn::write_csv_matrix(join(out_dir, prec_name), out.precisions[l], names);
    outputs.push_back(prec_name);
  }
  mtgbn::write_csv_matrix(join(out_dir, "sigma_h.csv"), out.sigma_h_true.mat(), names);
  outputs.push_back("sigma_h.csv");

  json extra;
  extra["retries"] = out.retries;
  extra["seeds"] = {{"root", spec.seed},
                    {"derivation", "stream 0 shared covariance, stream l+1 task l"}};
  std::vector<std::string> inputs;
  if (!config_path.empty()) inputs.push_back(config_path);
  write_manifest(out_dir, "simulate", cfg, inputs, outputs, extra);
}

void run_perturb(const json& cfg, const std::string& out_dir, const std::string& config_path) {
  const std::string base_path = cfg.at("base").get<std::string>();
  if (base_path.empty()) throw mtgbn::ConfigError("simulate: perturb mode requires --base");
  const mtgbn::Dag base = mtgbn::read_dag(base_path);

  mtgbn::PerturbSpec spec;
  spec.level = cfg.at("level").get<double>();
  spec.m = cfg.at("m").get<int>();
  spec.seed = cfg.at("seed").get<std::uint64_t>();
  spec.validate();
  const int n = cfg.at("n").get<int>();

  const std::vector<mtgbn::Dag> dags = mtgbn::perturb_benchmark(base, spec);
  ensure_dir(out_dir);
  std::vector<std::string> outputs;
  for (int g = 0; g < spec.m; ++g) {
    const std::string graph_name = indexed_name("graph", g + 1, spec.m, ".txt");
    mtgbn::write_dag(join(out_dir, graph_name), dags[g]);
    outputs.push_back(graph_name);
  }
  if (n > 0) {
    const mtgbn::Rng root(spec.seed);
    for (int g = 0; g < spec.m; ++g) {
      mtgbn::Rng rng = root.derive(0x7A000000ull + g);
      const std::string data_name = indexed_name("data", g + 1, spec.m, ".csv");
      mtgbn::write_csv_matrix(join(out_dir, data_name),
                              mtgbn::sample_sem_data(dags[g], n, rng), base.names());
      outputs.push_back(data_name);
    }
  }

  json extra;
  extra["seeds"] = {{"root", spec.seed},
                    {"derivation", "stream g+1 structure g; stream 0x7A000000+g its data"}};
  json cfg_echo = cfg;
  cfg_echo["base"] = fs::weakly_canonical(base_path).string();
  std::vector<std::string> inputs{base_path};
  if (!config_path.empty()) inputs.push_back(config_path);
  write_manifest(out_dir, "simulate", cfg_echo, inputs, outputs, extra);
}

}  // namespace

void register_simulate(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "simulate", "Generate synthetic multitask data or perturbed benchmark structures");
  auto o = std::make_shared<SimulateOpts>();

  sub->add_option("--mode", o->mode, "synth or perturb")
      ->check(CLI::IsMember({"synth", "perturb"}));
  sub->add_option("--config", o->config_path, "JSON config or manifest to start from");
  sub->add_option("--out", o->out_dir, "Output directory")->required();
  sub->add_option("--m", o->m, "Number of tasks");
  sub->add_option("--p", o->p, "Number of variables");
  sub->add_option("--n", o->n, "Rows per task (perturb mode: 0 skips data generation)");
  sub->add_option("--density", o->density, "Target edge density in (0,1)");
  sub->add_option("--nu0", o->nu0, "Degrees of freedom (0 selects p+2)");
  sub->add_option("--max-retries", o->max_retries, "Redraw cap per task");
  sub->add_option("--seed", o->seed, "Root random seed");
  sub->add_option("--base", o->base, "Base structure file (perturb mode)");
  sub->add_option("--level", o->level, "Fraction of node pairs to modify (perturb mode)");

  sub->callback([sub, o]() {
    json defaults;
    defaults["mode"] = "synth";
    defaults["m"] = SimulateOpts().m;
    defaults["p"] = SimulateOpts().p;
    defaults["n"] = SimulateOpts().n;
    defaults["density"] = SimulateOpts().density;
    defaults["nu0"] = SimulateOpts().nu0;
    defaults["max_retries"] = SimulateOpts().max_retries;
    defaults["seed"] = SimulateOpts().seed;
    defaults["base"] = SimulateOpts().base;
    defaults["level"] = SimulateOpts().level;

    ConfigLayers layers(sub, defaults, o->config_path);
    layers.overlay("--mode", "mode", o->mode);
    layers.overlay("--m", "m", o->m);
    layers.overlay("--p", "p", o->p);
    layers.overlay("--n", "n", o->n);
    layers.overlay("--density", "density", o->density);
    layers.overlay("--nu0", "nu0", o->nu0);
    layers.overlay("--max-retries", "max_retries", o->max_retries);
    layers.overlay("--seed", "seed", o->seed);
    layers.overlay("--base", "base", o->base);
    layers.overlay("--level", "level", o->level);

    const json& cfg = layers.get();
    const std::string mode = cfg.at("mode").get<std::string>();
    if (mode == "synth") {
      run_synth(cfg, o->out_dir, o->config_path);
    } else if (mode == "perturb") {
      run_perturb(cfg, o->out_dir, o->config_path);
    } else {
      throw mtgbn::ConfigError("simulate: mode must be synth or perturb");
    }
  });
}

}  // namespace cli
