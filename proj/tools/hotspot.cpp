// Command-line front end: one subcommand per pipeline stage plus `run`.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hotspot/pipeline.hpp"

namespace {

struct FlagHelp {
  std::string_view name;
  std::string_view help;
};

constexpr FlagHelp kFlags[] = {
    {"input", "incident CSV exported from the city portal"},
    {"synthetic", "generate input instead: csr, blobs or two-blob"},
    {"synthetic-n", "number of synthetic incidents"},
    {"col-year", "name of the year column"},
    {"col-type", "name of the primary-type column"},
    {"col-lat", "name of the latitude column"},
    {"col-lon", "name of the longitude column"},
    {"year-min", "first year kept"},
    {"year-max", "last year kept"},
    {"sample-size", "points clustered directly; the rest are assigned by envelope"},
    {"epsilon", "DBSCAN neighborhood radius in meters"},
    {"kappa", "DBSCAN core threshold (neighbors including the point)"},
    {"steepness", "logistic steepness k, or 'adaptive'"},
    {"normalizer-exponent", "exponent of the KDE normalizer (2 pi beta^2)^-e"},
    {"envelope-radius", "envelope assignment radius in meters"},
    {"bin-width", "radial bin width in meters"},
    {"max-radius", "largest correlation radius in meters"},
    {"runs", "correlation runs per cluster"},
    {"correlation-sample", "points drawn per correlation run"},
    {"ripley-sims", "Poisson simulations per envelope"},
    {"ripley-lattice", "lattice size for the empty-space function"},
    {"ripley-max-points", "thin the point set above this size before Ripley analysis"},
    {"ripley-max-radius", "largest Ripley radius in meters"},
    {"std-ddof", "delta degrees of freedom for standard deviations"},
    {"labels", "labeling CSV to report on instead of the cluster output"},
    {"seed", "master random seed"},
    {"out", "output directory"},
    {"threads", "worker threads (0: all)"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-density hot spot analysis of incident data"};
  app.set_version_flag("--version", std::string(hotspot::version()));
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::map<std::string, std::string> flag_values;
  std::vector<CLI::Option*> flag_options;
  for (const auto& f : kFlags) {
    const std::string name(f.name);
    flag_options.push_back(app.add_option("--" + name, flag_values[name], std::string(f.help)));
  }
  std::string config_path;
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  std::vector<std::string> aliases;
  app.add_option("--alias", aliases, "extra alias RAW=CANONICAL (repeatable)");
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress progress lines");

  std::vector<std::pair<CLI::App*, std::vector<hotspot::Stage>>> commands;
  commands.emplace_back(app.add_subcommand("run", "run every stage in order"),
                        std::vector<hotspot::Stage>(std::begin(hotspot::kAllStages),
                                                    std::end(hotspot::kAllStages)));
  const std::map<hotspot::Stage, std::string> descriptions{
      {hotspot::Stage::Ingest, "load, validate and normalize incidents"},
      {hotspot::Stage::Cluster, "density-rescaled DBSCAN with envelope assignment"},
      {hotspot::Stage::Ripley, "empty-space and nearest-neighbor functions with Poisson envelopes"},
      {hotspot::Stage::Correlate, "per-cluster two-point correlation with confidence intervals"},
      {hotspot::Stage::Report, "yearly, cluster and composition tables"},
  };
  for (const auto& [stage, text] : descriptions) {
    commands.emplace_back(app.add_subcommand(std::string(hotspot::stage_name(stage)), text),
                          std::vector<hotspot::Stage>{stage});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? hotspot::kExitSuccess : hotspot::kExitUsage;
  }

  hotspot::PipelineConfig config;
  try {
    if (config_path.empty()) {
      if (const char* env = std::getenv("HOTSPOT_CONFIG")) config_path = env;
    }
    if (!config_path.empty()) {
      for (const auto& [k, v] : hotspot::read_config_file(config_path)) {
        hotspot::apply_setting(config, k, v);
      }
    }
    for (const auto& [k, v] : hotspot::settings_from_environment()) {
      hotspot::apply_setting(config, k, v);
    }
    for (std::size_t i = 0; i < std::size(kFlags); ++i) {
      if (flag_options[i]->count() > 0) {
        const std::string name(kFlags[i].name);
        hotspot::apply_setting(config, name, flag_values[name]);
      }
    }
    for (const auto& a : aliases) {
      const auto eq = a.find('=');
      if (eq == std::string::npos) {
        hotspot::fail(hotspot::ErrorKind::Config, "--alias expects RAW=CANONICAL, got '" + a + "'");
      }
      hotspot::apply_setting(config, "alias." + a.substr(0, eq), a.substr(eq + 1));
    }
  } catch (const hotspot::Error& e) {
    std::cerr << "hotspot: " << e.what() << '\n';
    return hotspot::exit_code_for(e.kind());
  }

  std::vector<hotspot::Stage> stages;
  for (const auto& [cmd, list] : commands) {
    if (cmd->parsed()) stages = list;
  }

  const hotspot::PipelineResult result =
      hotspot::run_stages(stages, config, quiet ? nullptr : &std::cerr);
  for (const auto& s : result.stages) {
    std::cout << hotspot::stage_name(s.stage) << ": " << (s.cached ? "cached" : "done") << '\n';
  }
  if (result.status != hotspot::kExitSuccess) {
    std::cerr << "hotspot: error: " << result.message << '\n';
  } else if (!quiet) {
    std::cerr << "[hotspot] outputs in " << config.out.string() << '\n';
  }
  return result.status;
}
