#include <CLI11.hpp>
#include <iostream>

#include "nci/config.hpp"
#include "nci/experiments.hpp"
#include "nci/sweep.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Real-space topological invariants: parameter sweeps and checks"};
  app.require_subcommand(1);

  std::string config_path;
  int threads = 0;
  bool resume = false;

  auto* validate = app.add_subcommand("validate", "Parse and check a sweep configuration");
  validate->add_option("--config", config_path, "configuration file")->required();

  std::vector<CLI::App*> runs;
  for (const auto& e : nci::experiments()) {
    auto* sub = app.add_subcommand(e.name, "Run a " + e.name + " sweep");
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--threads", threads, "worker threads (default: NCI_THREADS or 1)");
    sub->add_flag("--resume", resume, "skip tasks already recorded in the output file");
    runs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  nci::SweepConfig cfg;
  try {
    cfg = nci::validate_config(config_path);
  } catch (const nci::ConfigError& e) {
    std::cerr << (e.code() == nci::Errc::parse_error ? "parse error" : "semantic error") << ":\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
    return 1;
  }

  if (validate->parsed()) {
    std::cout << "ok: " << cfg.experiment << ", " << cfg.grid_points() << " grid points x " << cfg.seeds.size()
              << " seeds\n";
    return 0;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  if (name != cfg.experiment) {
    std::cerr << "semantic error:\n  config describes '" << cfg.experiment << "' but '" << name << "' was requested\n";
    return 1;
  }

  try {
    const auto rep = nci::run_sweep(cfg, {threads, resume, true});
    std::cerr << rep.tasks << " tasks, " << rep.skipped << " resumed, " << rep.failed << " failed\n";
    std::cerr << "records: " << rep.records_path << "\nsummary: " << rep.summary_path << '\n';
    return rep.failed > 0 ? 2 : 0;
  } catch (const nci::Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
}
