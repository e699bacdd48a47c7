// Command-line front end: analytic curves, Monte Carlo runs, the syscall
// detector, the response policy, figure data and synthetic traces.
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "escape/scenario.hpp"
#include "escape/text.hpp"

namespace {

using escape::scenario::Engine;
using escape::scenario::ExitCode;
using escape::scenario::ScenarioSpec;

struct Invocation {
  Engine engine = Engine::Analytic;
  std::map<std::string, std::string> overrides;
  std::string config_path;
  std::string out;
  std::string default_out;  // used when neither --out nor the config sets one
};

// Registers `--flag-name` storing into overrides[key].
void param(CLI::App* app, Invocation& inv, const std::string& flag, const std::string& key,
           const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&inv, key](const std::string& v) { inv.overrides[key] = v; }, help);
}

void common(CLI::App* app, Invocation& inv) {
  param(app, inv, "--seed", "seed", "64-bit seed");
  app->add_option("--out", inv.out, "output path (default: stdout)");
  app->add_option("--config", inv.config_path, "scenario config file (key = value)");
}

void growth_flags(CLI::App* app, Invocation& inv) {
  param(app, inv, "--growth", "growth", "static | exponential | logistic");
  param(app, inv, "--n", "n", "attacker count for static growth");
  param(app, inv, "--n0", "n0", "initial attackers for exponential/logistic growth");
  param(app, inv, "--k", "k", "growth rate");
  param(app, inv, "--mu", "mu", "logistic carrying capacity");
  param(app, inv, "--v", "v", "total host count");
  param(app, inv, "--td", "td", "detection time");
}

int run(const Invocation& inv) {
  ScenarioSpec spec;
  spec.engine = inv.engine;
  try {
    if (!inv.config_path.empty()) {
      spec = escape::scenario::parse_config(escape::text::read_file(inv.config_path));
      if (spec.engine != inv.engine) {
        std::cerr << "error: config engine '" << escape::scenario::to_string(spec.engine)
                  << "' does not match subcommand engine '"
                  << escape::scenario::to_string(inv.engine) << "'\n";
        return static_cast<int>(ExitCode::InvalidSpec);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::InvalidSpec);
  }
  for (const auto& [k, v] : inv.overrides) {
    spec.params[k] = v;
  }
  if (!inv.out.empty()) {
    spec.output = inv.out;
  } else if (spec.output.empty() && !inv.default_out.empty()) {
    spec.output = inv.default_out;
  }
  return static_cast<int>(escape::scenario::run_scenario(spec, std::cout, std::cerr));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"escape: moving-target-defense survival models, simulation and detection"};
  app.require_subcommand(1);
  Invocation inv;

  auto* model = app.add_subcommand("model-curve", "analytic survival curve(s) as CSV");
  common(model, inv);
  growth_flags(model, inv);
  param(model, inv, "--mode", "mode", "static | mobile | both");
  param(model, inv, "--t-min", "t_min", "first grid point (default 2)");
  param(model, inv, "--t-max", "t_max", "last grid point (default 100)");
  param(model, inv, "--t-step", "t_step", "grid step (default 1)");
  param(model, inv, "--grid", "grid", "explicit comma-separated time grid");
  model->callback([&] { inv.engine = Engine::Analytic; });

  auto* sim = app.add_subcommand("simulate", "Monte Carlo lattice simulation");
  common(sim, inv);
  growth_flags(sim, inv);
  param(sim, inv, "--mode", "mode", "static | mobile prey");
  param(sim, inv, "--t-max", "t_max", "ticks per trial");
  param(sim, inv, "--trials", "trials", "number of trials");
  param(sim, inv, "--threads", "threads", "worker threads (0 = all cores)");
  sim->callback([&] { inv.engine = Engine::MonteCarlo; });

  auto* detect = app.add_subcommand("detect", "bag-of-system-calls detector");
  detect->require_subcommand(1);
  auto* train = detect->add_subcommand("train", "learn a normal-behavior database");
  auto* drun = detect->add_subcommand("run", "check a trace against a database");
  std::string db_path;
  for (auto* sub : {train, drun}) {
    common(sub, inv);
    param(sub, inv, "--trace", "trace", "syscall trace file");
    param(sub, inv, "--container", "container", "only use events for this container id");
    param(sub, inv, "--epoch-size", "epoch_size", "syscalls per epoch (default 1000)");
    sub->add_option_function<std::string>(
        "--db", [&](const std::string& v) { inv.overrides["db"] = v; db_path = v; },
        "database file");
  }
  param(drun, inv, "--threshold", "threshold", "mismatches per epoch tolerated (default 10)");
  train->callback([&] {
    inv.engine = Engine::Detector;
    inv.overrides["action"] = "train";
    inv.default_out = db_path;
  });
  drun->callback([&] {
    inv.engine = Engine::Detector;
    inv.overrides["action"] = "run";
  });

  auto* pol = app.add_subcommand("policy", "rollback/migration response policy");
  pol->require_subcommand(1);
  auto* prun = pol->add_subcommand("run", "replay anomalies through the policy");
  common(prun, inv);
  param(prun, inv, "--anomalies", "anomalies", "detection report CSV");
  param(prun, inv, "--epochs", "epochs", "comma-separated anomalous epochs");
  param(prun, inv, "--hosts", "hosts", "host set file");
  param(prun, inv, "--container", "container", "container id");
  param(prun, inv, "--kind", "kind", "stateful | stateless");
  param(prun, inv, "--start-host", "start_host", "initial host (default: first in file)");
  param(prun, inv, "--rollback-limit", "rollback_limit", "rollbacks before migrating");
  param(prun, inv, "--strategy", "strategy", "max_logical_distance | uniform_random");
  param(prun, inv, "--checkpoint-ms", "checkpoint_ms", "checkpoint cost");
  param(prun, inv, "--restore-ms", "restore_ms", "restore cost");
  param(prun, inv, "--migration-ms", "migration_ms", "migration downtime");
  param(prun, inv, "--restart-ms", "restart_ms", "restart cost");
  prun->callback([&] { inv.engine = Engine::Policy; });

  auto* fig = app.add_subcommand("figure", "figure data (fig5 | fig6 | fig8 | fig9)");
  common(fig, inv);
  fig->add_option_function<std::string>(
         "which", [&](const std::string& v) { inv.overrides["which"] = v; }, "figure name")
      ->required();
  fig->callback([&] { inv.engine = Engine::Figure; });

  auto* gen = app.add_subcommand("gen-trace", "synthetic syscall trace");
  common(gen, inv);
  param(gen, inv, "--alphabet", "alphabet", "distinct syscalls in the baseline");
  param(gen, inv, "--length", "length", "number of syscalls");
  param(gen, inv, "--inject-offset", "inject_offset", "start of the novel block");
  param(gen, inv, "--inject-count", "inject_count", "length of the novel block");
  gen->callback([&] { inv.engine = Engine::Trace; });

  CLI11_PARSE(app, argc, argv);
  return run(inv);
}
