// Command-line front end for the ring-road mixed-traffic toolkit:
// analyze / reach / synthesize / simulate / experiment over one config file.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "ringflow/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  double dt_override = -1.0;
  long long seed_override = -1;
  bool allow_unreachable = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "configuration file")
      ->required();
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed_override, "override [scenario] rng_seed");
  cmd->add_option("--dt", args.dt_override, "override [scenario] dt_s");
  cmd->add_flag("--allow-unreachable", args.allow_unreachable,
                "bypass the reachable-velocity gate");
}

ringflow::ExperimentConfig load(const CommonArgs& args) {
  ringflow::ExperimentConfig cfg =
      ringflow::load_experiment_config(args.config_path);
  if (args.seed_override >= 0) {
    cfg.rng_seed = static_cast<std::uint64_t>(args.seed_override);
  }
  if (args.dt_override > 0.0) cfg.dt_s = args.dt_override;
  cfg.allow_unreachable = args.allow_unreachable;
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  return cfg;
}

void emit(const nlohmann::json& doc, const ringflow::ExperimentConfig& cfg,
          const std::string& name) {
  std::cout << doc.dump(2) << "\n";
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    ringflow::write_json(doc, cfg.out_dir + "/" + name + ".json");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ringflow: controllability analysis, structured H2 synthesis and "
      "nonlinear simulation for a mixed-autonomy ring road"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string experiment_which = "A";

  CLI::App* analyze = app.add_subcommand(
      "analyze", "controllability / stabilizability report");
  add_common(analyze, args);
  CLI::App* reach = app.add_subcommand(
      "reach", "equilibrium spacing and maximum reachable velocity");
  add_common(reach, args);
  CLI::App* synth = app.add_subcommand(
      "synthesize", "structured H2 gain via the convex relaxation");
  add_common(synth, args);
  CLI::App* simulate =
      app.add_subcommand("simulate", "nonlinear closed-loop simulation");
  add_common(simulate, args);
  CLI::App* experiment = app.add_subcommand(
      "experiment", "canned experiment families A, B or C");
  add_common(experiment, args);
  experiment->add_option("--which", experiment_which, "A, B or C")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const ringflow::ExperimentConfig cfg = load(args);
    if (analyze->parsed()) {
      const auto doc = ringflow::cmd_analyze(cfg);
      emit(doc, cfg, "analyze");
      std::cout << doc["verdict"].get<std::string>() << "\n";
    } else if (reach->parsed()) {
      emit(ringflow::cmd_reach(cfg), cfg, "reach");
    } else if (synth->parsed()) {
      emit(ringflow::cmd_synthesize(cfg), cfg, "synthesize");
    } else if (simulate->parsed()) {
      emit(ringflow::cmd_simulate(cfg, cfg.out_dir), cfg, "simulate_summary");
    } else if (experiment->parsed()) {
      if (experiment_which.size() != 1) {
        std::fprintf(stderr, "error: --which must be A, B or C\n");
        return kExitConfig;
      }
      const char which =
          static_cast<char>(std::toupper(experiment_which[0]));
      emit(ringflow::cmd_experiment(cfg, which, cfg.out_dir), cfg,
           std::string("experiment_") +
               static_cast<char>(std::tolower(which)) + "_summary");
    }
    return kExitOk;
  } catch (const ringflow::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ringflow::ValidationError& e) {
    std::fprintf(stderr, "parameter validation error: %s\n", e.what());
    return kExitConfig;
  } catch (const ringflow::TopologyError& e) {
    std::fprintf(stderr, "topology error: %s\n", e.what());
    return kExitConfig;
  } catch (const ringflow::ReachabilityError& e) {
    std::fprintf(stderr, "reachability error: %s\n", e.what());
    return kExitInfeasible;
  } catch (const ringflow::InfeasibleEquilibriumError& e) {
    std::fprintf(stderr, "infeasible equilibrium: %s\n", e.what());
    return kExitInfeasible;
  } catch (const ringflow::StructuredInfeasibleError& e) {
    std::fprintf(stderr, "structured-infeasible: %s\n", e.what());
    return kExitInfeasible;
  } catch (const ringflow::Error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
}
