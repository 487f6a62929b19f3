#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Offline-squeezing QND sum gate simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<double> gain;
  std::optional<double> reflectivity;
  std::optional<double> squeezing_db;
  std::optional<double> extra_loss;
  std::optional<std::size_t> trajectories;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string csv_path;
  std::string format;
  bool no_imperfections = false;
  bool as_measured = false;
  bool fixed_loss = false;

  app.add_option("--config", config_path, "Scenario JSON file")->check(CLI::ExistingFile);
  auto* g_opt = app.add_option("--gain", gain, "Interaction gain G (>= 0)");
  auto* r_opt = app.add_option("--reflectivity", reflectivity, "Beam-splitter parameter R in (0, 1]");
  g_opt->excludes(r_opt);
  app.add_option("--squeezing-db", squeezing_db, "Squeezing of both ancillas in dB (negative = squeezed)");
  app.add_flag("--no-imperfections", no_imperfections, "Lossless, noiseless gate");
  app.add_option("--extra-inloop-loss", extra_loss, "Extra loss inside each feedforward arm");
  app.add_flag("--as-measured", as_measured, "Read outputs through the verification detectors");
  app.add_option("--trajectories", trajectories, "Run N sampled trajectories instead of covariance propagation");
  app.add_option("--seed", seed, "Master seed for trajectory mode");
  app.add_option("--threads", threads, "Worker threads for trajectory mode (0 = all cores)");
  app.add_option("--csv", csv_path, "Write CSV to this path");
  app.add_option("--format", format, "table or csv (stdout)")->check(CLI::IsMember({"table", "csv"}));

  auto* vacuum = app.add_subcommand("vacuum-spectra", "Output quadrature variances for vacuum inputs");
  auto* transfer = app.add_subcommand("transfer", "Coherent-excitation routing and transfer coefficients");
  auto* conditional = app.add_subcommand("conditional", "Conditional-variance sweeps and entanglement witness");
  auto* table = app.add_subcommand("reproduce-table", "Compare G = 1.0 / 1.5 against the reference measurements");
  table->add_flag("--fixed-loss", fixed_loss, "Use the configured in-loop loss instead of fitting it");
  auto* oracle = app.add_subcommand("oracle-check", "Compiled circuit vs closed-form relations over the R x squeezing grid");

  CLI11_PARSE(app, argc, argv);

  try {
    qndsim::cli::CommandContext ctx;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      ctx.config = qndsim::scenario_from_json(nlohmann::json::parse(f));
    }
    auto& c = ctx.config;
    if (gain) c.gate.reflectivity = qndsim::reflectivity_from_gain(*gain);
    if (reflectivity) c.gate.reflectivity = *reflectivity;
    if (squeezing_db) c.gate.squeezing_db_a = c.gate.squeezing_db_b = *squeezing_db;
    if (no_imperfections) c.imperfections_enabled = false;
    if (extra_loss) c.imperfections.extra_inloop_loss = *extra_loss;
    if (as_measured) c.as_measured = true;
    if (trajectories) {
      c.mode = qndsim::RunMode::Trajectories;
      c.trajectories = *trajectories;
    }
    if (seed) c.master_seed = *seed;
    if (threads) c.threads = *threads;
    if (!csv_path.empty()) c.output_path = csv_path;
    if (!format.empty()) c.output_format = format;
    c.validate();
    ctx.calibrate = !fixed_loss;

    if (*vacuum) return qndsim::cli::cmd_vacuum_spectra(ctx, std::cout);
    if (*transfer) return qndsim::cli::cmd_transfer(ctx, std::cout);
    if (*conditional) return qndsim::cli::cmd_conditional(ctx, std::cout);
    if (*table) return qndsim::cli::cmd_reproduce_table(ctx, std::cout);
    if (*oracle) return qndsim::cli::cmd_oracle_check(ctx, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
