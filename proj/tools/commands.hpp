#pragma once

#include <ostream>
#include <string>

#include "qndsim/scenario.hpp"

namespace qndsim::cli {

struct CommandContext {
  ScenarioConfig config;
  /// Fit the extra in-loop loss before comparing against the reference table.
  bool calibrate = true;
};

/// One-line description of the simulated configuration, prefixed with '#'.
std::string scenario_header(const ScenarioConfig& config);

/// Output variances for vacuum inputs (simulated plus the theory references).
int cmd_vacuum_spectra(const CommandContext& ctx, std::ostream& out);
/// Coherent excitation of each input quadrature; routing and T_S / T_P.
int cmd_transfer(const CommandContext& ctx, std::ostream& out);
/// Conditional-variance sweeps, minima and the entanglement verdict.
int cmd_conditional(const CommandContext& ctx, std::ostream& out);
/// Simulated figures of merit against the reference measurements.
int cmd_reproduce_table(const CommandContext& ctx, std::ostream& out);
/// Compiled-circuit vs closed-form equivalence over the R x squeezing grid.
int cmd_oracle_check(const CommandContext& ctx, std::ostream& out);

}  // namespace qndsim::cli
