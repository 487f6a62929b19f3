#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qndsim/circuit.hpp"
#include "qndsim/metrics.hpp"

namespace qndsim {

struct InputSpec {
  bool coherent = false;
  double amplitude = 0.0;
  Quadrature quadrature = Quadrature::X;
};

enum class RunMode { Covariance, Trajectories };

struct ScenarioConfig {
  GateParams gate = GateParams::from_gain(1.0);
  ImperfectionModel imperfections{};
  bool imperfections_enabled = true;
  /// Verification detectors: T and V_SP read through qe * visibility^2 when set.
  bool as_measured = false;
  std::array<InputSpec, 2> inputs{};
  /// Coherent amplitude used for transfer measurements (mean^2 = 100 shot).
  double probe_amplitude = 10.0;

  RunMode mode = RunMode::Covariance;
  std::size_t trajectories = 100000;
  std::uint64_t master_seed = 1;
  unsigned threads = 0;
  double g_min = -2.0;
  double g_max = 2.0;
  double g_step = 0.01;

  std::string output_format = "table";
  std::string output_path;

  ImperfectionModel effective_imperfections() const;
  VerificationDetectors verification() const;
  GaussianState input_state() const;
  std::vector<double> g_grid() const;
  void validate() const;
};

/// Keys: gate{R | G, squeezing_dB_A, squeezing_dB_B, anti_squeeze_excess},
/// imperfections{enabled, propagation_loss_per_main_mode, loss_placement,
/// detector_quantum_efficiency, visibility, dark_noise_dB_below_shot (null
/// disables), displacement_coupler_loss, coupler_loss_enabled,
/// feedforward_electronic_gain_error, extra_inloop_loss, as_measured},
/// inputs[{type: vacuum | coherent, amplitude, quadrature}],
/// run{mode, trajectories, master_seed, threads, probe_amplitude,
/// g_grid{min, max, step}}, output{format, path}. Missing keys keep defaults.
ScenarioConfig scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const ScenarioConfig& config);

/// Measured transfer coefficients and conditional variances with their quoted
/// uncertainties, for gains 1.0 and 1.5.
struct ReferenceEntry {
  double gain;
  Sector sector;
  double t_signal, t_signal_err;
  double t_probe, t_probe_err;
  double t_sum, t_sum_err;
  double v_sp, v_sp_err;
};

const std::array<ReferenceEntry, 4>& reference_measurements();

/// Squared deviation of T_sum and V_SP from the reference, in units of the quoted errors.
double reference_objective(const ScenarioConfig& base, double extra_inloop_loss);

struct CalibrationResult {
  double extra_inloop_loss = 0.0;
  double objective = 0.0;
};

/// Grid search over the extra in-loop loss in [0, max_loss].
CalibrationResult calibrate_inloop_loss(const ScenarioConfig& base, double max_loss = 0.3,
                                        double step = 0.001);

struct ComparisonRow {
  double gain;
  Sector sector;
  std::string quantity;
  double simulated;
  double reference;
  double error;
  bool within_band;
  /// Counts toward all_within_band().
  bool gated;
};

struct TableComparison {
  bool calibrated = false;
  CalibrationResult calibration;
  double band_factor = 2.0;
  std::vector<ComparisonRow> rows;

  bool all_within_band() const;
  /// Largest |simulated - reference| / (band_factor * error) among the banded quantities.
  double worst_normalized_residual() const;
};

/// Simulates G = 1.0 and 1.5 with the scenario's squeezing and imperfections
/// and compares against reference_measurements(). T_sum and V_SP are held to
/// band_factor times the quoted error; T_S and T_P are listed for context.
TableComparison reproduce_table(const ScenarioConfig& base, bool calibrate, double band_factor = 2.0);

}  // namespace qndsim
