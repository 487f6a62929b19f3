#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qndsim/circuit.hpp"
#include "qndsim/gaussian_state.hpp"

namespace qndsim {

/// x sector: signal x1, probe x2, combination x1 - g x2.
/// p sector: signal p2, probe p1, combination p2 + g p1.
enum class Sector { X, P };

std::string to_string(Sector sector);

struct SectorLayout {
  std::size_t signal;  ///< row of the signal quadrature in a two-mode state
  std::size_t probe;
  double sign;         ///< combination is signal + sign * g * probe
};

SectorLayout sector_layout(Sector sector);

/// How output moments are read out.
struct VerificationDetectors {
  /// false: moments at the gate output. true: through detectors of the given efficiency.
  bool as_measured = false;
  double efficiency = 1.0;
};

/// Applies the verification detectors to every mode (identity when not as_measured).
GaussianState as_seen(const GaussianState& state, const VerificationDetectors& detectors);

struct TransferCoefficients {
  double signal = 0.0;  ///< T_S
  double probe = 0.0;   ///< T_P
  double sum() const { return signal + probe; }
};

/// Signal-to-noise transfer with SNR = mean^2 / variance in shot-noise units.
/// A coherent amplitude is injected into the sector's signal input (x1 or p2)
/// and the other inputs stay in vacuum.
TransferCoefficients transfer_coefficients(const Circuit& gate, Sector sector,
                                           double probe_amplitude,
                                           const VerificationDetectors& detectors = {});

struct ConditionalVariance {
  double value = 0.0;  ///< V_S|P
  double g_opt = 0.0;
};

/// Closed-form minimum over g of the sector combination variance.
ConditionalVariance conditional_variance(const GaussianState& output, Sector sector);

/// Var(signal + sign * g * probe), normalized to the signal shot noise.
double combined_variance(const GaussianState& output, Sector sector, double g);

std::vector<double> cv_sweep(const GaussianState& output, Sector sector,
                             std::span<const double> g_grid);

/// min + k * step for k = 0 .. floor((max - min) / step).
std::vector<double> make_grid(double min, double max, double step);
/// -2 to 2 in steps of 0.01.
std::vector<double> default_g_grid();

struct ReferenceCurves {
  std::vector<double> ideal;           ///< infinite squeezing
  std::vector<double> finite;          ///< configured squeezing, lossless
  std::vector<double> vacuum_ancilla;  ///< unsqueezed ancillas
};

/// Lossless theory curves from the closed-form quadrature maps.
ReferenceCurves reference_sweeps(const GateParams& params, Sector sector,
                                 std::span<const double> g_grid);

struct DuanResult {
  double sum = 0.0;
  double bound = 0.0;
  bool entangled = false;
};

/// <(x1 - g x2)^2> + <(p2 + g p1)^2> against the bound 4|g|.
DuanResult duan_simon(const GaussianState& output, double g);

struct DuanScan {
  double best_g = 0.0;
  double sum = 0.0;    ///< at best_g
  double bound = 0.0;  ///< at best_g
  double margin() const { return sum - bound; }
  bool certified() const { return sum < bound; }
};

/// The grid point minimizing sum - 4|g|.
DuanScan duan_scan(const GaussianState& output, std::span<const double> g_grid);

struct SectorReport {
  Sector sector = Sector::X;
  double t_signal = 0.0;
  double t_probe = 0.0;
  double v_sp = 0.0;
  double g_opt = 0.0;

  double t_sum() const { return t_signal + t_probe; }
  bool qnd_criteria_pass() const { return t_sum() > 1.0 && v_sp < 1.0; }
};

struct QndReport {
  SectorReport x;
  SectorReport p;
  DuanScan duan;

  bool entangled() const { return duan.certified(); }
  const SectorReport& sector(Sector s) const { return s == Sector::X ? x : p; }
};

QndReport evaluate_gate(const Circuit& gate, const VerificationDetectors& detectors = {},
                        std::span<const double> g_grid = {}, double probe_amplitude = 10.0);

nlohmann::json report_to_json(const QndReport& report);
std::string report_csv_header();
/// One line per sector, no trailing newline.
std::string report_csv_rows(const QndReport& report);

struct VarianceRow {
  std::string name;
  std::array<double, 4> variance;  ///< x1, p1, x2, p2

  std::array<double, 4> db() const;
};

struct VacuumNoiseReport {
  VarianceRow input;      ///< shot-noise reference
  VarianceRow simulated;  ///< the supplied circuit
  VarianceRow infinite_squeezing;
  VarianceRow finite_squeezing;
  VarianceRow vacuum_ancillas;

  std::vector<const VarianceRow*> rows() const;
};

VacuumNoiseReport vacuum_noise_report(const Circuit& gate, const GateParams& params);

}  // namespace qndsim
