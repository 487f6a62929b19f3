#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qndsim/gaussian_state.hpp"
#include "qndsim/quad_expr.hpp"

namespace qndsim {

/// G = 1/sqrt(R) - sqrt(R) for R in (0, 1].
double gain_from_reflectivity(double reflectivity);
/// Inverse of gain_from_reflectivity: sqrt(R) is the positive root of u^2 + G u - 1.
double reflectivity_from_gain(double gain);

struct GateParams {
  double reflectivity = 1.0;
  double squeezing_db_a = -5.0;
  double squeezing_db_b = -5.0;
  /// Factor >= 1 on the anti-squeezed ancilla variance; 1 means pure ancillas.
  double anti_squeeze_excess = 1.0;

  static GateParams from_gain(double gain, double squeezing_db_a = -5.0,
                              double squeezing_db_b = -5.0);

  double gain() const { return gain_from_reflectivity(reflectivity); }
  double r_a() const { return squeeze_parameter_from_db(squeezing_db_a); }
  double r_b() const { return squeeze_parameter_from_db(squeezing_db_b); }
  /// Entry, arm A, arm B and exit reflectivities: 1/(1+R), R, R, R/(1+R).
  std::array<double, 4> reflectivities() const;
  void validate() const;
};

enum class LossPlacement { PreGate, PostExit, Distributed };

std::string to_string(LossPlacement placement);
LossPlacement loss_placement_from_string(const std::string& name);

struct ImperfectionModel {
  double propagation_loss = 0.07;
  LossPlacement loss_placement = LossPlacement::PreGate;
  double detector_quantum_efficiency = 0.99;
  double visibility = 0.98;
  /// Infinity disables dark noise.
  double dark_noise_db_below_shot = 17.0;
  double displacement_coupler_loss = 0.01;
  bool coupler_loss_enabled = true;
  double feedforward_gain_error = 0.0;
  /// Extra loss on each kept arm mode inside the feedforward loop (fit parameter).
  double extra_inloop_loss = 0.0;

  static ImperfectionModel none();

  /// Quantum efficiency times visibility squared.
  double homodyne_efficiency() const;
  double dark_variance() const;
  void validate() const;
};

// Circuit elements. Mode indices refer to the mode list at the point the
// element executes; a homodyne removes its measured mode afterwards and an
// ancilla injection appends a new last mode.

struct AncillaInjection {
  std::string label;  ///< basis tag, e.g. "A" gives labels xA0 / pA0
  double r = 0.0;
  double angle = 0.0;
  double anti_squeeze_excess = 1.0;
};

struct BeamSplitter {
  std::size_t i = 0;
  std::size_t j = 1;
  double reflectivity = 0.5;
  BeamSplitterSigns signs{};
};

struct Loss {
  std::size_t mode = 0;
  double efficiency = 1.0;
};

/// Homodyne on `measured` at `angle`, then displace `target` quadrature by
/// gain * readout. `target` is indexed before the measured mode is removed.
struct HomodyneFeedforward {
  std::size_t measured = 0;
  double angle = 0.0;
  std::size_t target = 1;
  Quadrature target_quadrature = Quadrature::X;
  double gain = 0.0;
  double efficiency = 1.0;
  double dark_variance = 0.0;
};

struct Displacement {
  std::size_t mode = 0;
  double dx = 0.0;
  double dp = 0.0;
};

using CircuitElement =
    std::variant<AncillaInjection, BeamSplitter, Loss, HomodyneFeedforward, Displacement>;

class Circuit {
 public:
  explicit Circuit(std::size_t n_inputs);

  Circuit& push(CircuitElement element);

  std::size_t n_inputs() const { return n_inputs_; }
  std::size_t n_outputs() const;
  const std::vector<CircuitElement>& elements() const { return elements_; }

  /// Checks mode indices and parameter ranges step by step.
  void validate() const;

 private:
  std::size_t n_inputs_;
  std::vector<CircuitElement> elements_;
};

nlohmann::json circuit_to_json(const Circuit& circuit);
Circuit circuit_from_json(const nlohmann::json& doc);

/// Compiles the two-mode offline-squeezing sum gate. Throws std::logic_error
/// when the lossless compilation disagrees with finite_squeezing_map by more
/// than 1e-9 in any coefficient.
Circuit build_qnd_gate(const GateParams& params,
                       const ImperfectionModel& imperfections = ImperfectionModel::none());

/// Heisenberg-picture propagation. Input mode k contributes labels
/// x<k+1>_in / p<k+1>_in; ancillas contribute x<label>0 / p<label>0; loss
/// channels add fresh vacua xL<n> / pL<n>; dark noise adds classical d<n>.
std::vector<LinearQuadExpr> heisenberg_outputs(const Circuit& circuit);
/// Two-mode form of heisenberg_outputs.
QuadratureMap circuit_quadrature_map(const Circuit& circuit);

/// Optional hooks for auditing every intermediate state and unitary.
struct ExecutionObserver {
  std::function<void(const GaussianState&)> on_state;
  std::function<void(const SymplecticMatrix&)> on_symplectic;
};

/// Deterministic ensemble-level execution: each homodyne-feedforward stage is
/// replaced by its outcome-averaged Gaussian map.
GaussianState run_covariance(const Circuit& circuit, const GaussianState& input,
                             const ExecutionObserver* observer = nullptr);

struct TrajectoryResult {
  GaussianState state;
  std::vector<double> outcomes;
};

/// Single-shot execution with sampled homodyne readouts.
TrajectoryResult run_trajectory(const Circuit& circuit, const GaussianState& input,
                                NormalSource& noise, const ExecutionObserver* observer = nullptr);

}  // namespace qndsim
