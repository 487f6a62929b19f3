#include "qndsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qndsim {

ImperfectionModel ScenarioConfig::effective_imperfections() const {
  return imperfections_enabled ? imperfections : ImperfectionModel::none();
}

VerificationDetectors ScenarioConfig::verification() const {
  return {as_measured, as_measured ? effective_imperfections().homodyne_efficiency() : 1.0};
}

GaussianState ScenarioConfig::input_state() const {
  GaussianState s = vacuum_state(2);
  for (std::size_t m = 0; m < 2; ++m) {
    if (inputs[m].coherent) {
      s = inputs[m].quadrature == Quadrature::X ? displace(s, m, inputs[m].amplitude, 0.0)
                                                : displace(s, m, 0.0, inputs[m].amplitude);
    }
  }
  return s;
}

std::vector<double> ScenarioConfig::g_grid() const { return make_grid(g_min, g_max, g_step); }

void ScenarioConfig::validate() const {
  gate.validate();
  imperfections.validate();
  for (const auto& in : inputs) {
    if (!std::isfinite(in.amplitude)) {
      throw std::invalid_argument("input amplitudes must be finite");
    }
  }
  if (!(probe_amplitude > 0.0) || !std::isfinite(probe_amplitude)) {
    throw std::invalid_argument("probe amplitude must be positive");
  }
  if (mode == RunMode::Trajectories && trajectories < 2) {
    throw std::invalid_argument("trajectory mode needs at least two trajectories");
  }
  make_grid(g_min, g_max, g_step);
  if (output_format != "table" && output_format != "csv") {
    throw std::invalid_argument("output format must be 'table' or 'csv'");
  }
}

namespace {

Quadrature parse_quadrature(const std::string& q) {
  if (q == "x") return Quadrature::X;
  if (q == "p") return Quadrature::P;
  throw std::invalid_argument("quadrature must be 'x' or 'p'");
}

template <class T>
void read(const nlohmann::json& obj, const char* key, T& target) {
  if (obj.contains(key)) {
    target = obj.at(key).get<T>();
  }
}

}  // namespace

ScenarioConfig scenario_from_json(const nlohmann::json& doc) {
  ScenarioConfig c;
  if (doc.contains("gate")) {
    const auto& g = doc.at("gate");
    const bool has_r = g.contains("R");
    const bool has_g = g.contains("G");
    if (has_r == has_g) {
      throw std::invalid_argument("gate must specify exactly one of R and G");
    }
    if (has_r) {
      c.gate.reflectivity = g.at("R").get<double>();
    } else {
      c.gate.reflectivity = reflectivity_from_gain(g.at("G").get<double>());
    }
    read(g, "squeezing_dB_A", c.gate.squeezing_db_a);
    read(g, "squeezing_dB_B", c.gate.squeezing_db_b);
    read(g, "anti_squeeze_excess", c.gate.anti_squeeze_excess);
  }
  if (doc.contains("imperfections")) {
    const auto& i = doc.at("imperfections");
    auto& m = c.imperfections;
    read(i, "enabled", c.imperfections_enabled);
    read(i, "propagation_loss_per_main_mode", m.propagation_loss);
    if (i.contains("loss_placement")) {
      m.loss_placement = loss_placement_from_string(i.at("loss_placement").get<std::string>());
    }
    read(i, "detector_quantum_efficiency", m.detector_quantum_efficiency);
    read(i, "visibility", m.visibility);
    if (i.contains("dark_noise_dB_below_shot")) {
      const auto& d = i.at("dark_noise_dB_below_shot");
      m.dark_noise_db_below_shot =
          d.is_null() ? std::numeric_limits<double>::infinity() : d.get<double>();
    }
    read(i, "displacement_coupler_loss", m.displacement_coupler_loss);
    read(i, "coupler_loss_enabled", m.coupler_loss_enabled);
    read(i, "feedforward_electronic_gain_error", m.feedforward_gain_error);
    read(i, "extra_inloop_loss", m.extra_inloop_loss);
    read(i, "as_measured", c.as_measured);
  }
  if (doc.contains("inputs")) {
    const auto& in = doc.at("inputs");
    if (!in.is_array() || in.size() != 2) {
      throw std::invalid_argument("inputs must list exactly two modes");
    }
    for (std::size_t k = 0; k < 2; ++k) {
      const auto type = in[k].value("type", std::string("vacuum"));
      if (type == "vacuum") {
        c.inputs[k] = {};
      } else if (type == "coherent") {
        c.inputs[k] = {true, in[k].at("amplitude").get<double>(),
                       parse_quadrature(in[k].value("quadrature", std::string("x")))};
      } else {
        throw std::invalid_argument("input type must be 'vacuum' or 'coherent'");
      }
    }
  }
  if (doc.contains("run")) {
    const auto& r = doc.at("run");
    if (r.contains("mode")) {
      const auto mode = r.at("mode").get<std::string>();
      if (mode == "covariance") {
        c.mode = RunMode::Covariance;
      } else if (mode == "trajectories") {
        c.mode = RunMode::Trajectories;
      } else {
        throw std::invalid_argument("run mode must be 'covariance' or 'trajectories'");
      }
    }
    read(r, "trajectories", c.trajectories);
    read(r, "master_seed", c.master_seed);
    read(r, "threads", c.threads);
    read(r, "probe_amplitude", c.probe_amplitude);
    if (r.contains("g_grid")) {
      const auto& g = r.at("g_grid");
      read(g, "min", c.g_min);
      read(g, "max", c.g_max);
      read(g, "step", c.g_step);
    }
  }
  if (doc.contains("output")) {
    read(doc.at("output"), "format", c.output_format);
    read(doc.at("output"), "path", c.output_path);
  }
  c.validate();
  return c;
}

nlohmann::json scenario_to_json(const ScenarioConfig& c) {
  const auto& m = c.imperfections;
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& in : c.inputs) {
    if (in.coherent) {
      inputs.push_back({{"type", "coherent"},
                        {"amplitude", in.amplitude},
                        {"quadrature", in.quadrature == Quadrature::X ? "x" : "p"}});
    } else {
      inputs.push_back({{"type", "vacuum"}});
    }
  }
  nlohmann::json dark = std::isinf(m.dark_noise_db_below_shot)
                            ? nlohmann::json(nullptr)
                            : nlohmann::json(m.dark_noise_db_below_shot);
  return {
      {"gate",
       {{"R", c.gate.reflectivity},
        {"squeezing_dB_A", c.gate.squeezing_db_a},
        {"squeezing_dB_B", c.gate.squeezing_db_b},
        {"anti_squeeze_excess", c.gate.anti_squeeze_excess}}},
      {"imperfections",
       {{"enabled", c.imperfections_enabled},
        {"propagation_loss_per_main_mode", m.propagation_loss},
        {"loss_placement", to_string(m.loss_placement)},
        {"detector_quantum_efficiency", m.detector_quantum_efficiency},
        {"visibility", m.visibility},
        {"dark_noise_dB_below_shot", dark},
        {"displacement_coupler_loss", m.displacement_coupler_loss},
        {"coupler_loss_enabled", m.coupler_loss_enabled},
        {"feedforward_electronic_gain_error", m.feedforward_gain_error},
        {"extra_inloop_loss", m.extra_inloop_loss},
        {"as_measured", c.as_measured}}},
      {"inputs", inputs},
      {"run",
       {{"mode", c.mode == RunMode::Covariance ? "covariance" : "trajectories"},
        {"trajectories", c.trajectories},
        {"master_seed", c.master_seed},
        {"threads", c.threads},
        {"probe_amplitude", c.probe_amplitude},
        {"g_grid", {{"min", c.g_min}, {"max", c.g_max}, {"step", c.g_step}}}}},
      {"output", {{"format", c.output_format}, {"path", c.output_path}}},
  };
}

const std::array<ReferenceEntry, 4>& reference_measurements() {
  static const std::array<ReferenceEntry, 4> table{{
      {1.0, Sector::X, 0.79, 0.03, 0.41, 0.02, 1.20, 0.05, 0.75, 0.01},
      {1.0, Sector::P, 0.71, 0.03, 0.39, 0.02, 1.10, 0.05, 0.78, 0.01},
      {1.5, Sector::X, 0.80, 0.03, 0.62, 0.03, 1.42, 0.06, 0.61, 0.01},
      {1.5, Sector::P, 0.71, 0.03, 0.56, 0.02, 1.27, 0.05, 0.63, 0.01},
  }};
  return table;
}

namespace {

QndReport simulate_gain(const ScenarioConfig& base, double gain, double extra_inloop_loss) {
  GateParams params = base.gate;
  params.reflectivity = reflectivity_from_gain(gain);
  ImperfectionModel imp = base.effective_imperfections();
  if (base.imperfections_enabled) {
    imp.extra_inloop_loss = extra_inloop_loss;
  }
  const Circuit gate = build_qnd_gate(params, imp);
  return evaluate_gate(gate, base.verification(), base.g_grid(), base.probe_amplitude);
}

}  // namespace

double reference_objective(const ScenarioConfig& base, double extra_inloop_loss) {
  double total = 0.0;
  for (double gain : {1.0, 1.5}) {
    const QndReport report = simulate_gain(base, gain, extra_inloop_loss);
    for (const auto& ref : reference_measurements()) {
      if (ref.gain != gain) continue;
      const auto& s = report.sector(ref.sector);
      total += std::pow((s.t_sum() - ref.t_sum) / ref.t_sum_err, 2) +
               std::pow((s.v_sp - ref.v_sp) / ref.v_sp_err, 2);
    }
  }
  return total;
}

CalibrationResult calibrate_inloop_loss(const ScenarioConfig& base, double max_loss, double step) {
  if (!(max_loss >= 0.0 && max_loss < 1.0) || !(step > 0.0)) {
    throw std::invalid_argument("calibration range must lie in [0, 1) with positive step");
  }
  CalibrationResult best{0.0, std::numeric_limits<double>::infinity()};
  for (double loss : make_grid(0.0, max_loss, step)) {
    const double obj = reference_objective(base, loss);
    if (obj < best.objective) {
      best = {loss, obj};
    }
  }
  return best;
}

bool TableComparison::all_within_band() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const ComparisonRow& r) { return !r.gated || r.within_band; });
}

double TableComparison::worst_normalized_residual() const {
  double worst = 0.0;
  for (const auto& r : rows) {
    if (r.gated) {
      worst = std::max(worst, std::abs(r.simulated - r.reference) / (band_factor * r.error));
    }
  }
  return worst;
}

TableComparison reproduce_table(const ScenarioConfig& base, bool calibrate, double band_factor) {
  TableComparison out;
  out.band_factor = band_factor;
  out.calibrated = calibrate && base.imperfections_enabled;
  out.calibration = out.calibrated
                        ? calibrate_inloop_loss(base)
                        : CalibrationResult{base.imperfections.extra_inloop_loss,
                                            reference_objective(base, base.imperfections.extra_inloop_loss)};
  for (double gain : {1.0, 1.5}) {
    const QndReport report = simulate_gain(base, gain, out.calibration.extra_inloop_loss);
    for (const auto& ref : reference_measurements()) {
      if (ref.gain != gain) continue;
      const auto& s = report.sector(ref.sector);
      auto row = [&](const char* name, double sim, double value, double err, bool gated) {
        out.rows.push_back({gain, ref.sector, name, sim, value, err,
                            std::abs(sim - value) <= band_factor * err, gated});
      };
      row("T_S", s.t_signal, ref.t_signal, ref.t_signal_err, false);
      row("T_P", s.t_probe, ref.t_probe, ref.t_probe_err, false);
      row("T_sum", s.t_sum(), ref.t_sum, ref.t_sum_err, true);
      row("V_SP", s.v_sp, ref.v_sp, ref.v_sp_err, true);
    }
  }
  return out;
}

}  // namespace qndsim
