#include "commands.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "qndsim/trajectory.hpp"

namespace qndsim::cli {

namespace {

constexpr std::array<const char*, 4> kQuadNames{"x1", "p1", "x2", "p2"};

// Writes CSV to the configured path and/or stdout (format csv); the table goes
// to stdout only in table format.
class Emitter {
 public:
  Emitter(const ScenarioConfig& c, std::ostream& out) : config_(c), out_(out) {}

  bool table() const { return config_.output_format == "table"; }
  std::ostream& text() { return table() ? out_ : sink_; }

  void csv(const std::string& content) {
    if (!table()) {
      out_ << content;
    }
    if (!config_.output_path.empty()) {
      std::ofstream f(config_.output_path);
      if (!f) {
        throw std::runtime_error("cannot write CSV to " + config_.output_path);
      }
      f << content;
    }
  }

 private:
  const ScenarioConfig& config_;
  std::ostream& out_;
  std::ostringstream sink_;
};

struct Simulation {
  GaussianState state;
  std::size_t n = 0;  ///< 0 in covariance mode
};

Simulation simulate(const ScenarioConfig& c, const Circuit& gate, const GaussianState& input) {
  if (c.mode == RunMode::Covariance) {
    return {run_covariance(gate, input), 0};
  }
  EnsembleOptions opts;
  opts.threads = c.threads;
  const auto ens = run_ensemble(gate, input, c.trajectories, c.master_seed, opts);
  return {GaussianState(ens.mean, ens.cov), ens.n_trajectories};
}

Circuit build(const ScenarioConfig& c) { return build_qnd_gate(c.gate, c.effective_imperfections()); }

std::string db_text(double v) { return v > 0.0 ? fmt::format("{:.3f}", variance_to_db(v)) : "-inf"; }

}  // namespace

std::string scenario_header(const ScenarioConfig& c) {
  const auto imp = c.effective_imperfections();
  std::string s = fmt::format("# R={:.12f} G={:.12f} squeezing_dB_A={:g} squeezing_dB_B={:g}",
                              c.gate.reflectivity, c.gate.gain(), c.gate.squeezing_db_a,
                              c.gate.squeezing_db_b);
  if (c.imperfections_enabled) {
    s += fmt::format(
        " imperfections=on loss={:g}({}) eta_hd={:.4f} dark_var={:.4f} coupler_loss={:g} "
        "extra_inloop_loss={:g}",
        imp.propagation_loss, to_string(imp.loss_placement), imp.homodyne_efficiency(),
        imp.dark_variance(), imp.coupler_loss_enabled ? imp.displacement_coupler_loss : 0.0,
        imp.extra_inloop_loss);
  } else {
    s += " imperfections=off";
  }
  if (c.mode == RunMode::Trajectories) {
    s += fmt::format(" mode=trajectories n={} seed={}", c.trajectories, c.master_seed);
  } else {
    s += " mode=covariance";
  }
  if (c.as_measured) {
    s += " readout=as-measured";
  }
  return s;
}

int cmd_vacuum_spectra(const CommandContext& ctx, std::ostream& out) {
  const auto& c = ctx.config;
  const Circuit gate = build(c);
  VacuumNoiseReport report = vacuum_noise_report(gate, c.gate);
  if (c.mode == RunMode::Trajectories) {
    const auto sim = simulate(c, gate, vacuum_state(2));
    for (std::size_t k = 0; k < 4; ++k) {
      report.simulated.variance[k] = sim.state.cov()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    }
  }

  Emitter emit(c, out);
  auto& t = emit.text();
  t << scenario_header(c) << '\n';
  t << fmt::format("{:<20}", "curve");
  for (auto q : kQuadNames) t << fmt::format("  {:>20}", std::string(q) + "_out");
  t << '\n';
  std::string csv = "curve,quadrature,variance,variance_dB\n";
  for (const VarianceRow* row : report.rows()) {
    t << fmt::format("{:<20}", row->name);
    for (std::size_t k = 0; k < 4; ++k) {
      t << fmt::format("  {:9.5f} ({:>7} dB)", row->variance[k], db_text(row->variance[k]));
      csv += fmt::format("{},{}_out,{:.8f},{:.6f}\n", row->name, kQuadNames[k], row->variance[k],
                         variance_to_db(row->variance[k]));
    }
    t << '\n';
  }
  emit.csv(csv);
  return 0;
}

int cmd_transfer(const CommandContext& ctx, std::ostream& out) {
  const auto& c = ctx.config;
  const Circuit gate = build(c);
  const auto det = c.verification();
  const double a = c.probe_amplitude;
  const QuadratureMap ideal = ideal_qnd_map(c.gate.gain());

  Emitter emit(c, out);
  auto& t = emit.text();
  t << scenario_header(c) << '\n';
  std::string csv = "case,input,output,mean,variance,second_moment_dB,carries,expected\n";
  bool routing_ok = true;
  std::array<GaussianState, 4> outputs{vacuum_state(2), vacuum_state(2), vacuum_state(2), vacuum_state(2)};

  const std::array<const char*, 4> case_names{"a", "b", "c", "d"};
  const std::array<std::size_t, 4> excited{0, 2, 1, 3};  // x1, x2, p1, p2
  for (std::size_t k = 0; k < 4; ++k) {
    const std::size_t in = excited[k];
    Vector mean = Vector::Zero(4);
    mean(static_cast<Eigen::Index>(in)) = a;
    const auto sim = simulate(c, gate, GaussianState(mean, Matrix::Identity(4, 4)));
    const GaussianState seen = as_seen(sim.state, det);
    outputs[k] = seen;
    const std::string in_label = std::string(kQuadNames[in]) + "_in";
    t << fmt::format("({}) excitation {:.3g} in {}:", case_names[k], a, in_label);
    for (std::size_t q = 0; q < 4; ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      const double m = seen.mean()(qi);
      const double v = seen.cov()(qi, qi);
      const double threshold = sim.n == 0 ? 1e-9 * std::max(1.0, a) : 5.0 * std::sqrt(v / static_cast<double>(sim.n));
      const bool carries = std::abs(m) > threshold;
      const bool expected = ideal.outputs[q].coefficient(in_label) != 0.0;
      routing_ok = routing_ok && carries == expected;
      t << fmt::format("  {}_out {:+.4f} ({:.2f} dB){}", kQuadNames[q], m, variance_to_db(m * m + v),
                       carries ? "*" : "");
      csv += fmt::format("{},{},{}_out,{:.8f},{:.8f},{:.6f},{},{}\n", case_names[k], in_label,
                         kQuadNames[q], m, v, variance_to_db(m * m + v), carries ? 1 : 0,
                         expected ? 1 : 0);
    }
    t << '\n';
  }
  t << "(* = carries the excitation)\n";
  t << "routing: " << (routing_ok ? "matches the sum-gate pattern" : "MISMATCH") << '\n';

  Vector in_mean = Vector::Zero(4);
  in_mean(0) = a;
  const GaussianState in_seen = as_seen(GaussianState(in_mean, Matrix::Identity(4, 4)), det);
  const double snr_input = in_seen.mean()(0) * in_seen.mean()(0) / in_seen.cov()(0, 0);
  for (Sector s : {Sector::X, Sector::P}) {
    const auto layout = sector_layout(s);
    const GaussianState& o = outputs[s == Sector::X ? 0 : 3];
    const auto si = static_cast<Eigen::Index>(layout.signal);
    const auto pi = static_cast<Eigen::Index>(layout.probe);
    const double ts = o.mean()(si) * o.mean()(si) / o.cov()(si, si) / snr_input;
    const double tp = o.mean()(pi) * o.mean()(pi) / o.cov()(pi, pi) / snr_input;
    t << fmt::format("{} sector: T_S={:.5f} T_P={:.5f} T_S+T_P={:.5f} ({})\n", to_string(s), ts, tp,
                     ts + tp, ts + tp > 1.0 ? "quantum regime" : "classical regime");
  }
  emit.csv(csv);
  return routing_ok ? 0 : 1;
}

int cmd_conditional(const CommandContext& ctx, std::ostream& out) {
  const auto& c = ctx.config;
  const Circuit gate = build(c);
  const auto grid = c.g_grid();
  const GaussianState simulated = as_seen(simulate(c, gate, vacuum_state(2)).state, c.verification());
  const double R = c.gate.reflectivity;
  const std::array<std::pair<const char*, GaussianState>, 4> families{{
      {"ideal", moments_from_map(ideal_qnd_map(c.gate.gain()))},
      {"finite", moments_from_map(finite_squeezing_map(R, c.gate.r_a(), c.gate.r_b()))},
      {"vacuum_ancilla", moments_from_map(finite_squeezing_map(R, 0.0, 0.0))},
      {"simulated", simulated},
  }};

  Emitter emit(c, out);
  auto& t = emit.text();
  t << scenario_header(c) << '\n';
  std::string csv =
      "sector,g,ideal,ideal_dB,finite,finite_dB,vacuum_ancilla,vacuum_ancilla_dB,simulated,"
      "simulated_dB,line_iv\n";
  for (Sector s : {Sector::X, Sector::P}) {
    t << fmt::format("{} sector ({}):\n", to_string(s),
                     s == Sector::X ? "Var(x1_out - g x2_out)" : "Var(p2_out + g p1_out)");
    for (const auto& [name, state] : families) {
      const auto cv = conditional_variance(state, s);
      t << fmt::format("  {:<16} V_S|P={:.5f} ({:>7} dB) at g_opt={:.5f}  {}\n", name, cv.value,
                       db_text(cv.value), cv.g_opt, cv.value < 1.0 ? "V<1" : "V>=1");
    }
    std::array<std::vector<double>, 4> curves;
    for (std::size_t f = 0; f < 4; ++f) curves[f] = cv_sweep(families[f].second, s, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      csv += fmt::format("{},{:.4f}", to_string(s), grid[k]);
      for (std::size_t f = 0; f < 4; ++f) {
        csv += fmt::format(",{:.8f},{:.6f}", curves[f][k], variance_to_db(curves[f][k]));
      }
      csv += fmt::format(",{:.8f}\n", 2.0 * std::abs(grid[k]));
    }
  }
  t << "entanglement (sum of both sectors below 4|g| at a common g):\n";
  for (const auto& [name, state] : families) {
    const auto d = duan_scan(state, grid);
    t << fmt::format("  {:<16} min(sum - 4|g|)={:+.5f} at g={:.2f} (sum={:.5f}, bound={:.5f}) {}\n",
                     name, d.margin(), d.best_g, d.sum, d.bound,
                     d.certified() ? "ENTANGLED" : "not certified");
  }
  emit.csv(csv);
  return 0;
}

int cmd_reproduce_table(const CommandContext& ctx, std::ostream& out) {
  const auto& c = ctx.config;
  const TableComparison table = reproduce_table(c, ctx.calibrate);

  Emitter emit(c, out);
  auto& t = emit.text();
  ScenarioConfig shown = c;
  shown.imperfections.extra_inloop_loss = table.calibration.extra_inloop_loss;
  t << scenario_header(shown) << '\n';
  if (table.calibrated) {
    t << fmt::format("# fitted extra in-loop loss = {:.3f} (objective {:.4f})\n",
                     table.calibration.extra_inloop_loss, table.calibration.objective);
  }
  t << fmt::format("{:>4} {:>6} {:>6} {:>10} {:>16} {:>8}\n", "G", "quad", "value", "simulated",
                   "reference", "verdict");
  std::string csv = "gain,sector,quantity,simulated,reference,error,band,within_band,gated\n";
  for (const auto& r : table.rows) {
    t << fmt::format("{:>4.1f} {:>6} {:>6} {:>10.4f} {:>9.2f} ± {:.2f} {:>8}\n", r.gain,
                     to_string(r.sector), r.quantity, r.simulated, r.reference, r.error,
                     r.gated ? (r.within_band ? "PASS" : "FAIL") : "(info)");
    csv += fmt::format("{:.1f},{},{},{:.8f},{:.4f},{:.4f},{:.4f},{},{}\n", r.gain, to_string(r.sector),
                       r.quantity, r.simulated, r.reference, r.error, table.band_factor * r.error,
                       r.within_band ? 1 : 0, r.gated ? 1 : 0);
  }
  const bool ok = table.all_within_band();
  t << fmt::format("overall: {} (worst residual {:.3f} of the {:g}x error band)\n", ok ? "PASS" : "FAIL",
                   table.worst_normalized_residual(), table.band_factor);
  emit.csv(csv);
  return ok ? 0 : 1;
}

int cmd_oracle_check(const CommandContext& ctx, std::ostream& out) {
  Emitter emit(ctx.config, out);
  auto& t = emit.text();
  std::string csv = "R,squeezing_dB,max_coefficient_error,max_moment_error,commutators_ok,pass\n";
  bool all = true;
  double worst = 0.0;
  for (double R : {0.1, 0.25, 0.381966, 0.5, 0.75, 1.0}) {
    for (double db : {0.0, -3.0, -5.0, -10.0, -60.0}) {
      GateParams p;
      p.reflectivity = R;
      p.squeezing_db_a = p.squeezing_db_b = db;
      const Circuit gate = build_qnd_gate(p);
      const QuadratureMap oracle = finite_squeezing_map(R, p.r_a(), p.r_b());
      const double coeff_err = circuit_quadrature_map(gate).distance(oracle);
      const GaussianState cov = run_covariance(gate, vacuum_state(2));
      const double moment_err =
          (cov.cov() - moments_from_map(oracle).cov()).cwiseAbs().maxCoeff();
      const bool comm = commutator_check(circuit_quadrature_map(gate)).pass;
      const bool pass = coeff_err <= 1e-9 && comm;
      all = all && pass;
      worst = std::max(worst, coeff_err);
      t << fmt::format("R={:<9g} squeezing={:>4g} dB  coefficient error={:.2e}  moment error={:.2e}  {}\n",
                       R, db, coeff_err, moment_err, pass ? "ok" : "FAIL");
      csv += fmt::format("{},{},{:.3e},{:.3e},{},{}\n", R, db, coeff_err, moment_err, comm ? 1 : 0,
                         pass ? 1 : 0);
    }
  }
  t << fmt::format("oracle check: {} (worst coefficient error {:.2e})\n", all ? "PASS" : "FAIL",
                   worst);
  emit.csv(csv);
  return all ? 0 : 1;
}

}  // namespace qndsim::cli
