#include "qndsim/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qndsim {

std::string to_string(Sector sector) { return sector == Sector::X ? "x" : "p"; }

SectorLayout sector_layout(Sector sector) {
  if (sector == Sector::X) {
    return {quad_index(0, Quadrature::X), quad_index(1, Quadrature::X), -1.0};
  }
  return {quad_index(1, Quadrature::P), quad_index(0, Quadrature::P), +1.0};
}

GaussianState as_seen(const GaussianState& state, const VerificationDetectors& detectors) {
  if (!detectors.as_measured || detectors.efficiency == 1.0) {
    return state;
  }
  GaussianState s = state;
  for (std::size_t m = 0; m < s.n_modes(); ++m) {
    s = loss_channel(s, m, detectors.efficiency);
  }
  return s;
}

namespace {

void require_two_modes(const GaussianState& s) {
  if (s.n_modes() != 2) {
    throw std::invalid_argument("QND metrics need a two-mode output state");
  }
}

double snr(double mean, double variance) {
  if (!(variance > 0.0)) {
    throw std::domain_error("zero output variance is unphysical");
  }
  return mean * mean / variance;
}

}  // namespace

TransferCoefficients transfer_coefficients(const Circuit& gate, Sector sector,
                                           double probe_amplitude,
                                           const VerificationDetectors& detectors) {
  if (!(probe_amplitude > 0.0) || !std::isfinite(probe_amplitude)) {
    throw std::invalid_argument("probe amplitude must be positive");
  }
  const auto layout = sector_layout(sector);
  Vector mean = Vector::Zero(4);
  mean(static_cast<Eigen::Index>(layout.signal)) = probe_amplitude;
  const GaussianState input(mean, Matrix::Identity(4, 4));
  const GaussianState in_seen = as_seen(input, detectors);
  const GaussianState out = as_seen(run_covariance(gate, input), detectors);
  require_two_modes(out);

  const auto s = static_cast<Eigen::Index>(layout.signal);
  const auto p = static_cast<Eigen::Index>(layout.probe);
  const double snr_in = snr(in_seen.mean()(s), in_seen.cov()(s, s));
  return {snr(out.mean()(s), out.cov()(s, s)) / snr_in, snr(out.mean()(p), out.cov()(p, p)) / snr_in};
}

ConditionalVariance conditional_variance(const GaussianState& output, Sector sector) {
  require_two_modes(output);
  const auto layout = sector_layout(sector);
  const auto s = static_cast<Eigen::Index>(layout.signal);
  const auto p = static_cast<Eigen::Index>(layout.probe);
  const double vs = output.cov()(s, s);
  const double vp = output.cov()(p, p);
  const double c = output.cov()(s, p);
  if (vp <= 0.0) {
    return {vs, 0.0};
  }
  // d/dg [vs + 2 sign g c + g^2 vp] = 0
  return {vs - c * c / vp, -layout.sign * c / vp};
}

double combined_variance(const GaussianState& output, Sector sector, double g) {
  require_two_modes(output);
  const auto layout = sector_layout(sector);
  const auto s = static_cast<Eigen::Index>(layout.signal);
  const auto p = static_cast<Eigen::Index>(layout.probe);
  const double k = layout.sign * g;
  return output.cov()(s, s) + 2.0 * k * output.cov()(s, p) + k * k * output.cov()(p, p);
}

std::vector<double> cv_sweep(const GaussianState& output, Sector sector,
                             std::span<const double> g_grid) {
  std::vector<double> out;
  out.reserve(g_grid.size());
  for (double g : g_grid) {
    out.push_back(combined_variance(output, sector, g));
  }
  return out;
}

std::vector<double> make_grid(double min, double max, double step) {
  if (!(step > 0.0) || !std::isfinite(min) || !std::isfinite(max) || max < min) {
    throw std::invalid_argument("grid needs finite bounds with max >= min and step > 0");
  }
  const auto n = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
  std::vector<double> grid(n);
  for (std::size_t k = 0; k < n; ++k) {
    grid[k] = min + static_cast<double>(k) * step;
  }
  return grid;
}

std::vector<double> default_g_grid() { return make_grid(-2.0, 2.0, 0.01); }

ReferenceCurves reference_sweeps(const GateParams& params, Sector sector,
                                 std::span<const double> g_grid) {
  params.validate();
  const double R = params.reflectivity;
  return {cv_sweep(moments_from_map(ideal_qnd_map(params.gain())), sector, g_grid),
          cv_sweep(moments_from_map(finite_squeezing_map(R, params.r_a(), params.r_b())), sector, g_grid),
          cv_sweep(moments_from_map(finite_squeezing_map(R, 0.0, 0.0)), sector, g_grid)};
}

DuanResult duan_simon(const GaussianState& output, double g) {
  const double sum = combined_variance(output, Sector::X, g) + combined_variance(output, Sector::P, g);
  const double bound = 4.0 * std::abs(g);
  return {sum, bound, sum < bound};
}

DuanScan duan_scan(const GaussianState& output, std::span<const double> g_grid) {
  if (g_grid.empty()) {
    throw std::invalid_argument("empty g grid");
  }
  DuanScan best;
  bool first = true;
  for (double g : g_grid) {
    const auto d = duan_simon(output, g);
    if (first || d.sum - d.bound < best.margin()) {
      best = {g, d.sum, d.bound};
      first = false;
    }
  }
  return best;
}

QndReport evaluate_gate(const Circuit& gate, const VerificationDetectors& detectors,
                        std::span<const double> g_grid, double probe_amplitude) {
  const std::vector<double> fallback = g_grid.empty() ? default_g_grid() : std::vector<double>{};
  const std::span<const double> grid = g_grid.empty() ? std::span<const double>(fallback) : g_grid;

  const GaussianState out = as_seen(run_covariance(gate, vacuum_state(2)), detectors);
  QndReport report;
  for (Sector s : {Sector::X, Sector::P}) {
    const auto t = transfer_coefficients(gate, s, probe_amplitude, detectors);
    const auto cv = conditional_variance(out, s);
    SectorReport& r = s == Sector::X ? report.x : report.p;
    r = {s, t.signal, t.probe, cv.value, cv.g_opt};
  }
  report.duan = duan_scan(out, grid);
  return report;
}

nlohmann::json report_to_json(const QndReport& report) {
  nlohmann::json doc;
  for (const SectorReport* r : {&report.x, &report.p}) {
    doc["sectors"][to_string(r->sector)] = {{"T_S", r->t_signal},
                                           {"T_P", r->t_probe},
                                           {"T_sum", r->t_sum()},
                                           {"V_SP", r->v_sp},
                                           {"g_opt", r->g_opt},
                                           {"qnd_criteria_pass", r->qnd_criteria_pass()}};
  }
  doc["duan"] = {{"g", report.duan.best_g},
                 {"sum", report.duan.sum},
                 {"bound", report.duan.bound},
                 {"entangled", report.entangled()}};
  return doc;
}

std::string report_csv_header() {
  return "sector,T_S,T_P,T_sum,V_SP,g_opt,duan_sum_min,bound,qnd_pass,entangled";
}

std::string report_csv_rows(const QndReport& report) {
  std::string out;
  char buf[256];
  for (const SectorReport* r : {&report.x, &report.p}) {
    std::snprintf(buf, sizeof buf, "%s%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%d,%d",
                  out.empty() ? "" : "\n", to_string(r->sector).c_str(), r->t_signal, r->t_probe,
                  r->t_sum(), r->v_sp, r->g_opt, report.duan.sum, report.duan.bound,
                  r->qnd_criteria_pass() ? 1 : 0, report.entangled() ? 1 : 0);
    out += buf;
  }
  return out;
}

std::array<double, 4> VarianceRow::db() const {
  std::array<double, 4> out{};
  for (std::size_t k = 0; k < 4; ++k) {
    out[k] = variance_to_db(variance[k]);
  }
  return out;
}

std::vector<const VarianceRow*> VacuumNoiseReport::rows() const {
  return {&input, &infinite_squeezing, &finite_squeezing, &vacuum_ancillas, &simulated};
}

namespace {

VarianceRow diag_row(std::string name, const GaussianState& s) {
  require_two_modes(s);
  VarianceRow row{std::move(name), {}};
  for (std::size_t k = 0; k < 4; ++k) {
    row.variance[k] = s.cov()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  }
  return row;
}

}  // namespace

VacuumNoiseReport vacuum_noise_report(const Circuit& gate, const GateParams& params) {
  params.validate();
  const double R = params.reflectivity;
  return {diag_row("input", vacuum_state(2)),
          diag_row("simulated", run_covariance(gate, vacuum_state(2))),
          diag_row("infinite_squeezing", moments_from_map(ideal_qnd_map(params.gain()))),
          diag_row("finite_squeezing",
                   moments_from_map(finite_squeezing_map(R, params.r_a(), params.r_b()))),
          diag_row("vacuum_ancillas", moments_from_map(finite_squeezing_map(R, 0.0, 0.0)))};
}

}  // namespace qndsim
