#include <doctest.h>

#include <cmath>
#include <limits>

#include "qndsim/metrics.hpp"

using namespace qndsim;
using doctest::Approx;

namespace {

GaussianState lossless_output(double gain, double db) {
  return run_covariance(build_qnd_gate(GateParams::from_gain(gain, db, db)), vacuum_state(2));
}

// Golden-section search on the combination variance; independent of the closed form.
double brute_min(const GaussianState& out, Sector sector) {
  double a = -10.0;
  double b = 10.0;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int k = 0; k < 200; ++k) {
    const double c = b - phi * (b - a);
    const double d = a + phi * (b - a);
    if (combined_variance(out, sector, c) < combined_variance(out, sector, d)) {
      b = d;
    } else {
      a = c;
    }
  }
  return combined_variance(out, sector, 0.5 * (a + b));
}

}  // namespace

TEST_CASE("lossless unity gain at -5 dB") {
  const auto gate = build_qnd_gate(GateParams::from_gain(1.0));
  const auto report = evaluate_gate(gate);
  CHECK(report.x.t_signal == Approx(0.87611).epsilon(1e-5));
  CHECK(report.x.t_probe == Approx(0.48685).epsilon(1e-5));
  CHECK(report.x.v_sp == Approx(0.73595).epsilon(1e-5));
  CHECK(report.x.g_opt == Approx(0.44430).epsilon(1e-4));
  CHECK(report.x.qnd_criteria_pass());

  // Analytic oracle: T_S = 1 / Var(x1_out), T_P = G^2 / Var(x2_out) in shot-noise units.
  const auto out = lossless_output(1.0, -5.0);
  CHECK(report.x.t_signal == Approx(1.0 / out.variance(0, Quadrature::X)));
  CHECK(report.x.t_probe == Approx(1.0 / out.variance(1, Quadrature::X)));
}

TEST_CASE("lossless G = 1.5 at -5 dB") {
  const auto out = lossless_output(1.5, -5.0);
  CHECK(conditional_variance(out, Sector::X).value == Approx(0.59097).epsilon(1e-5));
}

TEST_CASE("vacuum ancillas") {
  const auto out = lossless_output(1.0, 0.0);
  const auto gate = build_qnd_gate(GateParams::from_gain(1.0, 0.0, 0.0));
  const auto t = transfer_coefficients(gate, Sector::X, 10.0);
  CHECK(t.signal == Approx(0.69098).epsilon(1e-5));
  CHECK(t.probe == Approx(0.46066).epsilon(1e-5));
  CHECK(t.sum() > 1.0);
  CHECK(conditional_variance(out, Sector::X).value == Approx(1.20601).epsilon(1e-5));
  CHECK_FALSE(duan_scan(out, default_g_grid()).certified());
}

TEST_CASE("closed form agrees with brute-force minimization") {
  for (double gain : {0.5, 1.0, 1.5}) {
    for (double db : {0.0, -3.0, -9.0}) {
      const auto out = run_covariance(build_qnd_gate(GateParams::from_gain(gain, db, db), ImperfectionModel{}),
                                      vacuum_state(2));
      for (Sector s : {Sector::X, Sector::P}) {
        const auto cv = conditional_variance(out, s);
        CHECK(cv.value == Approx(brute_min(out, s)).epsilon(1e-9));
        CHECK(combined_variance(out, s, cv.g_opt) == Approx(cv.value).epsilon(1e-12));
        const auto grid = make_grid(-2.0, 2.0, 0.01);
        const auto sweep = cv_sweep(out, s, grid);
        double lowest = std::numeric_limits<double>::infinity();
        for (double v : sweep) lowest = std::min(lowest, v);
        CHECK(lowest >= cv.value - 1e-12);
        CHECK(lowest - cv.value < 1e-3);
      }
    }
  }
}

TEST_CASE("transfer coefficients do not depend on the probe amplitude") {
  const auto gate = build_qnd_gate(GateParams::from_gain(1.2), ImperfectionModel{});
  const auto ref = transfer_coefficients(gate, Sector::P, 10.0);
  for (double a : {0.5, 3.0, 50.0}) {
    const auto t = transfer_coefficients(gate, Sector::P, a);
    CHECK(t.signal == Approx(ref.signal).epsilon(1e-10));
    CHECK(t.probe == Approx(ref.probe).epsilon(1e-10));
  }
  CHECK_THROWS(transfer_coefficients(gate, Sector::X, 0.0));
}

TEST_CASE("more squeezing lowers V_SP monotonically") {
  double previous = std::numeric_limits<double>::infinity();
  for (double db = 0.0; db >= -60.0; db -= 2.0) {
    const double v = conditional_variance(lossless_output(1.0, db), Sector::X).value;
    CHECK(v < previous);
    previous = v;
  }
  // Approaches the infinite-squeezing value 0.5 at unity gain.
  CHECK(previous == Approx(0.5).epsilon(1e-6));
}

TEST_CASE("lossless sectors are symmetric") {
  const auto gate = build_qnd_gate(GateParams::from_gain(1.5));
  const auto r = evaluate_gate(gate);
  CHECK(r.x.v_sp == Approx(r.p.v_sp));
  CHECK(r.x.t_signal == Approx(r.p.t_signal));
  CHECK(r.x.t_probe == Approx(r.p.t_probe));
  CHECK(r.x.g_opt == Approx(r.p.g_opt));
}

TEST_CASE("Duan criterion") {
  const auto out = lossless_output(1.0, -5.0);
  const auto d = duan_simon(out, 0.4443);
  CHECK(d.sum == Approx(1.472).epsilon(1e-3));
  CHECK(d.bound == Approx(1.7772).epsilon(1e-4));
  CHECK(d.entangled);
  // The bound uses |g|; the wrong sign of g never certifies.
  CHECK_FALSE(duan_simon(out, -0.4443).entangled);
  CHECK_FALSE(duan_simon(vacuum_state(2), 0.5).entangled);
  const auto scan = duan_scan(out, default_g_grid());
  CHECK(scan.certified());
  CHECK(scan.best_g > 0.0);
}

TEST_CASE("as-measured detectors") {
  const auto gate = build_qnd_gate(GateParams::from_gain(1.0), ImperfectionModel{});
  const VerificationDetectors det{true, 0.9508};
  const auto seen = evaluate_gate(gate, det);
  const auto raw = evaluate_gate(gate);
  CHECK(seen.x.v_sp > raw.x.v_sp);
  CHECK(as_seen(vacuum_state(2), det).cov().isIdentity(1e-12));
}

TEST_CASE("vacuum noise report") {
  const auto params = GateParams::from_gain(1.0);
  const auto rep = vacuum_noise_report(build_qnd_gate(params), params);
  CHECK(rep.input.variance[0] == Approx(1.0));
  CHECK(rep.simulated.variance[0] == Approx(1.14142).epsilon(1e-5));
  CHECK(rep.simulated.variance[2] == Approx(2.05402).epsilon(1e-5));
  CHECK(rep.infinite_squeezing.variance[2] == Approx(2.0));
  CHECK(rep.finite_squeezing.variance[2] == Approx(rep.simulated.variance[2]));
  CHECK(rep.vacuum_ancillas.variance[0] == Approx(1.44721).epsilon(1e-5));
  CHECK(rep.vacuum_ancillas.variance[2] == Approx(2.17082).epsilon(1e-5));
  CHECK(rep.input.db()[0] == Approx(0.0));
  CHECK(rep.rows().size() == 5);
}

TEST_CASE("report serialization") {
  const auto r = evaluate_gate(build_qnd_gate(GateParams::from_gain(1.0)));
  const auto doc = report_to_json(r);
  CHECK(doc["sectors"]["x"]["V_SP"].get<double>() == Approx(r.x.v_sp));
  CHECK(doc["duan"]["entangled"].get<bool>());
  CHECK(report_csv_header().rfind("sector,", 0) == 0);
  const auto rows = report_csv_rows(r);
  CHECK(rows.find('\n') != std::string::npos);
  CHECK(rows.back() != '\n');
}

TEST_CASE("grids") {
  const auto g = make_grid(-2.0, 2.0, 0.01);
  CHECK(g.size() == 401);
  CHECK(g.back() == Approx(2.0));
  CHECK_THROWS(make_grid(1.0, 0.0, 0.1));
  CHECK_THROWS(make_grid(0.0, 1.0, 0.0));
}
