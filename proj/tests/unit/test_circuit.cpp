#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qndsim/circuit.hpp"
#include "qndsim/metrics.hpp"

using namespace qndsim;
using doctest::Approx;

TEST_CASE("gain and reflectivity are inverse") {
  for (double g : {0.0, 0.3, 1.0, 1.5, 4.0, 100.0}) {
    const double R = reflectivity_from_gain(g);
    CHECK(R > 0.0);
    CHECK(R <= 1.0);
    CHECK(gain_from_reflectivity(R) == Approx(g).epsilon(1e-12));
  }
  CHECK(reflectivity_from_gain(1.5) == Approx(0.25));
  CHECK(reflectivity_from_gain(1.0) == Approx(0.381966).epsilon(1e-6));
  CHECK_THROWS_AS(reflectivity_from_gain(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(gain_from_reflectivity(0.0), std::invalid_argument);
  CHECK_THROWS_AS(gain_from_reflectivity(1.1), std::invalid_argument);
}

TEST_CASE("gate reflectivities") {
  const auto p = GateParams::from_gain(1.5);
  const auto r = p.reflectivities();
  CHECK(r[0] == Approx(0.8));
  CHECK(r[1] == Approx(0.25));
  CHECK(r[3] == Approx(0.2));
}

TEST_CASE("lossless compilation matches the closed-form map") {
  for (double R : {0.1, 0.25, 0.5, 0.9}) {
    for (double db : {0.0, -5.0, -12.0}) {
      GateParams p;
      p.reflectivity = R;
      p.squeezing_db_a = p.squeezing_db_b = db;
      const auto compiled = circuit_quadrature_map(build_qnd_gate(p));
      CHECK(compiled.distance(finite_squeezing_map(R, p.r_a(), p.r_b())) < 1e-12);
    }
  }
}

TEST_CASE("R = 1 is the identity with no ancillas") {
  const auto gate = build_qnd_gate(GateParams{});
  CHECK(gate.n_outputs() == 2);
  for (const auto& e : gate.elements()) {
    CHECK_FALSE(std::holds_alternative<AncillaInjection>(e));
    CHECK_FALSE(std::holds_alternative<HomodyneFeedforward>(e));
  }
  const auto in = tensor(coherent_state(1.0, 2.0), coherent_state(-3.0, 0.5));
  const auto out = run_covariance(gate, in);
  CHECK((out.mean() - in.mean()).norm() < 1e-12);
  CHECK((out.cov() - in.cov()).norm() < 1e-12);
}

TEST_CASE("vacuum ancillas at R = 1/4 give Var x2 = 3.40") {
  GateParams p;
  p.reflectivity = 0.25;
  p.squeezing_db_a = p.squeezing_db_b = 0.0;
  const auto out = run_covariance(build_qnd_gate(p), vacuum_state(2));
  // 1 + G^2 + R(1 - R)/(1 + R)
  CHECK(out.variance(1, Quadrature::X) == Approx(1.0 + 2.25 + 0.25 * 0.75 / 1.25));
  CHECK(out.variance(1, Quadrature::X) == Approx(3.40));
}

TEST_CASE("covariance route agrees with the Heisenberg route") {
  const auto gate = build_qnd_gate(GateParams::from_gain(1.2, -7.0, -3.0), ImperfectionModel{});
  const auto heis = moments_from_exprs(heisenberg_outputs(gate));
  const auto cov = run_covariance(gate, vacuum_state(2));
  CHECK((heis.cov() - cov.cov()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("coherent displacement is routed with the gain") {
  const auto gate = build_qnd_gate(GateParams::from_gain(1.5));
  const auto out = run_covariance(gate, tensor(coherent_state(2.0, 0.0), coherent_state(0.0, 1.0)));
  CHECK(out.mean_of(0, Quadrature::X) == Approx(2.0));
  CHECK(out.mean_of(1, Quadrature::X) == Approx(3.0));
  CHECK(out.mean_of(0, Quadrature::P) == Approx(-1.5));
  CHECK(out.mean_of(1, Quadrature::P) == Approx(1.0));
}

TEST_CASE("feedforward gain error shows up in the realized gain") {
  ImperfectionModel imp = ImperfectionModel::none();
  imp.feedforward_gain_error = 0.1;
  const auto gate = build_qnd_gate(GateParams::from_gain(1.0), imp);
  const auto m = circuit_quadrature_map(gate);
  CHECK(std::abs(m.x2().coefficient("x1_in") - 1.0) > 1e-3);
  CHECK(commutator_check(heisenberg_outputs(gate)).pass);
}

TEST_CASE("each imperfection only raises the conditional variance") {
  const auto params = GateParams::from_gain(1.0);
  const auto v_sp = [&](const ImperfectionModel& imp) {
    const auto out = run_covariance(build_qnd_gate(params, imp), vacuum_state(2));
    return conditional_variance(out, Sector::X).value;
  };
  ImperfectionModel imp = ImperfectionModel::none();
  double previous = v_sp(imp);
  CHECK(previous == Approx(0.73595).epsilon(1e-4));

  // Loss ahead of the gate leaves vacuum inputs untouched but costs transfer.
  imp.propagation_loss = 0.07;
  double v = v_sp(imp);
  CHECK(v == Approx(previous));
  const auto t_loss = transfer_coefficients(build_qnd_gate(params, imp), Sector::X, 10.0);
  const auto t_none =
      transfer_coefficients(build_qnd_gate(params, ImperfectionModel::none()), Sector::X, 10.0);
  CHECK(t_loss.sum() < t_none.sum());

  imp.detector_quantum_efficiency = 0.99;
  imp.visibility = 0.98;
  v = v_sp(imp);
  CHECK(v > previous);
  previous = v;

  imp.dark_noise_db_below_shot = 17.0;
  v = v_sp(imp);
  CHECK(v > previous);
  previous = v;

  imp.coupler_loss_enabled = true;
  imp.displacement_coupler_loss = 0.01;
  v = v_sp(imp);
  CHECK(v > previous);
  previous = v;

  imp.extra_inloop_loss = 0.05;
  CHECK(v_sp(imp) > previous);

  for (auto placement : {LossPlacement::PostExit, LossPlacement::Distributed}) {
    ImperfectionModel only_loss = ImperfectionModel::none();
    only_loss.propagation_loss = 0.07;
    only_loss.loss_placement = placement;
    CHECK(v_sp(only_loss) > 0.73595);
  }
}

TEST_CASE("every intermediate state is physical") {
  const auto gate = build_qnd_gate(GateParams::from_gain(1.5, -10.0, -10.0), ImperfectionModel{});
  int states = 0;
  double worst = 1.0;
  ExecutionObserver obs;
  obs.on_state = [&](const GaussianState& s) {
    ++states;
    worst = std::min(worst, min_uncertainty_eigenvalue(s));
  };
  obs.on_symplectic = [&](const SymplecticMatrix& s) { CHECK(s.symplectic_error() < 1e-12); };
  run_covariance(gate, vacuum_state(2), &obs);
  CHECK(states > 5);
  CHECK(worst > -1e-9);
}

TEST_CASE("trajectories are reproducible for a fixed stream") {
  const auto gate = build_qnd_gate(GateParams::from_gain(1.0), ImperfectionModel{});
  NormalSource a(5);
  NormalSource b(5);
  const auto ra = run_trajectory(gate, vacuum_state(2), a);
  const auto rb = run_trajectory(gate, vacuum_state(2), b);
  CHECK(ra.outcomes.size() == 2);
  CHECK(ra.outcomes == rb.outcomes);
  CHECK(ra.state.mean() == rb.state.mean());
  // Conditional covariance does not depend on the readouts.
  NormalSource c(6);
  const auto rc = run_trajectory(gate, vacuum_state(2), c);
  CHECK(rc.outcomes != ra.outcomes);
  CHECK((ra.state.cov() - rc.state.cov()).cwiseAbs().maxCoeff() < 1e-12);
  // Feedforward displacement spread makes the averaged covariance larger.
  const auto averaged = run_covariance(gate, vacuum_state(2));
  CHECK((averaged.cov() - ra.state.cov()).trace() > 0.0);
}

TEST_CASE("a circuit without measurements is deterministic") {
  Circuit c(2);
  c.push(BeamSplitter{0, 1, 0.5, {}});
  c.push(Loss{0, 0.8});
  NormalSource rng(1);
  const auto t = run_trajectory(c, tensor(coherent_state(1, 0), vacuum_state(1)), rng);
  CHECK(t.outcomes.empty());
  CHECK(t.state.mean_of(0, Quadrature::X) == Approx(std::sqrt(0.8) * std::sqrt(0.5)));
}

TEST_CASE("circuit JSON round trip") {
  const auto gate = build_qnd_gate(GateParams::from_gain(1.5), ImperfectionModel{});
  const auto doc = circuit_to_json(gate);
  const auto back = circuit_from_json(doc);
  CHECK(circuit_to_json(back) == doc);
  const auto a = run_covariance(gate, vacuum_state(2));
  const auto b = run_covariance(back, vacuum_state(2));
  CHECK(a.cov() == b.cov());
}

TEST_CASE("circuit JSON golden document") {
  Circuit c(1);
  c.push(AncillaInjection{"A", 0.5, 0.0, 1.0});
  c.push(BeamSplitter{0, 1, 0.25, {1, 1, -1, -1}});
  c.push(HomodyneFeedforward{0, 0.0, 1, Quadrature::P, 2.0, 1.0, 0.0});
  c.push(Displacement{0, 1.0, 0.0});
  const auto expected = nlohmann::json::parse(R"({
    "n_inputs": 1,
    "elements": [
      {"type": "ancilla", "label": "A", "r": 0.5, "angle": 0.0, "anti_squeeze_excess": 1.0},
      {"type": "beam_splitter", "i": 0, "j": 1, "reflectivity": 0.25, "signs": [1, 1, -1, -1]},
      {"type": "homodyne_feedforward", "measured": 0, "angle": 0.0, "target": 1,
       "target_quadrature": "p", "gain": 2.0, "efficiency": 1.0, "dark_variance": 0.0},
      {"type": "displacement", "mode": 0, "dx": 1.0, "dp": 0.0}
    ]})");
  CHECK(circuit_to_json(c) == expected);
  CHECK(c.n_outputs() == 1);
}

TEST_CASE("invalid circuits are rejected") {
  Circuit c(2);
  c.push(BeamSplitter{0, 2, 0.5, {}});
  CHECK_THROWS(c.validate());

  Circuit same(2);
  same.push(BeamSplitter{1, 1, 0.5, {}});
  CHECK_THROWS(same.validate());

  Circuit lossy(1);
  lossy.push(Loss{0, 0.0});
  CHECK_THROWS(lossy.validate());

  CHECK_THROWS(circuit_from_json(nlohmann::json::parse(R"({"n_inputs": 1, "elements": [{"type": "mirror"}]})")));
  GateParams bad;
  bad.reflectivity = 0.0;
  CHECK_THROWS(build_qnd_gate(bad));
}
