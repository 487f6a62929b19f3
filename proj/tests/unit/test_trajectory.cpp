#include <doctest.h>

#include <sstream>

#include "qndsim/trajectory.hpp"

using namespace qndsim;
using doctest::Approx;

namespace {

const Circuit& lossy_gate() {
  static const Circuit gate = build_qnd_gate(GateParams::from_gain(1.0), ImperfectionModel{});
  return gate;
}

}  // namespace

TEST_CASE("ensemble moments agree with covariance propagation") {
  const auto input = tensor(coherent_state(1.0, 0.0), coherent_state(0.0, -2.0));
  const auto analytic = run_covariance(lossy_gate(), input);
  const auto ens = run_ensemble(lossy_gate(), input, 20000, 11);
  CHECK(ens.n_trajectories == 20000);
  CHECK(z_score_report(ens, analytic).max_z < 5.0);

  SUBCASE("a wrong covariance is caught") {
    Matrix inflated = analytic.cov();
    inflated(2, 2) *= 1.1;
    const auto report = z_score_report(ens, GaussianState(analytic.mean(), inflated));
    CHECK(report.max_z > 5.0);
    CHECK(report.worst_entry.find("cov") != std::string::npos);
  }
}

TEST_CASE("standard errors shrink as 1/sqrt(n)") {
  const auto a = run_ensemble(lossy_gate(), vacuum_state(2), 4000, 3);
  const auto b = run_ensemble(lossy_gate(), vacuum_state(2), 16000, 3);
  const double ratio = a.se_mean(0) / b.se_mean(0);
  CHECK(ratio == Approx(2.0).epsilon(0.05));
  CHECK(a.se_cov(0, 0) / b.se_cov(0, 0) == Approx(2.0).epsilon(0.05));
}

TEST_CASE("results are bit-identical across thread counts") {
  EnsembleOptions one{1, true};
  EnsembleOptions many{4, true};
  const auto a = run_ensemble(lossy_gate(), vacuum_state(2), 3001, 99, one);
  const auto b = run_ensemble(lossy_gate(), vacuum_state(2), 3001, 99, many);
  CHECK(a.mean == b.mean);
  CHECK(a.cov == b.cov);
  CHECK(a.outcomes == b.outcomes);
  CHECK(a.outcomes.size() == 3001);
  CHECK(a.outcomes[0].size() == 2);

  const auto c = run_ensemble(lossy_gate(), vacuum_state(2), 3001, 100, one);
  CHECK(a.mean != c.mean);
}

TEST_CASE("smallest ensemble") {
  const auto e = run_ensemble(lossy_gate(), vacuum_state(2), 2, 1);
  CHECK(e.n_trajectories == 2);
  CHECK(e.cov.allFinite());
  CHECK_THROWS(run_ensemble(lossy_gate(), vacuum_state(2), 1, 1));
}

TEST_CASE("outcome CSV") {
  const auto e = run_ensemble(lossy_gate(), vacuum_state(2), 3, 1, {1, true});
  std::ostringstream os;
  write_outcome_csv(os, e);
  const std::string text = os.str();
  CHECK(text.rfind("trajectory,", 0) == 0);
  int lines = 0;
  for (char ch : text) lines += ch == '\n';
  CHECK(lines == 4);
}
