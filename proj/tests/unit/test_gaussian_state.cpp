#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qndsim/gaussian_state.hpp"

using namespace qndsim;
using doctest::Approx;

namespace {

Matrix omega2() {
  Matrix w(2, 2);
  w << 0, 1, -1, 0;
  return w;
}

}  // namespace

TEST_CASE("decibel conversions") {
  CHECK(db_to_variance(0.0) == Approx(1.0));
  CHECK(db_to_variance(-10.0) == Approx(0.1));
  CHECK(variance_to_db(2.0) == Approx(3.0103).epsilon(1e-4));
  CHECK(std::exp(-2.0 * squeeze_parameter_from_db(-5.0)) == Approx(std::pow(10.0, -0.5)));
}

TEST_CASE("vacuum saturates the uncertainty relation") {
  const auto v = vacuum_state(3);
  CHECK(v.cov().isIdentity(0.0));
  CHECK(std::abs(min_uncertainty_eigenvalue(v)) < 1e-12);
  CHECK(is_physical(v));
}

TEST_CASE("squeezed vacuum variances") {
  const double r = squeeze_parameter_from_db(-5.0);
  const auto sx = squeezed_vacuum(r, 0.0);
  CHECK(sx.variance(0, Quadrature::X) == Approx(0.316228).epsilon(1e-5));
  CHECK(sx.variance(0, Quadrature::P) == Approx(3.162278).epsilon(1e-5));
  const auto sp = squeezed_vacuum(r, std::numbers::pi / 2);
  CHECK(sp.variance(0, Quadrature::P) == Approx(0.316228).epsilon(1e-5));
  CHECK(std::abs(sp.cov()(0, 1)) < 1e-12);
  CHECK(std::abs(min_uncertainty_eigenvalue(sx)) < 1e-12);

  const auto mixed = squeezed_vacuum(r, 0.0, 1.5);
  CHECK(mixed.variance(0, Quadrature::P) == Approx(1.5 * 3.162278).epsilon(1e-5));
  CHECK(min_uncertainty_eigenvalue(mixed) > 1e-3);
}

TEST_CASE("loss channel on squeezed light") {
  const auto s = squeezed_vacuum(squeeze_parameter_from_db(-5.0), 0.0);
  const auto l = loss_channel(s, 0, 0.93);
  CHECK(l.variance(0, Quadrature::X) == Approx(0.93 * 0.316228 + 0.07).epsilon(1e-5));
  CHECK(l.variance(0, Quadrature::X) == Approx(0.36410).epsilon(1e-4));
  CHECK_THROWS_AS(loss_channel(s, 0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(loss_channel(s, 0, 1.2), std::invalid_argument);
  CHECK(loss_channel(s, 0, 1.0).cov().isApprox(s.cov()));
}

TEST_CASE("symplectic generators") {
  const auto bs = beam_splitter_matrix(2, 0, 1, 0.3);
  CHECK(bs.symplectic_error() < 1e-14);
  const auto rot = rotation_matrix(2, 1, 0.7);
  CHECK(rot.symplectic_error() < 1e-14);
  const auto sq = squeezer_matrix(2, 0, 0.9, 0.4);
  CHECK(sq.symplectic_error() < 1e-13);
  CHECK((bs * rot * sq).symplectic_error() < 1e-13);

  // Rotation convention.
  const auto c = apply(rotation_matrix(1, 0, std::numbers::pi / 2), coherent_state(1.0, 0.0));
  CHECK(c.mean_of(0, Quadrature::X) == Approx(0.0).epsilon(1e-12));
  CHECK(c.mean_of(0, Quadrature::P) == Approx(-1.0));

  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 0) = 2.0;
  CHECK_THROWS_AS(SymplecticMatrix{bad}, std::invalid_argument);

  BeamSplitterSigns non_orthogonal{1, 1, 1, -1};
  CHECK_THROWS(beam_splitter_matrix(2, 0, 1, 0.5, non_orthogonal));
}

TEST_CASE("beam splitter mixes coherent amplitudes") {
  auto s = tensor(coherent_state(2.0, 0.0), coherent_state(0.0, 0.0));
  s = beam_splitter(s, 0, 1, 0.25);
  CHECK(s.mean_of(0, Quadrature::X) == Approx(2.0 * std::sqrt(0.75)));
  CHECK(s.mean_of(1, Quadrature::X) == Approx(-2.0 * 0.5));
  CHECK(s.cov().isIdentity(1e-12));
}

TEST_CASE("conditioning an EPR pair") {
  const double r = squeeze_parameter_from_db(-10.0);
  auto s = tensor(squeezed_vacuum(r, 0.0), squeezed_vacuum(r, std::numbers::pi / 2));
  s = beam_splitter(s, 0, 1, 0.5);
  // Oracle: Var(x_b | x_a) = Vb - C^2 / Va.
  const double va = s.cov()(0, 0);
  const double vb = s.cov()(2, 2);
  const double c = s.cov()(0, 2);
  const auto cond = condition_on_x(s, 0, 0.8);
  CHECK(cond.n_modes() == 1);
  CHECK(cond.variance(0, Quadrature::X) == Approx(vb - c * c / va));
  CHECK(cond.variance(0, Quadrature::X) < 1.0);
  CHECK(cond.mean_of(0, Quadrature::X) == Approx(c / va * 0.8));

  // Reduced covariance does not depend on the readout.
  const auto cond2 = condition_on_x(s, 0, -3.0);
  CHECK((cond.cov() - cond2.cov()).cwiseAbs().maxCoeff() < 1e-14);

  // Dark noise adds to the readout variance.
  const auto noisy = condition_on_x(s, 0, 0.8, 0.5);
  CHECK(noisy.variance(0, Quadrature::X) == Approx(vb - c * c / (va + 0.5)));
  CHECK_THROWS(condition_on_x(vacuum_state(1), 0, 0.0));
}

TEST_CASE("homodyne outcomes average to the prior mean") {
  auto s = tensor(coherent_state(1.5, -0.5), squeezed_vacuum(0.4, 0.0));
  s = beam_splitter(s, 0, 1, 0.4);
  const double angle = 0.3;
  const double expected = s.mean_of(0, Quadrature::X) * std::cos(angle) +
                          s.mean_of(0, Quadrature::P) * std::sin(angle);
  NormalSource rng(42);
  constexpr int n = 20000;
  double sum = 0.0;
  double sum_sq = 0.0;
  Vector post = Vector::Zero(2);
  for (int k = 0; k < n; ++k) {
    const auto out = homodyne(s, 0, angle, rng, {0.9, 0.05});
    sum += out.value;
    sum_sq += out.value * out.value;
    post += out.reduced_state.mean();
    CHECK(out.reduced_state.n_modes() == 1);
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  // Readout variance: efficiency-scaled quadrature variance + loss vacuum + dark.
  const double vq = s.cov()(0, 0) * std::cos(angle) * std::cos(angle) +
                    2 * s.cov()(0, 1) * std::cos(angle) * std::sin(angle) +
                    s.cov()(1, 1) * std::sin(angle) * std::sin(angle);
  const double expected_var = 0.9 * vq + 0.1 + 0.05;
  CHECK(mean == Approx(std::sqrt(0.9) * expected).epsilon(5 * std::sqrt(expected_var / n)));
  CHECK(var == Approx(expected_var).epsilon(0.05));
  // Law of total expectation on the unmeasured mode.
  CHECK((post / n - s.reduced(std::array<std::size_t, 1>{1}).mean()).norm() < 0.05);
}

TEST_CASE("state validation") {
  Matrix asym = Matrix::Identity(2, 2);
  asym(0, 1) = 0.1;
  CHECK_THROWS_AS(GaussianState(Vector::Zero(2), asym), std::invalid_argument);
  CHECK_THROWS_AS(GaussianState(Vector::Zero(3), Matrix::Identity(3, 3)), std::invalid_argument);
  Matrix nan_cov = Matrix::Identity(2, 2);
  nan_cov(1, 1) = std::nan("");
  CHECK_THROWS_AS(GaussianState(Vector::Zero(2), nan_cov), std::invalid_argument);

  // Sub-vacuum in both quadratures is unphysical.
  GaussianState bad(Vector::Zero(2), Matrix::Identity(2, 2) * 0.5);
  CHECK_FALSE(is_physical(bad));
  CHECK(min_uncertainty_eigenvalue(bad) == Approx(-0.5));
  CHECK(omega2().isApprox(symplectic_form(1)));
}

TEST_CASE("reduced and tensor states") {
  const auto s = tensor(coherent_state(1, 2), coherent_state(3, 4));
  const std::array<std::size_t, 1> second{1};
  const auto r = s.reduced(second);
  CHECK(r.mean_of(0, Quadrature::X) == Approx(3.0));
  CHECK(r.mean_of(0, Quadrature::P) == Approx(4.0));
  const std::array<std::size_t, 1> out_of_range{2};
  CHECK_THROWS(s.reduced(out_of_range));
}

TEST_CASE("substreams are reproducible and distinct") {
  auto a = NormalSource::substream(7, 3);
  auto b = NormalSource::substream(7, 3);
  auto c = NormalSource::substream(7, 4);
  const double va = a();
  CHECK(va == b());
  CHECK(va != c());
}
