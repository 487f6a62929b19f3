#include "qndsim/gaussian_state.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qndsim {

namespace {

void check_mode(std::size_t n_modes, std::size_t mode) {
  if (mode >= n_modes) {
    throw std::out_of_range("mode index " + std::to_string(mode) + " out of range for " +
                            std::to_string(n_modes) + " modes");
  }
}

Matrix rotation_block(double phi) {
  Matrix r(2, 2);
  r << std::cos(phi), std::sin(phi), -std::sin(phi), std::cos(phi);
  return r;
}

}  // namespace

double db_to_variance(double db) { return std::pow(10.0, db / 10.0); }

double variance_to_db(double variance) { return 10.0 * std::log10(variance); }

double squeeze_parameter_from_db(double db) { return -db * std::numbers::ln10 / 20.0; }

Matrix symplectic_form(std::size_t n_modes) {
  Matrix omega = Matrix::Zero(2 * n_modes, 2 * n_modes);
  for (std::size_t k = 0; k < n_modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

GaussianState::GaussianState(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (mean_.size() == 0 || mean_.size() % 2 != 0) {
    throw std::invalid_argument("mean vector must have positive even length");
  }
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
    throw std::invalid_argument("covariance shape does not match mean vector");
  }
  if (!cov_.allFinite() || !mean_.allFinite()) {
    throw std::invalid_argument("state moments must be finite");
  }
  const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
  if (max_asymmetry(cov_) > 1e-12 * scale) {
    throw std::invalid_argument("covariance matrix is not symmetric");
  }
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
}

double GaussianState::mean_of(std::size_t mode, Quadrature q) const {
  check_mode(n_modes(), mode);
  return mean_(static_cast<Eigen::Index>(quad_index(mode, q)));
}

double GaussianState::variance(std::size_t mode, Quadrature q) const {
  check_mode(n_modes(), mode);
  const auto k = static_cast<Eigen::Index>(quad_index(mode, q));
  return cov_(k, k);
}

GaussianState GaussianState::reduced(std::span<const std::size_t> modes) const {
  if (modes.empty()) {
    throw std::invalid_argument("reduced state needs at least one mode");
  }
  std::vector<Eigen::Index> idx;
  idx.reserve(2 * modes.size());
  for (auto m : modes) {
    check_mode(n_modes(), m);
    idx.push_back(static_cast<Eigen::Index>(2 * m));
    idx.push_back(static_cast<Eigen::Index>(2 * m + 1));
  }
  return GaussianState(mean_(idx), cov_(idx, idx));
}

double min_uncertainty_eigenvalue(const GaussianState& state) {
  const Eigen::MatrixXcd h = state.cov().cast<std::complex<double>>() +
                             std::complex<double>(0.0, 1.0) *
                                 symplectic_form(state.n_modes()).cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double max_asymmetry(const Matrix& m) { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

bool is_physical(const GaussianState& state, double tol) {
  const double scale = std::max(1.0, state.cov().cwiseAbs().maxCoeff());
  return max_asymmetry(state.cov()) <= 1e-12 * scale && min_uncertainty_eigenvalue(state) >= -tol;
}

SymplecticMatrix::SymplecticMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0 || entries_.rows() % 2 != 0) {
    throw std::invalid_argument("symplectic matrix must be square with even dimension");
  }
  if (!(symplectic_error() <= kTolerance)) {
    throw std::invalid_argument("matrix violates S Omega S^T = Omega");
  }
}

SymplecticMatrix SymplecticMatrix::identity(std::size_t n_modes) {
  return SymplecticMatrix(Matrix::Identity(2 * n_modes, 2 * n_modes));
}

double SymplecticMatrix::symplectic_error() const {
  const Matrix omega = symplectic_form(n_modes());
  return (entries_ * omega * entries_.transpose() - omega).cwiseAbs().maxCoeff();
}

SymplecticMatrix SymplecticMatrix::operator*(const SymplecticMatrix& rhs) const {
  return SymplecticMatrix(entries_ * rhs.entries_);
}

SymplecticMatrix beam_splitter_matrix(std::size_t n_modes, std::size_t i, std::size_t j,
                                      double reflectivity, BeamSplitterSigns signs) {
  check_mode(n_modes, i);
  check_mode(n_modes, j);
  if (i == j) {
    throw std::invalid_argument("beam splitter needs two distinct modes");
  }
  if (!(reflectivity >= 0.0 && reflectivity <= 1.0)) {
    throw std::invalid_argument("beam splitter reflectivity must lie in [0, 1]");
  }
  for (int s : {signs.ii, signs.ij, signs.ji, signs.jj}) {
    if (s != 1 && s != -1) {
      throw std::invalid_argument("beam splitter signs must be +1 or -1");
    }
  }
  const double t = std::sqrt(1.0 - reflectivity);
  const double r = std::sqrt(reflectivity);
  if (t > 0.0 && r > 0.0 && signs.ii * signs.ji != signs.ij * signs.jj) {
    throw std::invalid_argument("beam splitter sign choice is not orthogonal");
  }
  Matrix s = Matrix::Identity(2 * n_modes, 2 * n_modes);
  for (std::size_t q = 0; q < 2; ++q) {
    const auto a = static_cast<Eigen::Index>(2 * i + q);
    const auto b = static_cast<Eigen::Index>(2 * j + q);
    s(a, a) = signs.ii * t;
    s(a, b) = signs.ij * r;
    s(b, a) = -signs.ji * r;
    s(b, b) = signs.jj * t;
  }
  return SymplecticMatrix(std::move(s));
}

SymplecticMatrix rotation_matrix(std::size_t n_modes, std::size_t mode, double phi) {
  check_mode(n_modes, mode);
  Matrix s = Matrix::Identity(2 * n_modes, 2 * n_modes);
  s.block(2 * mode, 2 * mode, 2, 2) = rotation_block(phi);
  return SymplecticMatrix(std::move(s));
}

SymplecticMatrix squeezer_matrix(std::size_t n_modes, std::size_t mode, double r, double angle) {
  check_mode(n_modes, mode);
  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = std::exp(-r);
  diag(1, 1) = std::exp(r);
  const Matrix rot = rotation_block(angle);
  Matrix s = Matrix::Identity(2 * n_modes, 2 * n_modes);
  s.block(2 * mode, 2 * mode, 2, 2) = rot.transpose() * diag * rot;
  return SymplecticMatrix(std::move(s));
}

GaussianState apply(const SymplecticMatrix& s, const GaussianState& state) {
  if (s.n_modes() != state.n_modes()) {
    throw std::invalid_argument("symplectic matrix and state differ in mode count");
  }
  const Matrix& m = s.matrix();
  return GaussianState(m * state.mean(), m * state.cov() * m.transpose());
}

GaussianState vacuum_state(std::size_t n_modes) {
  if (n_modes == 0) {
    throw std::invalid_argument("vacuum state needs at least one mode");
  }
  return GaussianState(Vector::Zero(2 * n_modes), Matrix::Identity(2 * n_modes, 2 * n_modes));
}

GaussianState coherent_state(double x, double p) {
  Vector mean(2);
  mean << x, p;
  return GaussianState(std::move(mean), Matrix::Identity(2, 2));
}

GaussianState squeezed_vacuum(double r, double angle, double anti_squeeze_excess) {
  if (!(anti_squeeze_excess >= 1.0)) {
    throw std::invalid_argument("anti-squeeze excess must be >= 1");
  }
  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = std::exp(-2.0 * r);
  diag(1, 1) = std::exp(2.0 * r) * anti_squeeze_excess;
  const Matrix rot = rotation_block(angle);
  return GaussianState(Vector::Zero(2), rot.transpose() * diag * rot);
}

GaussianState tensor(const GaussianState& a, const GaussianState& b) {
  const auto na = a.mean().size();
  const auto nb = b.mean().size();
  Vector mean(na + nb);
  mean << a.mean(), b.mean();
  Matrix cov = Matrix::Zero(na + nb, na + nb);
  cov.topLeftCorner(na, na) = a.cov();
  cov.bottomRightCorner(nb, nb) = b.cov();
  return GaussianState(std::move(mean), std::move(cov));
}

GaussianState squeeze(const GaussianState& state, std::size_t mode, double r, double angle) {
  return apply(squeezer_matrix(state.n_modes(), mode, r, angle), state);
}

GaussianState displace(const GaussianState& state, std::size_t mode, double dx, double dp) {
  check_mode(state.n_modes(), mode);
  Vector mean = state.mean();
  mean(static_cast<Eigen::Index>(2 * mode)) += dx;
  mean(static_cast<Eigen::Index>(2 * mode + 1)) += dp;
  return GaussianState(std::move(mean), state.cov());
}

GaussianState beam_splitter(const GaussianState& state, std::size_t i, std::size_t j,
                            double reflectivity, BeamSplitterSigns signs) {
  return apply(beam_splitter_matrix(state.n_modes(), i, j, reflectivity, signs), state);
}

GaussianState phase_rotate(const GaussianState& state, std::size_t mode, double phi) {
  return apply(rotation_matrix(state.n_modes(), mode, phi), state);
}

GaussianState loss_channel(const GaussianState& state, std::size_t mode, double efficiency) {
  check_mode(state.n_modes(), mode);
  if (!(efficiency > 0.0 && efficiency <= 1.0)) {
    throw std::invalid_argument("loss channel efficiency must lie in (0, 1]");
  }
  const auto n = static_cast<Eigen::Index>(2 * state.n_modes());
  Vector scale = Vector::Ones(n);
  scale.segment(static_cast<Eigen::Index>(2 * mode), 2).setConstant(std::sqrt(efficiency));
  Matrix cov = scale.asDiagonal() * state.cov() * scale.asDiagonal();
  cov.block(static_cast<Eigen::Index>(2 * mode), static_cast<Eigen::Index>(2 * mode), 2, 2) +=
      (1.0 - efficiency) * Matrix::Identity(2, 2);
  return GaussianState(scale.cwiseProduct(state.mean()), std::move(cov));
}

GaussianState condition_on_x(const GaussianState& state, std::size_t mode, double readout,
                             double dark_variance) {
  const std::size_t n = state.n_modes();
  check_mode(n, mode);
  if (n < 2) {
    throw std::invalid_argument("conditioning needs at least one unmeasured mode");
  }
  if (!(dark_variance >= 0.0)) {
    throw std::invalid_argument("dark-noise variance must be non-negative");
  }
  std::vector<Eigen::Index> keep;
  for (std::size_t k = 0; k < n; ++k) {
    if (k != mode) {
      keep.push_back(static_cast<Eigen::Index>(2 * k));
      keep.push_back(static_cast<Eigen::Index>(2 * k + 1));
    }
  }
  const auto mx = static_cast<Eigen::Index>(2 * mode);
  const double floor = std::max(dark_variance, 1e-12);
  const double var = std::max(state.cov()(mx, mx) + dark_variance, floor);
  const Vector cross = state.cov()(keep, std::vector<Eigen::Index>{mx}).col(0);
  Vector mean = state.mean()(keep) + cross * ((readout - state.mean()(mx)) / var);
  Matrix cov = state.cov()(keep, keep) - cross * cross.transpose() / var;
  return GaussianState(std::move(mean), std::move(cov));
}

HomodyneOutcome homodyne(const GaussianState& state, std::size_t mode, double angle,
                         NormalSource& noise, const HomodyneNoise& detector) {
  GaussianState s = state;
  if (detector.efficiency < 1.0) {
    s = loss_channel(s, mode, detector.efficiency);
  }
  if (angle != 0.0) {
    s = phase_rotate(s, mode, angle);
  }
  const auto mx = static_cast<Eigen::Index>(2 * mode);
  const double var = std::max(s.cov()(mx, mx) + detector.dark_variance,
                              std::max(detector.dark_variance, 1e-12));
  const double value = s.mean()(mx) + std::sqrt(var) * noise();
  return HomodyneOutcome{value, mode, angle,
                         condition_on_x(s, mode, value, detector.dark_variance)};
}

}  // namespace qndsim
