#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qndsim/rng.hpp"

namespace qndsim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Quadrature { X = 0, P = 1 };

/// Row/column of a quadrature in the interleaved (x1, p1, ..., xN, pN) layout.
constexpr std::size_t quad_index(std::size_t mode, Quadrature q) {
  return 2 * mode + static_cast<std::size_t>(q);
}

// Shot-noise units: vacuum quadrature variance is 1.
double db_to_variance(double db);
double variance_to_db(double variance);
/// Squeeze parameter r with exp(-2r) equal to the given dB level.
double squeeze_parameter_from_db(double db);

/// Block-diagonal symplectic form with per-mode block [[0, 1], [-1, 0]].
Matrix symplectic_form(std::size_t n_modes);

/// Mean vector and covariance matrix of an N-mode Gaussian state.
///
/// The covariance is symmetrized on construction; inputs that are not
/// symmetric to 1e-12 (relative) are rejected.
class GaussianState {
 public:
  GaussianState(Vector mean, Matrix cov);

  std::size_t n_modes() const { return static_cast<std::size_t>(mean_.size() / 2); }
  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }

  double mean_of(std::size_t mode, Quadrature q) const;
  double variance(std::size_t mode, Quadrature q) const;

  /// Marginal state on the listed modes, in the listed order.
  GaussianState reduced(std::span<const std::size_t> modes) const;

 private:
  Vector mean_;
  Matrix cov_;
};

/// Smallest eigenvalue of the Hermitian matrix cov + i*Omega.
double min_uncertainty_eigenvalue(const GaussianState& state);
double max_asymmetry(const Matrix& m);
/// Symmetric and satisfying cov + i*Omega >= -tol.
bool is_physical(const GaussianState& state, double tol = 1e-9);

struct BeamSplitterSigns {
  int ii = 1;
  int ij = 1;
  int ji = 1;
  int jj = 1;
};

/// Real 2N x 2N matrix S with S Omega S^T = Omega.
class SymplecticMatrix {
 public:
  static constexpr double kTolerance = 1e-12;

  /// Throws std::invalid_argument when the symplectic condition fails.
  explicit SymplecticMatrix(Matrix entries);

  static SymplecticMatrix identity(std::size_t n_modes);

  std::size_t n_modes() const { return static_cast<std::size_t>(entries_.rows() / 2); }
  const Matrix& matrix() const { return entries_; }
  /// max |S Omega S^T - Omega|
  double symplectic_error() const;

  SymplecticMatrix operator*(const SymplecticMatrix& rhs) const;

 private:
  Matrix entries_;
};

// Beam splitter on modes (i, j) with reflectivity R and transmissivity T = 1 - R:
//   i' =  s_ii sqrt(T) i + s_ij sqrt(R) j
//   j' = -s_ji sqrt(R) i + s_jj sqrt(T) j
// applied identically to x and p. The signs must keep the mixing orthogonal.
SymplecticMatrix beam_splitter_matrix(std::size_t n_modes, std::size_t i, std::size_t j,
                                      double reflectivity, BeamSplitterSigns signs = {});
// x' = x cos(phi) + p sin(phi), p' = -x sin(phi) + p cos(phi)
SymplecticMatrix rotation_matrix(std::size_t n_modes, std::size_t mode, double phi);
/// At angle 0 the x quadrature is scaled by exp(-r); angle rotates the squeezing axis.
SymplecticMatrix squeezer_matrix(std::size_t n_modes, std::size_t mode, double r, double angle);

GaussianState apply(const SymplecticMatrix& s, const GaussianState& state);

GaussianState vacuum_state(std::size_t n_modes);
GaussianState coherent_state(double x, double p);
/// Single-mode squeezed vacuum. anti_squeeze_excess >= 1 inflates the
/// anti-squeezed variance (1 is a pure state).
GaussianState squeezed_vacuum(double r, double angle, double anti_squeeze_excess = 1.0);
/// Product state a (x) b with the modes of b appended after those of a.
GaussianState tensor(const GaussianState& a, const GaussianState& b);

GaussianState squeeze(const GaussianState& state, std::size_t mode, double r, double angle);
GaussianState displace(const GaussianState& state, std::size_t mode, double dx, double dp);
GaussianState beam_splitter(const GaussianState& state, std::size_t i, std::size_t j,
                            double reflectivity, BeamSplitterSigns signs = {});
GaussianState phase_rotate(const GaussianState& state, std::size_t mode, double phi);
/// Pure-loss channel with transmission efficiency in (0, 1].
GaussianState loss_channel(const GaussianState& state, std::size_t mode, double efficiency);

struct HomodyneNoise {
  /// Combined detection efficiency, applied as a loss channel before projection.
  double efficiency = 1.0;
  /// Additive classical variance on the readout.
  double dark_variance = 0.0;
};

struct HomodyneOutcome {
  double value;
  std::size_t mode;
  double angle;
  GaussianState reduced_state;
};

/// Measures x cos(angle) + p sin(angle) of `mode`, removing it from the state.
HomodyneOutcome homodyne(const GaussianState& state, std::size_t mode, double angle,
                         NormalSource& noise, const HomodyneNoise& detector = {});

/// Gaussian conditioning on a readout of the x quadrature of `mode` (mode removed).
/// Exposed separately from homodyne() so the update can be checked on fixed values.
GaussianState condition_on_x(const GaussianState& state, std::size_t mode, double readout,
                             double dark_variance = 0.0);

}  // namespace qndsim
