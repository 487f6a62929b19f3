#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "qndsim/gaussian_state.hpp"

namespace qndsim {

// Basis labels name independent unit-variance sources. A label starting with
// 'x' or 'p' is a quantum quadrature whose conjugate partner swaps that first
// letter ("x1_in" <-> "p1_in", "xA0" <-> "pA0"). Any other label (e.g. "d0"
// for detector dark noise) is a classical variable commuting with everything.

/// Returns true and the conjugate label for quantum quadrature labels.
bool is_quantum_label(const std::string& label);
std::string conjugate_label(const std::string& label);

/// A quadrature written as a real linear combination of basis labels.
class LinearQuadExpr {
 public:
  LinearQuadExpr() = default;
  LinearQuadExpr(std::initializer_list<std::pair<const std::string, double>> terms);

  double coefficient(const std::string& label) const;
  const std::map<std::string, double>& terms() const { return terms_; }

  LinearQuadExpr& add(const std::string& label, double coefficient);
  LinearQuadExpr& operator+=(const LinearQuadExpr& rhs);
  LinearQuadExpr operator+(const LinearQuadExpr& rhs) const;
  LinearQuadExpr operator*(double scale) const;

  /// Coefficient-wise max |a - b| over the union of labels.
  double distance(const LinearQuadExpr& other) const;

  std::string to_string() const;

 private:
  std::map<std::string, double> terms_;
};

inline LinearQuadExpr operator*(double scale, const LinearQuadExpr& e) { return e * scale; }

/// [a, b] / (2i), computed from coefficients with [x_k, p_k] = 2i.
double commutator(const LinearQuadExpr& a, const LinearQuadExpr& b);

/// Output quadratures of a two-mode gate, ordered (x1, p1, x2, p2).
struct QuadratureMap {
  std::array<LinearQuadExpr, 4> outputs;

  LinearQuadExpr& x1() { return outputs[0]; }
  LinearQuadExpr& p1() { return outputs[1]; }
  LinearQuadExpr& x2() { return outputs[2]; }
  LinearQuadExpr& p2() { return outputs[3]; }
  const LinearQuadExpr& x1() const { return outputs[0]; }
  const LinearQuadExpr& p1() const { return outputs[1]; }
  const LinearQuadExpr& x2() const { return outputs[2]; }
  const LinearQuadExpr& p2() const { return outputs[3]; }

  /// Largest coefficient difference across all outputs.
  double distance(const QuadratureMap& other) const;
  /// One line per output quadrature, e.g. "x2_out = 1.5*x1_in + 1*x2_in".
  std::string to_string() const;
};

inline const std::array<std::string, 4> kOutputNames{"x1_out", "p1_out", "x2_out", "p2_out"};

/// The ideal sum gate with gain G:
///   x1 -> x1, x2 -> x2 + G x1, p1 -> p1 - G p2, p2 -> p2.
QuadratureMap ideal_qnd_map(double gain);

/// The offline-squeezing gate with beam-splitter parameter R in (0, 1] and
/// ancilla squeeze parameters rA (x-squeezed) and rB (p-squeezed). Ancilla
/// squeezing is folded into the coefficients of the unit-variance labels
/// xA0 and pB0.
QuadratureMap finite_squeezing_map(double reflectivity, double r_a, double r_b);

/// First and second moments of the basis labels. Unlisted labels have
/// mean 0 and variance 1.
struct InputMoments {
  std::map<std::string, double> means;
  std::map<std::string, double> variances;

  double mean(const std::string& label) const;
  double variance(const std::string& label) const;
};

/// Exact output moments for independent basis labels.
GaussianState moments_from_map(const QuadratureMap& map, const InputMoments& inputs = {});
GaussianState moments_from_exprs(const std::vector<LinearQuadExpr>& outputs,
                                 const InputMoments& inputs = {});

struct CommutatorReport {
  bool pass = true;
  double max_deviation = 0.0;
  std::vector<std::string> failures;
};

/// Checks [x_k, p_k] = 2i for each output mode and that all cross-mode
/// commutators vanish, to within `tol`.
CommutatorReport commutator_check(const QuadratureMap& map, double tol = 1e-10);
CommutatorReport commutator_check(const std::vector<LinearQuadExpr>& outputs, double tol = 1e-10);

}  // namespace qndsim
