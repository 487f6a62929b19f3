#include "qndsim/quad_expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qndsim {

bool is_quantum_label(const std::string& label) {
  return label.size() > 1 && (label.front() == 'x' || label.front() == 'p');
}

std::string conjugate_label(const std::string& label) {
  if (!is_quantum_label(label)) {
    throw std::invalid_argument("label '" + label + "' has no conjugate partner");
  }
  std::string partner = label;
  partner.front() = label.front() == 'x' ? 'p' : 'x';
  return partner;
}

LinearQuadExpr::LinearQuadExpr(std::initializer_list<std::pair<const std::string, double>> terms) {
  for (const auto& [label, c] : terms) {
    add(label, c);
  }
}

double LinearQuadExpr::coefficient(const std::string& label) const {
  const auto it = terms_.find(label);
  return it == terms_.end() ? 0.0 : it->second;
}

LinearQuadExpr& LinearQuadExpr::add(const std::string& label, double coefficient) {
  if (!std::isfinite(coefficient)) {
    throw std::invalid_argument("non-finite coefficient for '" + label + "'");
  }
  if (coefficient != 0.0) {
    terms_[label] += coefficient;
  }
  return *this;
}

LinearQuadExpr& LinearQuadExpr::operator+=(const LinearQuadExpr& rhs) {
  for (const auto& [label, c] : rhs.terms_) {
    add(label, c);
  }
  return *this;
}

LinearQuadExpr LinearQuadExpr::operator+(const LinearQuadExpr& rhs) const {
  LinearQuadExpr out = *this;
  out += rhs;
  return out;
}

LinearQuadExpr LinearQuadExpr::operator*(double scale) const {
  LinearQuadExpr out;
  for (const auto& [label, c] : terms_) {
    out.add(label, c * scale);
  }
  return out;
}

double LinearQuadExpr::distance(const LinearQuadExpr& other) const {
  double worst = 0.0;
  for (const auto& [label, c] : terms_) {
    worst = std::max(worst, std::abs(c - other.coefficient(label)));
  }
  for (const auto& [label, c] : other.terms_) {
    worst = std::max(worst, std::abs(c - coefficient(label)));
  }
  return worst;
}

std::string LinearQuadExpr::to_string() const {
  if (terms_.empty()) {
    return "0";
  }
  std::string out;
  char buf[64];
  for (const auto& [label, c] : terms_) {
    if (out.empty()) {
      std::snprintf(buf, sizeof buf, "%.6g*%s", c, label.c_str());
    } else {
      std::snprintf(buf, sizeof buf, " %c %.6g*%s", c < 0 ? '-' : '+', std::abs(c), label.c_str());
    }
    out += buf;
  }
  return out;
}

double commutator(const LinearQuadExpr& a, const LinearQuadExpr& b) {
  double value = 0.0;
  for (const auto& [label, c] : a.terms()) {
    if (!is_quantum_label(label)) {
      continue;
    }
    const double partner = b.coefficient(conjugate_label(label));
    value += label.front() == 'x' ? c * partner : -c * partner;
  }
  return value;
}

double QuadratureMap::distance(const QuadratureMap& other) const {
  double worst = 0.0;
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    worst = std::max(worst, outputs[k].distance(other.outputs[k]));
  }
  return worst;
}

std::string QuadratureMap::to_string() const {
  std::string out;
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    out += kOutputNames[k] + " = " + outputs[k].to_string() + "\n";
  }
  return out;
}

QuadratureMap ideal_qnd_map(double gain) {
  if (!(gain >= 0.0) || !std::isfinite(gain)) {
    throw std::invalid_argument("interaction gain must be finite and >= 0");
  }
  QuadratureMap m;
  m.x1() = {{"x1_in", 1.0}};
  m.x2() = {{"x2_in", 1.0}, {"x1_in", gain}};
  m.p1() = {{"p1_in", 1.0}, {"p2_in", -gain}};
  m.p2() = {{"p2_in", 1.0}};
  return m;
}

QuadratureMap finite_squeezing_map(double reflectivity, double r_a, double r_b) {
  const double R = reflectivity;
  if (!(R > 0.0 && R <= 1.0)) {
    throw std::invalid_argument("R must lie in (0, 1]");
  }
  const double coupling = (1.0 - R) / std::sqrt(R);
  const double signal_noise = std::sqrt((1.0 - R) / (1.0 + R));
  const double probe_noise = std::sqrt(R * (1.0 - R) / (1.0 + R));
  const double a = std::exp(-r_a);
  const double b = std::exp(-r_b);

  QuadratureMap m;
  m.x1() = LinearQuadExpr{{"x1_in", 1.0}}.add("xA0", -signal_noise * a);
  m.x2() = LinearQuadExpr{{"x2_in", 1.0}}.add("x1_in", coupling).add("xA0", probe_noise * a);
  m.p1() = LinearQuadExpr{{"p1_in", 1.0}}.add("p2_in", -coupling).add("pB0", probe_noise * b);
  m.p2() = LinearQuadExpr{{"p2_in", 1.0}}.add("pB0", signal_noise * b);
  return m;
}

double InputMoments::mean(const std::string& label) const {
  const auto it = means.find(label);
  return it == means.end() ? 0.0 : it->second;
}

double InputMoments::variance(const std::string& label) const {
  const auto it = variances.find(label);
  return it == variances.end() ? 1.0 : it->second;
}

GaussianState moments_from_exprs(const std::vector<LinearQuadExpr>& outputs,
                                 const InputMoments& inputs) {
  const auto n = static_cast<Eigen::Index>(outputs.size());
  Vector mean = Vector::Zero(n);
  Matrix cov = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (const auto& [label, c] : outputs[static_cast<std::size_t>(i)].terms()) {
      mean(i) += c * inputs.mean(label);
    }
    for (Eigen::Index j = 0; j <= i; ++j) {
      double v = 0.0;
      for (const auto& [label, c] : outputs[static_cast<std::size_t>(i)].terms()) {
        v += c * outputs[static_cast<std::size_t>(j)].coefficient(label) * inputs.variance(label);
      }
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
  return GaussianState(std::move(mean), std::move(cov));
}

GaussianState moments_from_map(const QuadratureMap& map, const InputMoments& inputs) {
  return moments_from_exprs({map.outputs.begin(), map.outputs.end()}, inputs);
}

CommutatorReport commutator_check(const std::vector<LinearQuadExpr>& outputs, double tol) {
  CommutatorReport report;
  const std::size_t n = outputs.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Interleaved layout: (2k, 2k+1) is a conjugate pair.
      const double expected = (i % 2 == 0 && j == i + 1) ? 1.0 : 0.0;
      const double dev = std::abs(commutator(outputs[i], outputs[j]) - expected);
      report.max_deviation = std::max(report.max_deviation, dev);
      if (dev > tol) {
        report.pass = false;
        report.failures.push_back("[q" + std::to_string(i) + ", q" + std::to_string(j) +
                                  "] off by " + std::to_string(dev));
      }
    }
  }
  return report;
}

CommutatorReport commutator_check(const QuadratureMap& map, double tol) {
  auto report = commutator_check({map.outputs.begin(), map.outputs.end()}, tol);
  for (auto& f : report.failures) {
    for (std::size_t k = 0; k < kOutputNames.size(); ++k) {
      const std::string tag = "q" + std::to_string(k);
      for (auto pos = f.find(tag); pos != std::string::npos; pos = f.find(tag)) {
        f.replace(pos, tag.size(), kOutputNames[k]);
      }
    }
  }
  return report;
}

}  // namespace qndsim
