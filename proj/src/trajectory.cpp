#include "qndsim/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace qndsim {

namespace {

constexpr std::size_t kLeafSize = 16;

// Pairwise sum of rows [lo, hi); the split points depend only on the indices.
Vector pairwise_sum(const Matrix& rows, std::size_t lo, std::size_t hi) {
  if (hi - lo <= kLeafSize) {
    Vector acc = Vector::Zero(rows.cols());
    for (std::size_t k = lo; k < hi; ++k) {
      acc += rows.row(static_cast<Eigen::Index>(k)).transpose();
    }
    return acc;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(rows, lo, mid) + pairwise_sum(rows, mid, hi);
}

Matrix sampling_factor(const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }
  // Semidefinite fallback.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

std::string quad_name(Eigen::Index k) {
  return std::string(k % 2 == 0 ? "x" : "p") + std::to_string(k / 2 + 1);
}

}  // namespace

EnsembleResult run_ensemble(const Circuit& circuit, const GaussianState& input, std::size_t n,
                            std::uint64_t master_seed, const EnsembleOptions& options) {
  if (n < 2) {
    throw std::invalid_argument("an ensemble needs at least two trajectories");
  }
  circuit.validate();
  const auto dim = static_cast<Eigen::Index>(2 * circuit.n_outputs());
  Matrix samples(static_cast<Eigen::Index>(n), dim);
  std::vector<std::vector<double>> outcomes(options.keep_outcomes ? n : 0);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      NormalSource noise = NormalSource::substream(master_seed, k);
      TrajectoryResult traj = run_trajectory(circuit, input, noise);
      const Matrix factor = sampling_factor(traj.state.cov());
      Vector z(dim);
      for (Eigen::Index i = 0; i < dim; ++i) {
        z(i) = noise();
      }
      samples.row(static_cast<Eigen::Index>(k)) = (traj.state.mean() + factor * z).transpose();
      if (options.keep_outcomes) {
        outcomes[k] = std::move(traj.outcomes);
      }
    }
  };

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                          : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    work(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t begin = 0; begin < n; begin += chunk) {
      pool.emplace_back(work, begin, std::min(n, begin + chunk));
    }
  }

  EnsembleResult result;
  result.n_trajectories = n;
  const double nn = static_cast<double>(n);
  result.mean = pairwise_sum(samples, 0, n) / nn;

  Matrix centered = samples.rowwise() - result.mean.transpose();
  Matrix products(static_cast<Eigen::Index>(n), dim * dim);
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n); ++k) {
    const Vector c = centered.row(k).transpose();
    const Matrix outer = c * c.transpose();
    products.row(k) = Eigen::Map<const Eigen::RowVectorXd>(outer.data(), dim * dim);
  }
  const Vector flat = pairwise_sum(products, 0, n) / (nn - 1.0);
  result.cov = Eigen::Map<const Matrix>(flat.data(), dim, dim);
  result.cov = 0.5 * (result.cov + result.cov.transpose()).eval();

  result.se_mean = (result.cov.diagonal() / nn).cwiseSqrt();
  result.se_cov.resize(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double c = result.cov(i, j);
      result.se_cov(i, j) = std::sqrt((result.cov(i, i) * result.cov(j, j) + c * c) / nn);
    }
  }
  result.outcomes = std::move(outcomes);
  return result;
}

ZScoreReport z_score_report(const EnsembleResult& ensemble, const GaussianState& analytic) {
  const auto dim = ensemble.mean.size();
  if (analytic.mean().size() != dim) {
    throw std::invalid_argument("analytic state and ensemble differ in dimension");
  }
  ZScoreReport report;
  auto consider = [&](double empirical, double expected, double se, std::string name) {
    const double z = se > 0.0 ? std::abs(empirical - expected) / se
                              : (empirical == expected ? 0.0 : INFINITY);
    if (z > report.max_z || report.worst_entry.empty()) {
      report.max_z = z;
      report.worst_entry = std::move(name);
    }
  };
  for (Eigen::Index i = 0; i < dim; ++i) {
    consider(ensemble.mean(i), analytic.mean()(i), ensemble.se_mean(i), "mean[" + quad_name(i) + "]");
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = i; j < dim; ++j) {
      consider(ensemble.cov(i, j), analytic.cov()(i, j), ensemble.se_cov(i, j),
               "cov[" + quad_name(i) + "," + quad_name(j) + "]");
    }
  }
  return report;
}

void write_outcome_csv(std::ostream& os, const EnsembleResult& ensemble) {
  std::size_t width = 0;
  for (const auto& row : ensemble.outcomes) {
    width = std::max(width, row.size());
  }
  os << "trajectory";
  for (std::size_t k = 0; k < width; ++k) {
    os << ",outcome" << k;
  }
  os << '\n';
  const auto old_precision = os.precision(17);
  for (std::size_t t = 0; t < ensemble.outcomes.size(); ++t) {
    os << t;
    for (double v : ensemble.outcomes[t]) {
      os << ',' << v;
    }
    os << '\n';
  }
  os.precision(old_precision);
}

}  // namespace qndsim
