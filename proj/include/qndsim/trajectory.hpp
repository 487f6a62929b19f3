#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qndsim/circuit.hpp"
#include "qndsim/gaussian_state.hpp"

namespace qndsim {

struct EnsembleOptions {
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 1;
  bool keep_outcomes = false;
};

/// Empirical moments of output quadrature samples, one Wigner-function sample
/// drawn from each trajectory's conditional output state.
struct EnsembleResult {
  std::size_t n_trajectories = 0;
  Vector mean;
  Matrix cov;
  Vector se_mean;
  Matrix se_cov;
  /// Homodyne readouts per trajectory, when requested.
  std::vector<std::vector<double>> outcomes;
};

/// Runs n independent trajectories; trajectory k draws from
/// NormalSource::substream(master_seed, k). Aggregation uses a fixed pairwise
/// reduction over trajectory index, so the result is bit-identical for any
/// thread count.
EnsembleResult run_ensemble(const Circuit& circuit, const GaussianState& input, std::size_t n,
                            std::uint64_t master_seed, const EnsembleOptions& options = {});

struct ZScoreReport {
  double max_z = 0.0;
  std::string worst_entry;
};

/// |empirical - analytic| / SE over all first and second moments.
ZScoreReport z_score_report(const EnsembleResult& ensemble, const GaussianState& analytic);

/// Columns: trajectory, then one column per homodyne readout.
void write_outcome_csv(std::ostream& os, const EnsembleResult& ensemble);

}  // namespace qndsim
