#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nci/spectral.hpp"

namespace nci {

struct LyapunovResult {
  double value = 0.0;         // |signed|
  double signed_value = 0.0;  // <ln|1+W1 xi|> - <ln|m+W2 xi|>
  double estimator_sigma = 0.0;
  long steps = 0;
  long resampled = 0;         // Birkhoff draws rejected as singular
  bool domain_error = false;  // a logarithm diverged; value is +inf
};

struct SpectralStatistics {
  double mean_gap_ratio = 0.0;
  double spacing_variance = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  int levels = 0;
};

LyapunovResult lyapunov_analytic(double m, double W1, double W2);
LyapunovResult lyapunov_birkhoff(double m, double W1, double W2, long steps, std::uint64_t seed);

SpectralStatistics level_statistics(const Eigen::VectorXd& eigenvalues, double lo, double hi);
inline SpectralStatistics level_statistics(const EigenDecomposition& eig, double lo, double hi) {
  return level_statistics(eig.values, lo, hi);
}
// Pools unfolded spacings and gap ratios over several spectra.
SpectralStatistics level_statistics(std::span<const Eigen::VectorXd> spectra, double lo, double hi);

// Hermitian matrix from the Gaussian unitary ensemble.
cmat sample_gue(int dim, std::uint64_t seed);

}  // namespace nci
