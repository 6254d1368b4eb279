#include "nci/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "nci/error.hpp"

namespace nci {

namespace {

// c ln y with the 0 ln 0 = 0 limit; the coefficient vanishes exactly where its argument does
double xlogy(double c, double y, bool& bad) {
  if (y > 0.0) return c * std::log(y);
  if (std::abs(c) > 1e-12) bad = true;
  return 0.0;
}

// (1/W + 1/2) ln|2+W| - (1/W - 1/2) ln|2-W|
double hop_term(double W, bool& bad) {
  if (std::abs(W) < 1e-6) {
    // (2/W) atanh(W/2) + (1/2) ln|4 - W^2|
    return 1.0 + W * W / 12.0 + 0.5 * std::log(std::abs(4.0 - W * W));
  }
  return xlogy(1.0 / W + 0.5, std::abs(2.0 + W), bad) - xlogy(1.0 / W - 0.5, std::abs(2.0 - W), bad);
}

// (m/W - 1/2) ln|2m-W| - (m/W + 1/2) ln|2m+W|
double mass_term(double m, double W, bool& bad) {
  if (m != 0.0 && std::abs(W / (2.0 * m)) < 1e-6) {
    const double u = W / (2.0 * m);
    return -(1.0 + u * u / 3.0) - 0.5 * std::log(std::abs(4.0 * m * m - W * W));
  }
  if (W == 0.0) {
    // clean mass with m = 0
    bad = true;
    return 0.0;
  }
  return xlogy(m / W - 0.5, std::abs(2.0 * m - W), bad) - xlogy(m / W + 0.5, std::abs(2.0 * m + W), bad);
}

}  // namespace

LyapunovResult lyapunov_analytic(double m, double W1, double W2) {
  LyapunovResult r;
  bool bad = false;
  const double g = hop_term(W1, bad) + mass_term(m, W2, bad);
  if (bad || !std::isfinite(g)) {
    r.domain_error = true;
    r.value = std::numeric_limits<double>::infinity();
    r.signed_value = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.signed_value = g;
  r.value = std::abs(g);
  return r;
}

LyapunovResult lyapunov_birkhoff(double m, double W1, double W2, long steps, std::uint64_t seed) {
  require(steps >= 1000, "Birkhoff sampling needs at least 1000 steps");
  std::mt19937_64 eng(seed);
  constexpr int blocks = 100;
  std::vector<double> block_sum(blocks, 0.0);
  std::vector<long> block_n(blocks, 0);
  LyapunovResult r;
  r.steps = steps;
  for (long x = 0; x < steps; ++x) {
    double a = 0.0, b = 0.0;
    for (;;) {
      const double xi = unit_uniform(eng()) - 0.5;
      a = std::abs(1.0 + W1 * xi);
      b = std::abs(m + W2 * xi);
      if (a >= 1e-300 && b >= 1e-300) break;
      ++r.resampled;
      if (r.resampled > steps) throw Error(Errc::singular_draw, "draws keep hitting a logarithmic singularity");
    }
    const std::size_t k = static_cast<std::size_t>((x * blocks) / steps);
    block_sum[k] += std::log(a) - std::log(b);
    ++block_n[k];
  }
  double total = 0.0;
  for (double s : block_sum) total += s;
  const double mean = total / static_cast<double>(steps);
  // Delete-one-block jackknife.
  double jk_mean = 0.0;
  std::vector<double> loo(blocks);
  for (int k = 0; k < blocks; ++k) {
    loo[static_cast<std::size_t>(k)] = (total - block_sum[static_cast<std::size_t>(k)]) /
                                       static_cast<double>(steps - block_n[static_cast<std::size_t>(k)]);
    jk_mean += loo[static_cast<std::size_t>(k)];
  }
  jk_mean /= blocks;
  double var = 0.0;
  for (double v : loo) var += (v - jk_mean) * (v - jk_mean);
  r.estimator_sigma = std::sqrt(var * (blocks - 1) / blocks);
  r.signed_value = mean;
  r.value = std::abs(mean);
  return r;
}

// ---------------------------------------------------------------- level statistics

namespace {

struct Unfolded {
  std::vector<double> spacings;  // normalized to unit mean
  std::vector<double> ratios;
};

Unfolded unfold(const Eigen::VectorXd& all, double lo, double hi) {
  std::vector<double> e;
  for (Eigen::Index k = 0; k < all.size(); ++k)
    if (all[k] >= lo && all[k] <= hi) e.push_back(all[k]);
  if (e.size() < 50) throw Error(Errc::too_few_levels, std::to_string(e.size()) + " levels in window");
  std::sort(e.begin(), e.end());
  const Eigen::Index n = static_cast<Eigen::Index>(e.size());
  const double a = e.front(), b = e.back();
  const double span = b > a ? b - a : 1.0;
  constexpr int deg = 7;
  Eigen::MatrixXd V(n, deg + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = 2.0 * (e[static_cast<std::size_t>(i)] - a) / span - 1.0;
    double p = 1.0;
    for (int k = 0; k <= deg; ++k) {
      V(i, k) = p;
      p *= t;
    }
    y[i] = static_cast<double>(i);
  }
  const Eigen::VectorXd c = V.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd eps = V * c;
  Unfolded u;
  double mean = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    u.spacings.push_back(eps[i + 1] - eps[i]);
    mean += u.spacings.back();
  }
  mean /= static_cast<double>(u.spacings.size());
  for (auto& s : u.spacings) s /= mean;
  for (std::size_t i = 0; i + 2 < e.size(); ++i) {
    const double d1 = e[i + 1] - e[i], d2 = e[i + 2] - e[i + 1];
    const double mx = std::max(d1, d2);
    if (mx > 0.0) u.ratios.push_back(std::min(d1, d2) / mx);
  }
  return u;
}

SpectralStatistics summarize(const std::vector<double>& s, const std::vector<double>& r, double lo, double hi,
                             int levels) {
  SpectralStatistics st;
  st.window_lo = lo;
  st.window_hi = hi;
  st.levels = levels;
  double m = 0.0;
  for (double v : s) m += v;
  m /= static_cast<double>(s.size());
  double var = 0.0;
  for (double v : s) var += (v - m) * (v - m);
  st.spacing_variance = var / static_cast<double>(s.size());
  double gr = 0.0;
  for (double v : r) gr += v;
  st.mean_gap_ratio = r.empty() ? 0.0 : gr / static_cast<double>(r.size());
  return st;
}

}  // namespace

SpectralStatistics level_statistics(const Eigen::VectorXd& eigenvalues, double lo, double hi) {
  const Unfolded u = unfold(eigenvalues, lo, hi);
  return summarize(u.spacings, u.ratios, lo, hi, static_cast<int>(u.spacings.size()) + 1);
}

SpectralStatistics level_statistics(std::span<const Eigen::VectorXd> spectra, double lo, double hi) {
  std::vector<double> s, r;
  int levels = 0;
  for (const auto& e : spectra) {
    const Unfolded u = unfold(e, lo, hi);
    s.insert(s.end(), u.spacings.begin(), u.spacings.end());
    r.insert(r.end(), u.ratios.begin(), u.ratios.end());
    levels += static_cast<int>(u.spacings.size()) + 1;
  }
  require(!s.empty(), "no spectra given");
  return summarize(s, r, lo, hi, levels);
}

cmat sample_gue(int dim, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  auto gauss = [&] {
    // Box-Muller on 53-bit uniforms
    double u1 = unit_uniform(eng());
    while (u1 <= 0.0) u1 = unit_uniform(eng());
    const double u2 = unit_uniform(eng());
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  };
  cmat A(dim, dim);
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r < dim; ++r) A(r, c) = cplx(gauss(), gauss());
  return (A + A.adjoint()) * 0.5;
}

}  // namespace nci
