#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "nci/invariants.hpp"

namespace nci {

struct CliffordRep {
  int d = 2;
  int n = 2;  // 2^{d/2}
  std::vector<cmat> gamma;
  cmat gamma0;
};

CliffordRep build_clifford(int d);

// Index layout on C^n (x) l2(sites x orbitals): gamma_index * dim + flattened site index.
struct DiracOperator {
  SiteBasis basis;
  CliffordRep clifford;
  Eigen::VectorXd w;
  Eigen::MatrixXd unit;  // per site: (x - w)/|x - w|
  Eigen::VectorXd dist;  // per site: |x - w|
  cmat D;
  cmat Dhat;
};

DiracOperator build_dirac(PatternPtr pattern, int orbitals, const CliffordRep& clifford, const Eigen::VectorXd& w);

struct IndexResult {
  int index = 0;
  double tau = 0.0;     // singular-value threshold
  double margin = 0.0;  // width of the gap that fixed tau
  int near_kernel = 0;  // singular values below tau
  int interior_right = 0;
  int interior_left = 0;
  std::vector<double> smallest;  // up to 8 smallest singular values
  cplx connes_chern{};           // (1/2) Tr{gamma0 Dhat [Dhat, P]^{d+1}} on the interior window
  cplx commutator_cube{};        // Tr (P - u P u*)^3 on the interior window, d = 2
};

struct IndexOptions {
  double collar_fraction = 0.4;  // interior window = radius * (1 - collar_fraction)
  bool cross_checks = true;
};

IndexResult fredholm_index(const FermiProjection& P, const DiracOperator& dirac, const IndexOptions& opt = {});

// tr(gamma0 prod_i gamma.(hat(y_i - w) - hat(y_{i+1} - w))) with y_{d+1} = 0.
cplx identity_integrand(const CliffordRep& c, const std::vector<Eigen::VectorXd>& y, const Eigen::VectorXd& w);
// Lambda_d * det[y_1 ... y_d].
cplx identity_rhs(const std::vector<Eigen::VectorXd>& y);
// tr(gamma0 (gamma.y_1)...(gamma.y_d)).
cplx gamma_trace(const CliffordRep& c, const std::vector<Eigen::VectorXd>& y);

struct IdentityEstimate {
  cplx lhs{};
  double sigma = 0.0;  // standard error of lhs (complex modulus)
  cplx rhs{};
  double box_radius = 0.0;
  double tail_bound = 0.0;
  long samples = 0;
};

// Upper bound on the integral of |integrand| outside the ball of radius B about the origin.
double identity_tail_bound(const CliffordRep& c, const std::vector<Eigen::VectorXd>& y, double B);

// box_radius <= 0 picks the smallest ball whose tail bound is half the tolerance.
IdentityEstimate geometric_identity_continuum(const std::vector<Eigen::VectorXd>& y, long samples, double box_radius,
                                              std::uint64_t seed, double tolerance);

using PatternGenerator = std::function<PointPattern(std::uint64_t seed)>;

// Averages sum_{w in L} integrand over pattern realizations.
IdentityEstimate geometric_identity_delone(const std::vector<Eigen::VectorXd>& y, const PatternGenerator& gen,
                                           int realizations, std::uint64_t seed);

// s * (hat(s x + y) - hat(s x)).
Eigen::VectorXd phase_difference_scaled(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double s);

}  // namespace nci
