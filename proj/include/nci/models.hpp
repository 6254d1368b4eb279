#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nci/pattern.hpp"

namespace nci {

using cplx = std::complex<double>;
using cmat = Eigen::MatrixXcd;

// Flattened index = site * orbitals + orbital.
struct SiteBasis {
  PatternPtr pattern;
  int orbitals = 1;

  SiteBasis() = default;
  SiteBasis(PatternPtr p, int orb) : pattern(std::move(p)), orbitals(orb) {}

  int dim() const { return pattern->size() * orbitals; }
  int site_of(int idx) const { return idx / orbitals; }
  int orbital_of(int idx) const { return idx % orbitals; }
  int index(int site, int orbital) const { return site * orbitals + orbital; }
};

struct HamiltonianMatrix {
  SiteBasis basis;
  cmat H;
};

// One entry of a kernel argument tuple. Positions are unwrapped relative to
// the first site of the tuple (first site at its stored position).
struct KernelSite {
  int site = 0;
  int orbital = 0;
  Eigen::VectorXd position;
  double disorder = 0.0;
};

// order 1: kernel({x, y}) = <x|h|y>.
// order 2: kernel({x1, x2, y1, y2}) = <x1 x2|h|y1 y2>, called with x1 < x2 and y1 < y2.
struct CoefficientSpec {
  int order = 1;
  double range = 1.0;
  std::function<cplx(std::span<const KernelSite>)> kernel;
  // minimal-image distances carry rounding from the torus wrap
  bool reaches(double d) const { return d <= range * (1.0 + 1e-12); }
};

// Kernel arguments for a tuple of flattened indices.
std::vector<KernelSite> kernel_tuple(const SiteBasis& basis, std::span<const int> idx, const DisorderField* disorder);

double hermiticity_residual(const cmat& H);

// Sampled checks of hermiticity, translation equivariance and range.
// Throws SpecViolation naming the first failed constraint.
void validate_spec(const SiteBasis& basis, const CoefficientSpec& spec, const DisorderField* disorder,
                   std::uint64_t sample_seed = 0x5eed);

HamiltonianMatrix build_from_spec(const SiteBasis& basis, const CoefficientSpec& spec,
                                  const DisorderField* disorder = nullptr);

HamiltonianMatrix build_haldane(PatternPtr pattern, double t2, double W, const DisorderField* disorder);
inline HamiltonianMatrix build_haldane(PatternPtr pattern, double t2) {
  return build_haldane(std::move(pattern), t2, 0.0, nullptr);
}

enum class WireDisorder { shared, independent };

HamiltonianMatrix build_chiral_wire(PatternPtr chain, double m, double W1, double W2, const DisorderField& xi_t,
                                    const DisorderField& xi_m);
HamiltonianMatrix build_chiral_wire(PatternPtr chain, double m, double W1, double W2, std::uint64_t seed,
                                    WireDisorder mode = WireDisorder::shared);
HamiltonianMatrix build_chiral_wire(PatternPtr chain, double m);

// sigma_3 tensor identity in the wire layout.
cmat chiral_operator(const SiteBasis& basis);

HamiltonianMatrix build_amorphous_magnetic(PatternPtr pattern, double theta, double decay);

// Staggered on-site +-mass on a honeycomb pattern, no hopping.
HamiltonianMatrix build_atomic_limit(PatternPtr pattern, double mass);

// Binary dump: "NCIM", u32 version, u64 rows, u64 cols, u32 orbitals,
// u32 layout (0 = site-major), then row-major (re, im) doubles, little-endian.
void write_matrix(std::ostream& os, const HamiltonianMatrix& h);
cmat read_matrix(std::istream& is, int* orbitals = nullptr);

}  // namespace nci
