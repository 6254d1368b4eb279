#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nci/spectral.hpp"

namespace nci {

enum class DerivationMode { minimal_image, roots_of_unity };
enum class Frame { cartesian, lattice };

// Derivation d_j = i[X_j, .] realized either by minimal-image displacements
// or by the roots-of-unity sum over (2L_j+1)-th roots z != 1 with c_z = z^{L+1}/(1-z).
struct DerivationKernel {
  DerivationMode mode = DerivationMode::minimal_image;
  Frame frame = Frame::cartesian;
  std::vector<int> L;  // per direction; empty or 0 selects the default half-size

  static DerivationKernel minimal_image(Frame f = Frame::cartesian) { return {DerivationMode::minimal_image, f, {}}; }
  static DerivationKernel roots_of_unity(std::vector<int> L = {}) {
    return {DerivationMode::roots_of_unity, Frame::lattice, std::move(L)};
  }
};

struct Window {
  std::optional<double> collar;  // open patches only; unset = 20% of the patch radius
};

struct PairingResult {
  cplx value{};
  long quantized_value = 0;
  double deviation = 0.0;
  bool degenerate = false;
  int window_sites = 0;
  double volume = 0.0;
};

PairingResult make_pairing_result(cplx value);

int default_half_size(const PointPattern& p, int j);
// Sum over z != 1 of z^(L+1+n)/(1-z), (2L+1)-th roots of unity: n for |n| <= L, periodic mod 2L+1.
cplx roots_factor(int L, int n);

// Matrix F with d_j A = F .* A for A indexed by (row_sites x col_sites).
cmat derivation_factors(const PointPattern& p, std::span<const int> row_sites, std::span<const int> col_sites, int j,
                        const DerivationKernel& kernel);
cmat derivation_factors(const SiteBasis& basis, int j, const DerivationKernel& kernel);

cmat derive(const cmat& A, const SiteBasis& basis, int j, const DerivationKernel& kernel = {});

std::vector<int> window_indices(const SiteBasis& basis, const Window& w, int* window_sites = nullptr);
double window_volume(const SiteBasis& basis, const Window& w, Frame frame);

cplx trace_per_volume(const cmat& A, const SiteBasis& basis, const Window& w = {}, Frame frame = Frame::cartesian);

// (2 i pi)^{k} / k! with k = order / 2.
cplx lambda_d(int order);

// J lists directions (0-based), even length, distinct.
PairingResult chern_pairing(const cmat& P, const SiteBasis& basis, std::span<const int> J,
                            const DerivationKernel& kernel = {}, const Window& w = {});
PairingResult chern_pairing(const FermiProjection& P, const SiteBasis& basis, std::span<const int> J,
                            const DerivationKernel& kernel = {}, const Window& w = {});

PairingResult winding_pairing(const ChiralUnitary& U, const DerivationKernel& kernel = {});

}  // namespace nci
