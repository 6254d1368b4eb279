#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "nci/invariants.hpp"

namespace nci {

// N-fermion sector: ascending site subsets in lexicographic order.
class FockBasis {
 public:
  FockBasis(PatternPtr pattern, int N);

  const PatternPtr& pattern() const { return pattern_; }
  int sites() const { return sites_; }
  int particles() const { return N_; }
  int dim() const { return static_cast<int>(states_.size()); }
  const std::vector<int>& state(int k) const { return states_[static_cast<std::size_t>(k)]; }
  // Rank of an ascending subset, -1 if it is not a valid state.
  int index(std::span<const int> sorted) const;

 private:
  PatternPtr pattern_;
  int sites_;
  int N_;
  std::vector<std::vector<int>> states_;
  std::vector<std::vector<long long>> binom_;
};

using FockPtr = std::shared_ptr<const FockBasis>;

// throws SectorTooLarge when C(S, N) > 2e5
FockPtr build_fock_basis(PatternPtr pattern, int N);

struct ManyBodyOperator {
  FockPtr basis;
  cmat entries;
};

// Second quantization sum h(x,y) a*_x a_y of a dense one-body matrix.
ManyBodyOperator second_quantize(const cmat& h, FockPtr basis);

// order 1: sum h(x,y) a*_x a_y; order 2: sum_{x1<x2, y1<y2} h a*_x1 a*_x2 a_y2 a_y1.
// Zero when the order exceeds the particle number.
ManyBodyOperator represent(const CoefficientSpec& spec, FockPtr basis, const DisorderField* disorder = nullptr);

ManyBodyOperator number_operator(FockPtr basis);

// Diagonal sum of coordinate j over the occupied sites. Torus patterns need allow_torus.
ManyBodyOperator position_operator(FockPtr basis, int j, bool allow_torus = false);

// i (X_zeta - X_xi)_j A_{zeta xi}
ManyBodyOperator mb_derive(const ManyBodyOperator& A, int j, bool allow_torus = false);
// i [X_j, A] by matrix products
ManyBodyOperator mb_derive_commutator(const ManyBodyOperator& A, int j, bool allow_torus = false);

inline ManyBodyOperator current_operator(const ManyBodyOperator& H, int j) { return mb_derive(H, j); }

// Anchored states: lowest site inside the window. Normalized by the number of window sites.
cplx mb_trace_per_volume(const ManyBodyOperator& A, const Window& w = {});

PairingResult mb_chern_pairing(const ManyBodyOperator& P, std::span<const int> J, const Window& w = {});

}  // namespace nci
