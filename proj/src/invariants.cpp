#include "nci/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nci/error.hpp"

namespace nci {

PairingResult make_pairing_result(cplx value) {
  PairingResult r;
  r.value = value;
  r.quantized_value = std::lround(value.real());
  r.deviation = std::abs(value - cplx(static_cast<double>(r.quantized_value), 0.0));
  return r;
}

int default_half_size(const PointPattern& p, int j) {
  if (!p.lattice) throw Error(Errc::mode_unavailable, "roots_of_unity needs integer cell coordinates");
  const auto& t = *p.lattice;
  if (p.is_torus()) return (t.extent[j] - 1) / 2;
  return t.cells.col(j).maxCoeff() - t.cells.col(j).minCoeff();
}

cplx roots_factor(int L, int n) {
  const int M = 2 * L + 1;
  cplx s = 0.0;
  for (int k = 1; k < M; ++k) {
    const cplx z = std::polar(1.0, 2.0 * std::numbers::pi * k / M);
    // z^L/(1-z) alone sums to n - 1; one more power of z makes the factor exactly n for -L <= n <= L
    const int e = (((L + 1 + n) % M) + M) % M;
    s += std::pow(z, e) / (1.0 - z);
  }
  return s;
}

cmat derivation_factors(const PointPattern& p, std::span<const int> row_sites, std::span<const int> col_sites, int j,
                        const DerivationKernel& kernel) {
  require(j >= 0 && j < p.dim(), "direction out of range");
  const Eigen::Index nr = static_cast<Eigen::Index>(row_sites.size());
  const Eigen::Index nc = static_cast<Eigen::Index>(col_sites.size());
  cmat F(nr, nc);
  const cplx I(0.0, 1.0);

  if (kernel.mode == DerivationMode::roots_of_unity) {
    if (kernel.frame != Frame::lattice) throw Error(Errc::mode_unavailable, "roots_of_unity works in the lattice frame");
    if (!p.lattice) throw Error(Errc::mode_unavailable, "roots_of_unity needs integer cell coordinates");
    const int L = (static_cast<int>(kernel.L.size()) > j && kernel.L[static_cast<std::size_t>(j)] > 0)
                      ? kernel.L[static_cast<std::size_t>(j)]
                      : default_half_size(p, j);
    require(L >= 1, "roots_of_unity half-size must be positive");
    const int M = 2 * L + 1;
    std::vector<cplx> table(static_cast<std::size_t>(M));
    for (int n = 0; n < M; ++n) table[static_cast<std::size_t>(n)] = I * roots_factor(L, n);
    const auto& cells = p.lattice->cells;
    for (Eigen::Index c = 0; c < nc; ++c) {
      const int xc = cells(col_sites[static_cast<std::size_t>(c)], j);
      for (Eigen::Index r = 0; r < nr; ++r) {
        const int d = cells(row_sites[static_cast<std::size_t>(r)], j) - xc;
        F(r, c) = table[static_cast<std::size_t>(((d % M) + M) % M)];
      }
    }
    return F;
  }

  if (kernel.frame == Frame::lattice) {
    if (!p.lattice) throw Error(Errc::mode_unavailable, "lattice frame needs integer cell coordinates");
    for (Eigen::Index c = 0; c < nc; ++c)
      for (Eigen::Index r = 0; r < nr; ++r)
        F(r, c) = I * static_cast<double>(
                          cell_displacement(p, row_sites[static_cast<std::size_t>(r)], col_sites[static_cast<std::size_t>(c)])[j]);
    return F;
  }

  if (!p.is_torus()) {
    for (Eigen::Index c = 0; c < nc; ++c) {
      const double xc = p.positions(col_sites[static_cast<std::size_t>(c)], j);
      for (Eigen::Index r = 0; r < nr; ++r) F(r, c) = I * (p.positions(row_sites[static_cast<std::size_t>(r)], j) - xc);
    }
    return F;
  }
  for (Eigen::Index c = 0; c < nc; ++c)
    for (Eigen::Index r = 0; r < nr; ++r)
      F(r, c) = I * minimal_displacement(p, col_sites[static_cast<std::size_t>(c)], row_sites[static_cast<std::size_t>(r)])[j];
  return F;
}

namespace {

std::vector<int> index_sites(const SiteBasis& b) {
  std::vector<int> s(static_cast<std::size_t>(b.dim()));
  for (int k = 0; k < b.dim(); ++k) s[static_cast<std::size_t>(k)] = b.site_of(k);
  return s;
}

}  // namespace

cmat derivation_factors(const SiteBasis& basis, int j, const DerivationKernel& kernel) {
  const auto sites = index_sites(basis);
  return derivation_factors(*basis.pattern, sites, sites, j, kernel);
}

cmat derive(const cmat& A, const SiteBasis& basis, int j, const DerivationKernel& kernel) {
  require(A.rows() == basis.dim() && A.cols() == basis.dim(), "operator does not match basis");
  return derivation_factors(basis, j, kernel).cwiseProduct(A);
}

std::vector<int> window_indices(const SiteBasis& basis, const Window& w, int* window_sites_out) {
  const auto& p = *basis.pattern;
  const double collar = w.collar.value_or(default_collar(p));
  const auto sites = window_sites(p, collar);
  if (sites.empty()) throw Error(Errc::empty_window, "no sites survive a collar of " + std::to_string(collar));
  if (window_sites_out) *window_sites_out = static_cast<int>(sites.size());
  std::vector<int> idx;
  idx.reserve(sites.size() * static_cast<std::size_t>(basis.orbitals));
  for (int s : sites)
    for (int o = 0; o < basis.orbitals; ++o) idx.push_back(basis.index(s, o));
  return idx;
}

double window_volume(const SiteBasis& basis, const Window& w, Frame frame) {
  const auto& p = *basis.pattern;
  if (p.is_torus()) return frame == Frame::lattice ? static_cast<double>(p.cell_count()) : p.geometry.volume();
  int ns = 0;
  window_indices(basis, w, &ns);
  if (frame == Frame::lattice) {
    if (!p.lattice) throw Error(Errc::mode_unavailable, "lattice frame needs integer cell coordinates");
    return static_cast<double>(ns) / p.lattice->sites_per_cell;
  }
  return ns / p.density;
}

cplx trace_per_volume(const cmat& A, const SiteBasis& basis, const Window& w, Frame frame) {
  require(A.rows() == basis.dim() && A.cols() == basis.dim(), "operator does not match basis");
  const auto idx = window_indices(basis, w);
  cplx s = 0.0;
  for (int k : idx) s += A(k, k);
  return s / window_volume(basis, w, frame);
}

namespace {

double lambda_d_abs(int order) {
  double f = 1.0;
  for (int k = 2; k <= order / 2; ++k) f *= k;
  return std::pow(2.0 * std::numbers::pi, order / 2) / f;
}

}  // namespace

cplx lambda_d(int order) {
  // (2 i pi)^{k} / k!, k = order/2
  const int k = order / 2;
  cplx ik = 1.0;
  for (int t = 0; t < k; ++t) ik *= cplx(0.0, 1.0);
  return ik * lambda_d_abs(order);
}

PairingResult chern_pairing(const cmat& P, const SiteBasis& basis, std::span<const int> J,
                            const DerivationKernel& kernel, const Window& w) {
  require(J.size() % 2 == 0 && !J.empty(), "J must have even, nonzero size");
  {
    std::vector<int> js(J.begin(), J.end());
    std::sort(js.begin(), js.end());
    require(std::adjacent_find(js.begin(), js.end()) == js.end(), "J directions must be distinct");
  }
  require(P.rows() == basis.dim() && P.cols() == basis.dim(), "projection does not match basis");
  int nsites = 0;
  const auto idx = window_indices(basis, w, &nsites);
  const double vol = window_volume(basis, w, kernel.frame);
  const Eigen::Index nw = static_cast<Eigen::Index>(idx.size());

  std::vector<cmat> D;
  for (int j : J) D.push_back(derivation_factors(basis, j, kernel).cwiseProduct(P));

  cmat Pw(nw, P.cols());
  for (Eigen::Index r = 0; r < nw; ++r) Pw.row(r) = P.row(idx[static_cast<std::size_t>(r)]);

  std::vector<int> perm(J.size());
  for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = static_cast<int>(k);
  cplx total = 0.0;
  do {
    int inversions = 0;
    for (std::size_t a = 0; a < perm.size(); ++a)
      for (std::size_t b = a + 1; b < perm.size(); ++b) inversions += perm[a] > perm[b];
    const cmat& last = D[static_cast<std::size_t>(perm.back())];
    cmat R(last.rows(), nw);
    for (Eigen::Index c = 0; c < nw; ++c) R.col(c) = last.col(idx[static_cast<std::size_t>(c)]);
    for (std::size_t t = perm.size() - 1; t-- > 0;) R = D[static_cast<std::size_t>(perm[t])] * R;
    cplx tr = 0.0;
    for (Eigen::Index c = 0; c < nw; ++c) tr += Pw.row(c).transpose().cwiseProduct(R.col(c)).sum();
    total += (inversions % 2 ? -1.0 : 1.0) * tr;
  } while (std::next_permutation(perm.begin(), perm.end()));

  PairingResult res = make_pairing_result(lambda_d(static_cast<int>(J.size())) * total / vol);
  res.window_sites = nsites;
  res.volume = vol;
  return res;
}

PairingResult chern_pairing(const FermiProjection& P, const SiteBasis& basis, std::span<const int> J,
                            const DerivationKernel& kernel, const Window& w) {
  PairingResult r = chern_pairing(P.P, basis, J, kernel, w);
  r.degenerate = P.degenerate;
  return r;
}

PairingResult winding_pairing(const ChiralUnitary& U, const DerivationKernel& kernel) {
  const auto& p = *U.basis.pattern;
  require(p.dim() == 1, "winding pairing is one-dimensional");
  std::vector<int> ms, ps;
  for (int k : U.minus_index) ms.push_back(U.basis.site_of(k));
  for (int k : U.plus_index) ps.push_back(U.basis.site_of(k));
  const cmat Ud = U.U.adjoint();
  const cmat dUd = derivation_factors(p, ps, ms, 0, kernel).cwiseProduct(Ud);
  const cplx tr = (U.U.cwiseProduct(dUd.transpose())).sum();
  const double vol = kernel.frame == Frame::lattice ? static_cast<double>(p.cell_count()) : p.geometry.volume();
  PairingResult r = make_pairing_result(cplx(0.0, 1.0) * tr / vol);
  r.window_sites = p.size();
  r.volume = vol;
  return r;
}

}  // namespace nci
