#include "nci/spectral.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nci/error.hpp"

extern "C" void openblas_set_num_threads(int);

namespace nci {

void set_blas_threads(int n) { openblas_set_num_threads(std::max(1, n)); }

namespace {
const bool blas_pinned = [] {
  openblas_set_num_threads(1);
  return true;
}();

int first_support(const cmat& V, Eigen::Index k) {
  for (Eigen::Index i = 0; i < V.rows(); ++i)
    if (std::abs(V(i, k)) > 1e-10) return static_cast<int>(i);
  return static_cast<int>(V.rows());
}

void check_hermitian(const cmat& H) {
  if (H.rows() != H.cols()) throw Error(Errc::precondition, "matrix is not square");
  if (H.size() == 0) return;
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if (hermiticity_residual(H) > 1e-10 * scale) throw Error(Errc::precondition, "matrix is not Hermitian");
}

}  // namespace

EigenDecomposition diagonalize(const cmat& H) {
  (void)blas_pinned;
  check_hermitian(H);
  EigenDecomposition out;
  const lapack_int n = static_cast<lapack_int>(H.rows());
  out.vectors.resize(n, n);
  out.values.resize(n);
  if (n == 0) return out;
  // zheevd from the system LAPACK returns wrong eigenvectors above a few hundred rows; MRRR is fine
  cmat A = H;
  lapack_int found = 0;
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'A', 'U', n, A.data(), n, 0.0, 0.0, 0, 0, 0.0, &found,
                                         out.values.data(), out.vectors.data(), n, isuppz.data());
  if (info != 0 || found != n) throw Error(Errc::convergence_failure, "zheevr info " + std::to_string(info));

  // Exact ties: order by earliest basis-index support.
  bool ties = false;
  for (lapack_int k = 1; k < n; ++k) ties |= out.values[k] == out.values[k - 1];
  if (ties) {
    std::vector<int> order(static_cast<std::size_t>(n)), support(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (lapack_int k = 0; k < n; ++k) support[static_cast<std::size_t>(k)] = first_support(out.vectors, k);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      if (out.values[a] != out.values[b]) return out.values[a] < out.values[b];
      return support[static_cast<std::size_t>(a)] < support[static_cast<std::size_t>(b)];
    });
    EigenDecomposition sorted;
    sorted.values.resize(n);
    sorted.vectors.resize(n, n);
    for (lapack_int k = 0; k < n; ++k) {
      sorted.values[k] = out.values[order[static_cast<std::size_t>(k)]];
      sorted.vectors.col(k) = out.vectors.col(order[static_cast<std::size_t>(k)]);
    }
    return sorted;
  }
  return out;
}

Eigen::VectorXd eigenvalues(const cmat& H) {
  (void)blas_pinned;
  check_hermitian(H);
  cmat A = H;
  const lapack_int n = static_cast<lapack_int>(H.rows());
  Eigen::VectorXd w(n);
  if (n == 0) return w;
  lapack_int found = 0;
  cplx unused;
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'N', 'A', 'U', n, A.data(), n, 0.0, 0.0, 0, 0, 0.0, &found,
                                         w.data(), &unused, 1, isuppz.data());
  if (info != 0 || found != n) throw Error(Errc::convergence_failure, "zheevr info " + std::to_string(info));
  return w;
}

FermiProjection fermi_projection(const EigenDecomposition& eig, double E_F) {
  FermiProjection out;
  out.fermi_energy = E_F;
  const Eigen::Index n = eig.values.size();
  Eigen::Index rank = 0;
  while (rank < n && eig.values[rank] <= E_F + 1e-12) ++rank;
  for (Eigen::Index k = 0; k < n; ++k) out.degenerate |= std::abs(eig.values[k] - E_F) <= 1e-12;
  out.rank = static_cast<int>(rank);
  out.occupied = eig.vectors.leftCols(rank);
  out.P = out.occupied * out.occupied.adjoint();
  return out;
}

double min_abs_eigenvalue(const Eigen::VectorXd& values) {
  return values.size() == 0 ? 0.0 : values.cwiseAbs().minCoeff();
}

cmat flat_band(const EigenDecomposition& eig, double gap_floor) {
  if (min_abs_eigenvalue(eig.values) <= gap_floor)
    throw Error(Errc::gapless, "zero lies in the spectrum (min |E| = " + std::to_string(min_abs_eigenvalue(eig.values)) + ")");
  Eigen::VectorXd s = eig.values.unaryExpr([](double v) { return v > 0 ? 1.0 : -1.0; });
  return eig.vectors * s.asDiagonal() * eig.vectors.adjoint();
}

ChiralUnitary chiral_flatten(const HamiltonianMatrix& h, const cmat& chirality) {
  const cmat& H = h.H;
  const Eigen::Index n = H.rows();
  require(chirality.rows() == n && chirality.cols() == n, "chirality size mismatch");
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((chirality * H * chirality + H).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw Error(Errc::not_chiral, "Sigma H Sigma != -H");

  ChiralUnitary out;
  out.basis = h.basis;
  cmat frame;  // columns: chirality eigenvectors, -1 block first
  const bool diag = (chirality - cmat(chirality.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
  if (diag) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double s = chirality(k, k).real();
      if (std::abs(std::abs(s) - 1.0) > 1e-12 || std::abs(chirality(k, k).imag()) > 1e-12)
        throw Error(Errc::not_chiral, "chirality is not an involution");
      (s < 0 ? out.minus_index : out.plus_index).push_back(static_cast<int>(k));
    }
  } else {
    EigenDecomposition ce = diagonalize(chirality);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (std::abs(std::abs(ce.values[k]) - 1.0) > 1e-10) throw Error(Errc::not_chiral, "chirality is not an involution");
      (ce.values[k] < 0 ? out.minus_index : out.plus_index).push_back(static_cast<int>(k));
    }
    frame = ce.vectors;
  }
  if (out.minus_index.size() != out.plus_index.size()) throw Error(Errc::not_chiral, "unbalanced chirality");

  const cmat S = flat_band(diagonalize(H));
  const Eigen::Index m = static_cast<Eigen::Index>(out.minus_index.size());
  out.U.resize(m, m);
  if (diag) {
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c < m; ++c) out.U(r, c) = S(out.minus_index[r], out.plus_index[c]);
  } else {
    cmat Vm(n, m), Vp(n, m);
    for (Eigen::Index k = 0; k < m; ++k) {
      Vm.col(k) = frame.col(out.minus_index[k]);
      Vp.col(k) = frame.col(out.plus_index[k]);
    }
    out.U = Vm.adjoint() * S * Vp;
  }
  return out;
}

cmat embed_chiral(const ChiralUnitary& u, int dim) {
  cmat S = cmat::Zero(dim, dim);
  const std::size_t m = u.minus_index.size();
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      const auto v = u.U(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      S(u.minus_index[r], u.plus_index[c]) = v;
      S(u.plus_index[c], u.minus_index[r]) = std::conj(v);
    }
  }
  return S;
}

}  // namespace nci
