#pragma once

#include <vector>

#include "nci/models.hpp"

namespace nci {

struct EigenDecomposition {
  Eigen::VectorXd values;  // ascending
  cmat vectors;            // columns
};

struct FermiProjection {
  cmat P;
  cmat occupied;  // orthonormal columns spanning the range of P
  double fermi_energy = 0.0;
  int rank = 0;
  bool degenerate = false;  // an eigenvalue lies within 1e-12 of E_F
};

struct ChiralUnitary {
  cmat U;                      // (chirality -1 rows) x (chirality +1 cols) block of sign(H)
  std::vector<int> minus_index;  // flattened basis index behind each row
  std::vector<int> plus_index;   // flattened basis index behind each column
  SiteBasis basis;
};

// Pins the BLAS backend to a fixed thread count (default 1 at load time).
void set_blas_threads(int n);

EigenDecomposition diagonalize(const cmat& H);
inline EigenDecomposition diagonalize(const HamiltonianMatrix& h) { return diagonalize(h.H); }
Eigen::VectorXd eigenvalues(const cmat& H);

FermiProjection fermi_projection(const EigenDecomposition& eig, double E_F);

// sign(H) = V sign(Lambda) V^dagger; throws GaplessError when min|lambda| <= gap_floor.
cmat flat_band(const EigenDecomposition& eig, double gap_floor = 1e-8);

ChiralUnitary chiral_flatten(const HamiltonianMatrix& h, const cmat& chirality);

// Embeds U back as the off-diagonal blocks of a matrix on the full space.
cmat embed_chiral(const ChiralUnitary& u, int dim);

double min_abs_eigenvalue(const Eigen::VectorXd& values);

}  // namespace nci
