#pragma once

#include <functional>

#include "magband/linalg.hpp"

namespace magband {

using MatrixField = std::function<CMatrix(Vec2)>;

// Hermitian matrix family k -> H(k) over the plane, equivariant under the
// period lattice:
//   H(k + L1 e1) = V1(k) H(k) V1(k)*,   H(k + L2 e2) = V2(k) H(k) V2(k)*.
// Eigenvectors continue across a period as u(k + L_mu e_mu) = V_mu(k) u(k).
// Empty gluing fields mean strict periodicity.
struct BlochMatrixFamily {
  int dim = 0;
  double period1 = 0.0;
  double period2 = 0.0;
  MatrixField hamiltonian;
  MatrixField glue1;
  MatrixField glue2;
  int total_chern = 0;  // declared sum over all bands

  CMatrix operator()(Vec2 k) const { return hamiltonian(k); }
  CMatrix gluing1(Vec2 k) const {
    return glue1 ? glue1(k) : CMatrix(CMatrix::Identity(dim, dim));
  }
  CMatrix gluing2(Vec2 k) const {
    return glue2 ? glue2(k) : CMatrix(CMatrix::Identity(dim, dim));
  }

  // max of the two equivariance residuals at k (Frobenius norm)
  double equivariance_defect(Vec2 k) const {
    const CMatrix h = hamiltonian(k);
    const CMatrix v1 = gluing1(k);
    const CMatrix v2 = gluing2(k);
    const double d1 = (hamiltonian({k.x + period1, k.y}) - v1 * h * v1.adjoint()).norm();
    const double d2 = (hamiltonian({k.x, k.y + period2}) - v2 * h * v2.adjoint()).norm();
    return d1 > d2 ? d1 : d2;
  }
};

}  // namespace magband
