#include "magband/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "magband/errors.hpp"

namespace magband {

namespace {

void require_hermitian(const CMatrix& h) {
  if (h.rows() != h.cols() || h.rows() == 0) {
    throw std::invalid_argument("eigh: matrix must be square and non-empty");
  }
  const double defect = hermiticity_defect(h);
  if (!(defect <= kHermiticityTol)) {
    std::ostringstream msg;
    msg << "eigh: matrix is not Hermitian (max |H - H*| = " << defect << ")";
    throw NumericalError(msg.str());
  }
}

void fix_phase(Eigen::Ref<CVector> v) {
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    // strict comparison with a relative margin keeps the choice stable when
    // two components tie up to rounding
    if (a > best_abs * (1.0 + 1e-12)) {
      best_abs = a;
      best = i;
    }
  }
  if (best_abs > 0.0) {
    v *= std::conj(v(best)) / best_abs;
    v(best) = cplx(std::abs(v(best)), 0.0);
  }
}

bool lexicographic_less(const CVector& a, const CVector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i).real() != b(i).real()) return a(i).real() < b(i).real();
    if (a(i).imag() != b(i).imag()) return a(i).imag() < b(i).imag();
  }
  return false;
}

}  // namespace

double hermiticity_defect(const CMatrix& h) {
  if (h.rows() != h.cols()) return std::numeric_limits<double>::infinity();
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

EigenDecomposition eigh(const HermitianMatrix& h) {
  require_hermitian(h);
  // symmetrise so that rounding in the input cannot leak into the solver
  const CMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericalError("eigh: solver did not converge");

  EigenDecomposition out{solver.eigenvalues(), solver.eigenvectors()};
  const Eigen::Index n = out.values.size();
  for (Eigen::Index c = 0; c < n; ++c) fix_phase(out.vectors.col(c));

  // reorder inside degenerate clusters
  const double scale = 1.0 + out.values.cwiseAbs().maxCoeff();
  const double tol = 1e-12 * scale;
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index stop = start + 1;
    while (stop < n && out.values(stop) - out.values(stop - 1) <= tol) ++stop;
    if (stop - start > 1) {
      std::vector<Eigen::Index> order(static_cast<std::size_t>(stop - start));
      std::iota(order.begin(), order.end(), start);
      std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return lexicographic_less(out.vectors.col(a), out.vectors.col(b));
      });
      const CMatrix block = out.vectors.middleCols(start, stop - start);
      // values stay in ascending order; inside a cluster they agree to tol
      for (std::size_t r = 0; r < order.size(); ++r)
        out.vectors.col(start + static_cast<Eigen::Index>(r)) = block.col(order[r] - start);
    }
    start = stop;
  }
  return out;
}

RVector eigvalsh(const HermitianMatrix& h) {
  require_hermitian(h);
  const CMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigvalsh: solver did not converge");
  return solver.eigenvalues();
}

CMatrix polar_unitary(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

double unitarity_defect(const CMatrix& u) {
  return (u.adjoint() * u - CMatrix::Identity(u.cols(), u.cols())).norm();
}

CMatrix unitary_log(const CMatrix& u) {
  // a unitary matrix is normal, so its complex Schur form is diagonal
  Eigen::ComplexSchur<CMatrix> schur(u);
  const CMatrix& t = schur.matrixT();
  const CMatrix& z = schur.matrixU();
  CMatrix phases = CMatrix::Zero(u.rows(), u.cols());
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    double a = std::arg(t(i, i));
    if (a <= -M_PI) a += 2.0 * M_PI;
    phases(i, i) = a;
  }
  const CMatrix k = z * phases * z.adjoint();
  return 0.5 * (k + k.adjoint());
}

CMatrix unitary_exp(const CMatrix& k, double s) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (k + k.adjoint()));
  const CVector phases = (cplx(0.0, s) * solver.eigenvalues().cast<cplx>()).array().exp();
  return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

KGrid make_grid(double period1, double period2, int count1, int count2) {
  if (!(period1 > 0.0) || !(period2 > 0.0)) {
    throw std::invalid_argument("make_grid: periods must be positive");
  }
  if (count1 <= 0 || count2 <= 0) {
    throw std::invalid_argument("make_grid: point counts must be positive");
  }
  return KGrid{period1, period2, count1, count2};
}

}  // namespace magband
