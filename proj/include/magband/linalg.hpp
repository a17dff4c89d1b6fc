#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>

namespace magband {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// Dense complex Hermitian matrix (energies in hopping units). Hermiticity is
// checked where it matters (eigh), not on every construction.
using HermitianMatrix = CMatrix;

// Point in the (quasi-)momentum plane or in real space.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }

inline constexpr double kHermiticityTol = 1e-12;

struct EigenDecomposition {
  RVector values;   // ascending
  CMatrix vectors;  // orthonormal columns, paired with values
};

// Largest |H(i,j) - conj(H(j,i))|.
double hermiticity_defect(const CMatrix& h);

// Full eigendecomposition of a Hermitian matrix. Each eigenvector has its
// largest-modulus component made real positive (the first such component
// on ties); inside a degenerate cluster vectors are ordered lexicographically
// by (re, im) of their components. Throws NumericalError if the input is
// not Hermitian to kHermiticityTol.
EigenDecomposition eigh(const HermitianMatrix& h);

// Eigenvalues only, ascending. Same hermiticity check as eigh.
RVector eigvalsh(const HermitianMatrix& h);

// Nearest unitary (polar factor) of a square matrix.
CMatrix polar_unitary(const CMatrix& m);

// Frobenius norm of U*U - 1.
double unitarity_defect(const CMatrix& u);

// Principal logarithm of a unitary matrix: returns Hermitian K with
// exp(iK) = u and eigen-phases of u taken in (-pi, pi].
CMatrix unitary_log(const CMatrix& u);

// exp(i s K) for Hermitian K.
CMatrix unitary_exp(const CMatrix& k, double s);

// Uniform grid over [0, L1) x [0, L2).
struct KGrid {
  double period1 = 0.0;
  double period2 = 0.0;
  int count1 = 0;
  int count2 = 0;

  double step1() const { return period1 / count1; }
  double step2() const { return period2 / count2; }
  Vec2 point(int i, int j) const { return {i * step1(), j * step2()}; }
  std::size_t size() const { return static_cast<std::size_t>(count1) * count2; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * count2 + j; }
};

// Throws std::invalid_argument unless all arguments are positive.
KGrid make_grid(double period1, double period2, int count1, int count2);

}  // namespace magband
