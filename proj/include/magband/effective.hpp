#pragma once

#include <functional>
#include <vector>

#include "magband/bundle.hpp"
#include "magband/family.hpp"
#include "magband/linalg.hpp"

namespace magband {

// Slowly varying potentials on the r-plane. Gradients and the field are
// optional; missing ones are obtained by central differences.
struct SlowFields {
  std::function<double(Vec2)> phi;
  std::function<Vec2(Vec2)> grad_phi;
  std::function<Vec2(Vec2)> a;
  std::function<double(Vec2)> b;

  double potential(Vec2 r) const { return phi ? phi(r) : 0.0; }
  Vec2 potential_gradient(Vec2 r) const;
  Vec2 vector_potential(Vec2 r) const { return a ? a(r) : Vec2{}; }
  double field(Vec2 r) const;
  // |B - curl A| with curl A by central differences.
  double field_consistency(Vec2 r) const;
};

inline constexpr double kFieldFdStep = 1e-5;

// Uniform field B in the gauge A = (-B r2, 0) with potential Phi(r) = c.
SlowFields uniform_field(double b, double c = 0.0);

// Rank-one frame with its continuation beyond the sampled cell: columns
// outside 0..N1 are reached through V1 and the transition function, rows
// outside 0..N2-1 through V2.
class FrameField {
 public:
  explicit FrameField(const Frame& frame);

  const Frame& frame() const { return frame_; }
  CVector at(int i, int j) const;
  // Derivative along kappa_axis (axis 0 or 1) at grid point (i, j) from the
  // neighbours at multiples of `spacing`. With `covariant`, each neighbour
  // is first rephased onto phi(i, j). order is 2, 4 or 6.
  CVector derivative(int i, int j, int axis, int order, int spacing, bool covariant) const;
  // d/dkappa of the local phase, -i <phi, d phi> by log-links, order 4.
  double phase_derivative(int i, int j, int axis) const;
  // Re <phi, d phi> = d |phi|^2 / 2, order 4.
  double normalization_drift(int i, int j, int axis) const;

 private:
  Frame frame_;
  std::vector<cplx> alpha_;
};

// A_j = -(i / 2 pi) <phi, d_kappa_j phi> on the frame grid, i = 0..N1
// (closure column included), j = 0..N2-1.
struct ConnectionCoefficients {
  int count1 = 0;
  int count2 = 0;
  int theta = 0;
  std::vector<double> a1;
  std::vector<double> a2;
  double max_real_residue = 0.0;       // |Re <phi, d phi>|
  double max_periodicity_defect = 0.0;  // of A1 and of A2 - theta kappa1 across kappa1 = 1

  double at1(int i, int j) const { return a1[static_cast<std::size_t>(i * count2 + j)]; }
  double at2(int i, int j) const { return a2[static_cast<std::size_t>(i * count2 + j)]; }
};

inline constexpr double kRealResidueLimit = 1e-6;

// Throws NumericalError when |Re <phi, d phi>| exceeds kRealResidueLimit.
ConnectionCoefficients connection_coefficients(const Frame& canonical, int theta);

// M(k) = -Im <d1 phi, (H - E) d2 phi> with k-derivatives taken by covariant
// central stencils of the given order; samples on i = 0..N1-1, j = 0..N2-1.
std::vector<double> rammal_wilkinson(const Frame& frame, const BlochMatrixFamily& family,
                                     const std::vector<double>& energy, int order = 6);

// Band energy on the frame grid (i = 0..N1-1, j = 0..N2-1).
std::vector<double> frame_energies(const Frame& frame);

// Periodic cubic-convolution interpolation of samples on i = 0..n1-1,
// j = 0..n2-1 at reduced coordinates (u1, u2) in grid units.
class PeriodicInterpolator {
 public:
  PeriodicInterpolator() = default;
  PeriodicInterpolator(int n1, int n2, std::vector<double> values);
  double operator()(double u1, double u2) const;

 private:
  int n1_ = 0;
  int n2_ = 0;
  std::vector<double> v_;
};

struct EffectiveSymbol {
  int theta = 0;
  double period1 = 0.0;
  double period2 = 0.0;
  double offset = 0.0;
  int count1 = 0;
  int count2 = 0;
  double epsilon = 0.0;
  PeriodicInterpolator energy;
  PeriodicInterpolator d1_energy;
  PeriodicInterpolator d2_energy;
  PeriodicInterpolator a1;
  PeriodicInterpolator p2;  // A2 - theta kappa1
  PeriodicInterpolator rw;  // Rammal-Wilkinson term

  double e(Vec2 k) const { return energy(u1(k), u2(k)); }
  Vec2 grad_e(Vec2 k) const { return {d1_energy(u1(k), u2(k)), d2_energy(u1(k), u2(k))}; }
  double m(Vec2 k) const { return rw(u1(k), u2(k)); }
  double conn1(Vec2 k) const { return a1(u1(k), u2(k)); }
  double conn2_periodic(Vec2 k) const { return p2(u1(k), u2(k)); }

 private:
  double u1(Vec2 k) const { return (k.x / period1 - offset) * count1; }
  double u2(Vec2 k) const { return k.y / period2 * count2; }
};

// Builds the sampled symbol data from a canonical-gauge rank-one frame.
EffectiveSymbol effective_symbol(const Frame& canonical, int theta, double epsilon = 0.0);

// Builds the canonical frame of one isolated band first (count x count grid).
EffectiveSymbol effective_symbol(const BlochMatrixFamily& family, int band, int count,
                                 double epsilon = 0.0);

using SymbolEvaluator = std::function<double(Vec2 k, Vec2 r)>;

// h0(k, r) = E(k - A(r)) + Phi(r).
SymbolEvaluator principal_symbol(const EffectiveSymbol& sym, const SlowFields& fields);

// h1(k, r) = A(k, r) . (B grad E(k~)^perp - grad Phi) + B M(k~), k~ = k - A(r),
// with A(k, r) = A1(k~) gamma1 + (A2(k~) - theta kappa1(k)) gamma2. Requires
// the gauge A2 = 0; evaluation throws std::invalid_argument otherwise.
SymbolEvaluator subprincipal_symbol(const EffectiveSymbol& sym, const SlowFields& fields);

// h0 + epsilon h1.
SymbolEvaluator effective_hamiltonian_symbol(const EffectiveSymbol& sym, const SlowFields& fields);

}  // namespace magband
