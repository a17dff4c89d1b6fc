#pragma once

#include <vector>

#include "magband/family.hpp"
#include "magband/linalg.hpp"
#include "magband/topology.hpp"

namespace magband {

// Spectral projector of a contiguous band group, represented through an
// orthonormal basis of its range.
struct ProjectorFamily {
  BlochMatrixFamily family;
  BandGroup bands;
  double min_gap = 1e-9;  // required separation from the complementary bands

  int rank() const { return bands.size(); }
  int dim() const { return family.dim; }
  // n x m eigenvectors of the group; throws NumericalError if the group
  // touches a neighbouring band at k.
  CMatrix basis(Vec2 k) const;
  CMatrix projector(Vec2 k) const;
  // Directional derivative d.grad P at k by central differences of step h
  // taken along d / |d|.
  CMatrix directional_derivative(Vec2 k, Vec2 d, double h = 1e-5) const;
};

// Throws std::invalid_argument if the group does not fit the family.
ProjectorFamily projector_family(const BlochMatrixFamily& family, BandGroup bands);

// Generator [d.grad P(z), P(z)] of the transport equation.
CMatrix transport_generator(const ProjectorFamily& p, Vec2 z, Vec2 d);

// Berry parallel transport t(x, y) along the straight segment from y to x.
struct TransportMatrix {
  Vec2 from;
  Vec2 to;
  CMatrix t;
  // Largest |t*t - 1| seen before the per-step polar projection, and the
  // sum of these over the segment.
  double max_step_defect = 0.0;
  double accumulated_defect = 0.0;
};

inline constexpr double kStepDefectLimit = 1e-6;

// Integrates dt/ds = [(x - y).grad P, P] t from t = 1 with `steps` classical
// Runge-Kutta steps, re-unitarizing after each one. Throws
// RefinementRequired when a step loses more than kStepDefectLimit of
// unitarity before projection.
TransportMatrix berry_transport(const ProjectorFamily& p, Vec2 y, Vec2 x, int steps);

// Same, starting from an arbitrary initial matrix (t0 is carried along).
TransportMatrix berry_transport(const ProjectorFamily& p, Vec2 y, Vec2 x, int steps,
                                const CMatrix& t0);

// ||P(x) t - t P(y)||_F.
double intertwining_defect(const ProjectorFamily& p, const TransportMatrix& t);

// Frames are sampled in reduced coordinates kappa = (k1 / L1 - offset, k2 / L2).
// A line frame lives on kappa1 = 0, kappa2 = j / N2, j = 0..N2, and is
// V2-equivariant: h(N2) = V2 h(0).
struct LineFrame {
  double offset = 0.0;  // kappa1 origin, as a fraction of L1
  int count2 = 0;
  std::vector<CMatrix> h;  // count2 + 1 samples, each n x m
  CMatrix closing_defect;  // D with g(1) = V2 g(0) D before the log correction
  double max_step_defect = 0.0;
};

inline constexpr int kTransportStepsPerCell = 2;

// Transports the basis at kappa = 0 along kappa2 and distributes the principal
// logarithm of the closing defect over the period. If the defect has an
// eigenvalue at -1 the origin moves by half a kappa1 cell of a grid with
// count1 columns, at most max_shifts times; NumericalError after that.
LineFrame initial_line_frame(const ProjectorFamily& p, int count2, int count1 = 64,
                             int max_shifts = 3);

// Line frame through a given kappa1 origin without the -1 safeguard
// retries (throws NumericalError if the branch is ambiguous).
LineFrame line_frame_at(const ProjectorFamily& p, int count2, double offset);

// Frame over the grid kappa = (i / N1, j / N2), i = 0..N1 (the column i = N1
// is the closure at kappa1 = 1), j = 0..N2 - 1.
struct Frame {
  ProjectorFamily projector;
  double offset = 0.0;
  int count1 = 0;
  int count2 = 0;
  std::vector<CMatrix> phi;  // (count1 + 1) * count2, index i * count2 + j
  double max_step_defect = 0.0;
  std::vector<double> column_drift;  // accumulated pre-projection defect per column

  int rank() const { return projector.rank(); }
  double period1() const { return projector.family.period1; }
  double period2() const { return projector.family.period2; }
  Vec2 kappa(int i, int j) const { return {static_cast<double>(i) / count1, static_cast<double>(j) / count2}; }
  Vec2 point(int i, int j) const {
    return {(offset + static_cast<double>(i) / count1) * period1(),
            static_cast<double>(j) / count2 * period2()};
  }
  const CMatrix& at(int i, int j) const { return phi[static_cast<std::size_t>(i * count2 + j)]; }
  CMatrix& at(int i, int j) { return phi[static_cast<std::size_t>(i * count2 + j)]; }
  // Sample at row j = count2, glued through V2.
  CMatrix wrapped(int i, int j) const;
};

// Transports the line frame along kappa1 through every column with
// kTransportStepsPerCell steps per grid cell.
Frame extend_frame(const LineFrame& line, const ProjectorFamily& p, int count1);

struct TransitionFunction {
  std::vector<CMatrix> alpha;  // count2 + 1 samples, the last at kappa2 = 1
  int winding = 0;             // of det alpha, in units of 2 pi
  int theta = 0;               // -winding
  double max_unitarity_defect = 0.0;

  double kappa2(std::size_t j) const { return static_cast<double>(j) / (alpha.size() - 1); }
};

// alpha_{ji}(kappa2) = <V1* phi_i(1, kappa2), phi_j(0, kappa2)>. Throws
// NumericalError if some alpha is non-unitary beyond 1e-6.
TransitionFunction transition_function(const Frame& f);

struct MeanCurvature {
  std::vector<double> omega_bar;  // count2 + 1 samples of the running integral
  double chern_real = 0.0;        // omega_bar(1) / 2 pi before rounding
  int theta = 0;
};

// Running integral of the frame's plaquette curvature over
// [0, 1] x [0, kappa2]. Rank one only; RefinementRequired if Omega(1) / 2 pi
// misses an integer by more than 1e-4.
MeanCurvature mean_curvature(const Frame& f);

// phi -> exp(i kappa1 (2 pi kappa2 theta - Omega(kappa2) - beta0)) phi with
// beta0 = -arg alpha(0), so that alpha(kappa2) = exp(-2 pi i theta kappa2).
// Rank one only.
Frame canonical_gauge(const Frame& f, int theta);
Frame canonical_gauge(const Frame& f, int theta, const MeanCurvature& omega);

// sup_j |alpha(kappa2_j) - exp(-2 pi i theta kappa2_j)| for a rank-one frame.
double canonical_residual(const TransitionFunction& alpha, int theta);

struct FrameDiagnostics {
  double max_gram_defect = 0.0;
  double max_projector_defect = 0.0;  // |P phi - phi|
  double max_step_ratio = 0.0;        // |phi(k + delta) - phi(k)| / |delta| in kappa units
};

FrameDiagnostics frame_diagnostics(const Frame& f);

}  // namespace magband
