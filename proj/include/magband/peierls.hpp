#pragma once

#include <optional>
#include <string>
#include <vector>

#include "magband/family.hpp"
#include "magband/hofstadter.hpp"
#include "magband/linalg.hpp"
#include "magband/rational.hpp"
#include "magband/topology.hpp"

namespace magband {

// Parameters of the theta-quantized model dispersion E_q(k) = 2cos(q k1) +
// 2cos(q k2) under a weak field B = 2 pi ptilde / (q^2 qtilde).
struct PeierlsParams {
  int theta = 0;
  int q = 1;
  int ptilde = 0;
  int qtilde = 1;

  // B in units of 2 pi, exactly.
  Rational field() const { return Rational(ptilde, static_cast<std::int64_t>(q) * q * qtilde); }
  double b() const { return 2.0 * M_PI * field().value(); }
  // q * B, the diagonal phase step.
  double diagonal_step() const { return 2.0 * M_PI * ptilde / (static_cast<double>(q) * qtilde); }
  // Multiplier c = q - theta ptilde / qtilde of k2 in the hopping phase.
  double hopping_rate() const { return q - static_cast<double>(theta) * ptilde / qtilde; }
  double period1() const { return 2.0 * M_PI / (static_cast<double>(q) * qtilde); }
  double period2() const { return 2.0 * M_PI; }
};

// Reduces ptilde / qtilde (sign carried by ptilde). Throws
// std::invalid_argument unless q >= 1 and qtilde != 0.
PeierlsParams peierls_params(int theta, int q, int ptilde, int qtilde);

struct PeierlsGenerators {
  CMatrix u1;
  CMatrix u2;
};

// U1 = diag(exp(i q (k1 + j q B))), U2 = exp(i c k2) S with S the cyclic
// shift S_{j, j+1} = 1, j = 0..qtilde-1.
PeierlsGenerators peierls_generators(const PeierlsParams& p, Vec2 k);

// U1 U2 = exp(i sigma q^2 B) U2 U1 with this sigma.
inline constexpr int kCommutationSign = -1;

// U1 + U1* + U2 + U2*.
HermitianMatrix peierls_matrix(const PeierlsParams& p, Vec2 k);

// The family over [0, 2 pi / (q qtilde)) x [0, 2 pi) with
//   V1(k) = exp(-i theta k2 / qtilde) Pi,  (Pi g)_j = g_{j + ptilde^{-1} mod qtilde},
//   V2    = diag(exp(2 pi i theta j ptilde / qtilde)).
// Its total Chern number is theta.
BlochMatrixFamily peierls_family(const PeierlsParams& p);

struct IsospectralityReport {
  IntervalSet peierls;
  IntervalSet hofstadter;
  double distance = 0.0;  // Hausdorff distance of the endpoint sets
};

double endpoint_hausdorff(const IntervalSet& a, const IntervalSet& b);

// Refined spectrum of H^B_{theta,q} against the Hofstadter spectrum at
// flux ptilde / qtilde, both sampled on density x density grids.
IsospectralityReport isospectrality_report(const PeierlsParams& p,
                                           int grid_density = kInteractiveGridDensity);

struct TildeB {
  double value = 0.0;             // radians
  std::optional<Rational> exact;  // in units of 2 pi
};

// Btilde = B (1 - 1 / (1 - 2 pi / (q theta B))) = B / (1 - q theta B / 2 pi).
// Throws std::domain_error at the singular point q theta B = 2 pi.
TildeB tilde_b(int theta, int q, double b);
TildeB tilde_b(int theta, int q, Rational b_over_2pi);

// Plaquette Chern numbers of the subbands, grouping subbands that touch,
// with the gluing of peierls_family and the constant theta-connection
// curvature q theta / 2 pi per unit k-area. Grid is density x density.
ChernReport theta_chern_numbers(const PeierlsParams& p, int grid_density = kChernGridDensity);

struct ParentBand {
  RationalFlux flux;
  int band = 0;  // zero-based
};

// First flux p/q (p = 1..q-1 coprime to q) with an isolated band of Chern
// number theta, lowest band first.
std::optional<ParentBand> find_parent_band(int theta, int q);

enum class MatchStatus { Match, Mismatch, Inconclusive };

struct SubbandExperiment {
  PeierlsParams params;
  ParentBand parent;
  Rational tilde_b;      // units of 2 pi
  RationalFlux flux;     // B0 + Btilde
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::vector<BandGroup> peierls_groups;
  std::vector<int> peierls_chern;
  std::vector<BandGroup> hofstadter_groups;  // inside the window
  std::vector<int> hofstadter_chern;
  MatchStatus status = MatchStatus::Inconclusive;
  std::string note;

  bool match() const { return status == MatchStatus::Match; }
};

// Compares the theta-twisted subband Chern numbers of H^B_{theta,q} with the
// Hofstadter bands at flux B0 + Btilde whose spectral intervals lie in the
// parent band's energy window.
SubbandExperiment subband_chern_experiment(int theta, int q, int ptilde, int qtilde,
                                           std::optional<ParentBand> parent = std::nullopt);

const char* to_string(MatchStatus s);

}  // namespace magband
