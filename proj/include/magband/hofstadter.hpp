#pragma once

#include <optional>
#include <vector>

#include "magband/family.hpp"
#include "magband/linalg.hpp"

namespace magband {

// Flux 2*pi*p/q per plaquette with gcd(p, q) = 1 and 0 <= p/q <= 1. The
// upper endpoint 1/1 is kept so Farey sweeps can close the unit interval.
struct RationalFlux {
  int p = 0;
  int q = 1;

  double value() const { return static_cast<double>(p) / q; }
  double angle() const;  // 2*pi*p/q
  friend bool operator==(RationalFlux a, RationalFlux b) { return a.p == b.p && a.q == b.q; }
};

// Reduces p/q and folds it into [0, 1). Throws std::invalid_argument on q = 0.
RationalFlux rational_flux(long p, long q);

// q x q Bloch matrix of D1 + D1* + D2 + D2* at quasi-momentum k, with
//   D1(k) = cyclic shift (down) with corner exp(i q k1),
//   D2(k) = exp(i k2) diag(exp(i j B0)), j = 0..q-1.
// For q = 1, 2 coinciding slots are summed.
HermitianMatrix hofstadter_matrix(RationalFlux flux, Vec2 k);

// Strictly periodic family over [0, 2pi/q) x [0, 2pi).
BlochMatrixFamily hofstadter_family(RationalFlux flux);

struct BandStructure {
  KGrid grid;
  BlochMatrixFamily family;
  std::vector<RVector> energies;  // per grid point, ascending
  std::vector<CMatrix> vectors;   // per grid point when requested

  int bands() const { return family.dim; }
  double energy(int band, int i, int j) const {
    return energies[grid.index(i, j)](band);
  }
};

// Throws std::invalid_argument when grid and family periods disagree.
BandStructure band_structure(const BlochMatrixFamily& family, const KGrid& grid,
                             bool keep_vectors);

struct BandRange {
  double lo = 0.0;
  double hi = 0.0;
  Vec2 argmin;
  Vec2 argmax;
};

// Per-band [min, max]; with refine, each extremum is polished by compass
// search from the best grid point, halving the step down to 1e-10.
std::vector<BandRange> band_ranges(const BandStructure& bs, bool refine);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  int first_band = 0;  // zero-based, inclusive
  int last_band = 0;
};

using IntervalSet = std::vector<Interval>;

// Merges ranges (assumed in band order) whose separation is <= merge_tol.
IntervalSet merge_ranges(const std::vector<BandRange>& ranges, double merge_tol);

// Refined endpoints are accurate to about 1e-13, and the narrowest open gap
// for q <= 20 (flux 2/19) is 2.5e-8 wide.
inline constexpr double kDefaultMergeTol = 1e-10;

IntervalSet band_intervals(const BandStructure& bs, bool refine,
                           double merge_tol = kDefaultMergeTol);

// Merge tolerance used when endpoints are not refined: three grid steps.
double unrefined_merge_tol(const KGrid& grid);

// All reduced p/q in [0, 1] with q <= max_q, ascending.
std::vector<RationalFlux> farey(int max_q);

struct GapLabel {
  int gap_index = 0;  // number of bands below the gap
  int label = 0;
};

struct ButterflyRow {
  RationalFlux flux;
  IntervalSet intervals;
  std::optional<std::vector<GapLabel>> labels;
};

struct ButterflyData {
  std::vector<ButterflyRow> rows;
};

inline constexpr int kSweepGridDensity = 201;
inline constexpr int kInteractiveGridDensity = 64;

ButterflyData butterfly(int max_q, int grid_density = kSweepGridDensity, bool refine = true);

// Spectrum intervals of H_Hof at one flux on a density x density grid.
IntervalSet hofstadter_intervals(RationalFlux flux, int grid_density, bool refine);

}  // namespace magband
