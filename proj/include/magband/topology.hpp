#pragma once

#include <optional>
#include <vector>

#include "magband/family.hpp"
#include "magband/hofstadter.hpp"
#include "magband/linalg.hpp"

namespace magband {

// Contiguous band range treated as one bundle (zero-based, inclusive).
struct BandGroup {
  int first = 0;
  int last = 0;
  int size() const { return last - first + 1; }
  friend bool operator==(BandGroup a, BandGroup b) {
    return a.first == b.first && a.last == b.last;
  }
};

std::vector<BandGroup> singleton_groups(int bands);

// One group per merged spectral interval.
std::vector<BandGroup> groups_from_intervals(const IntervalSet& intervals);

struct ChernOptions {
  // Constant curvature (phase per unit k-area) of a background connection
  // added to every plaquette, once per band in the group.
  double background_curvature = 0.0;
  // Every plaquette phase must stay strictly below this magnitude.
  double admissible_phase = M_PI;
  // Link overlaps |det <u(k), u(k')>| below this call for a finer grid.
  double min_overlap = 1e-8;
  // Minimum energy separation between neighbouring groups on the grid.
  double crossing_tol = 1e-9;
  // Allowed distance of a plaquette sum from an integer before rounding.
  double integrality_tol = 1e-6;
};

struct ChernReport {
  KGrid grid;
  std::vector<BandGroup> groups;
  std::vector<int> group_chern;
  std::vector<std::optional<int>> per_band;  // defined for singleton groups
  std::vector<int> per_gap;                  // cumulative Chern below each inter-group gap
  double max_plaquette_phase = 0.0;
  double max_integrality_defect = 0.0;

  int total() const;
};

// Link-variable (plaquette) Chern numbers on one grid. Throws
// RefinementRequired on vanishing overlaps, inadmissible plaquettes,
// non-integral sums or, when the groups cover every band, a total that
// differs from family.total_chern. NumericalError when neighbouring groups
// touch.
ChernReport chern_numbers(const BlochMatrixFamily& family, const KGrid& grid,
                          const std::vector<BandGroup>& groups, const ChernOptions& options = {});

// Singleton groups.
ChernReport chern_numbers(const BlochMatrixFamily& family, const KGrid& grid,
                          const ChernOptions& options = {});

// Retries on RefinementRequired with the grid doubled, at most max_doublings
// times; rethrows the last failure.
ChernReport chern_numbers_adaptive(const BlochMatrixFamily& family, const KGrid& grid,
                                   const std::vector<BandGroup>& groups,
                                   const ChernOptions& options = {}, int max_doublings = 4);

inline constexpr int kChernGridDensity = 40;

// Chern numbers of the Hofstadter bands at `flux`, grouping bands that
// touch (refined spectral intervals) and using the default 40x40 grid.
ChernReport hofstadter_chern(RationalFlux flux, int grid_density = kChernGridDensity);

// Gap labels t_r, r = 1..q-1, solving p t = r (mod q) with |t| < q/2.
// The closed central gap of even q (|t| = q/2) is absent.
struct GapLabelSet {
  RationalFlux flux;
  std::vector<std::optional<int>> labels;  // labels[r - 1]

  std::optional<int> at(int r) const;  // t_0 = t_q = 0
};

GapLabelSet gap_labels_diophantine(RationalFlux flux);

// c_n = t_n - t_{n-1} with t_0 = t_q = 0; undefined next to an absent label.
std::vector<std::optional<int>> band_chern_from_gaps(const GapLabelSet& labels);

// Chern number of each band group from the labels bracketing it.
std::vector<std::optional<int>> group_chern_from_gaps(const GapLabelSet& labels,
                                                      const std::vector<BandGroup>& groups);

// Annotates every open gap of every row with its diophantine label.
ButterflyData colored_butterfly(ButterflyData data);

}  // namespace magband
