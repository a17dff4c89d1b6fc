#include "magband/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "magband/errors.hpp"
#include "magband/parallel.hpp"

namespace magband {

std::vector<BandGroup> singleton_groups(int bands) {
  std::vector<BandGroup> out;
  for (int n = 0; n < bands; ++n) out.push_back({n, n});
  return out;
}

std::vector<BandGroup> groups_from_intervals(const IntervalSet& intervals) {
  std::vector<BandGroup> out;
  for (const Interval& iv : intervals) out.push_back({iv.first_band, iv.last_band});
  return out;
}

int ChernReport::total() const { return std::accumulate(group_chern.begin(), group_chern.end(), 0); }

namespace {

void validate_groups(const std::vector<BandGroup>& groups, int dim) {
  int expected = 0;
  for (const BandGroup& g : groups) {
    if (g.first != expected || g.last < g.first || g.last >= dim) {
      throw std::invalid_argument("chern_numbers: groups must tile the bands in order");
    }
    expected = g.last + 1;
  }
  if (expected != dim) throw std::invalid_argument("chern_numbers: groups must cover every band");
}

}  // namespace

ChernReport chern_numbers(const BlochMatrixFamily& family, const KGrid& grid,
                          const std::vector<BandGroup>& groups, const ChernOptions& options) {
  const double tol = 1e-12 * std::max(family.period1, family.period2);
  if (std::abs(grid.period1 - family.period1) > tol ||
      std::abs(grid.period2 - family.period2) > tol) {
    throw std::invalid_argument("chern_numbers: grid periods do not match the family");
  }
  validate_groups(groups, family.dim);

  const int n1 = grid.count1;
  const int n2 = grid.count2;
  // eigenvectors on the closed grid (n1 + 1) x (n2 + 1); the extra row and
  // column are continued through the gluing unitaries
  std::vector<EigenDecomposition> eig(grid.size());
  parallel_for(static_cast<std::size_t>(n1), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    for (int j = 0; j < n2; ++j) eig[grid.index(i, j)] = eigh(family(grid.point(i, j)));
  });

  for (std::size_t gi = 0; gi + 1 < groups.size(); ++gi) {
    double min_gap = std::numeric_limits<double>::infinity();
    for (const auto& e : eig) min_gap = std::min(min_gap, e.values(groups[gi + 1].first) - e.values(groups[gi].last));
    if (!(min_gap > options.crossing_tol)) {
      std::ostringstream msg;
      msg << "chern_numbers: bands " << groups[gi].last << " and " << groups[gi + 1].first
          << " touch on the grid (min gap " << min_gap << ")";
      throw NumericalError(msg.str());
    }
  }

  const auto closed_vectors = [&](int i, int j) -> CMatrix {
    const int wi = i == n1 ? 0 : i;
    const int wj = j == n2 ? 0 : j;
    CMatrix v = eig[grid.index(wi, wj)].vectors;
    Vec2 k = grid.point(wi, wj);
    if (j == n2) {
      v = family.gluing2(k) * v;
      k.y += grid.period2;
    }
    if (i == n1) v = family.gluing1(k) * v;
    return v;
  };
  std::vector<CMatrix> closed(static_cast<std::size_t>((n1 + 1) * (n2 + 1)));
  for (int i = 0; i <= n1; ++i)
    for (int j = 0; j <= n2; ++j) closed[static_cast<std::size_t>(i * (n2 + 1) + j)] = closed_vectors(i, j);
  const auto at = [&](int i, int j) -> const CMatrix& {
    return closed[static_cast<std::size_t>(i * (n2 + 1) + j)];
  };

  ChernReport report;
  report.grid = grid;
  report.groups = groups;
  const double cell = grid.step1() * grid.step2();

  for (const BandGroup& g : groups) {
    const int m = g.size();
    const auto link = [&](int ia, int ja, int ib, int jb) {
      const cplx d =
          (at(ia, ja).middleCols(g.first, m).adjoint() * at(ib, jb).middleCols(g.first, m))
              .determinant();
      const double mag = std::abs(d);
      if (mag < options.min_overlap) {
        std::ostringstream msg;
        msg << "chern_numbers: vanishing link overlap " << mag << " for bands " << g.first << ".."
            << g.last << "; refine the grid";
        throw RefinementRequired(msg.str());
      }
      return d / mag;
    };
    const cplx background = std::polar(1.0, m * options.background_curvature * cell);
    double sum = 0.0;
    for (int i = 0; i < n1; ++i) {
      for (int j = 0; j < n2; ++j) {
        const cplx loop = link(i, j, i + 1, j) * link(i + 1, j, i + 1, j + 1) *
                          link(i + 1, j + 1, i, j + 1) * link(i, j + 1, i, j) * background;
        const double phase = std::arg(loop);
        report.max_plaquette_phase = std::max(report.max_plaquette_phase, std::abs(phase));
        if (!(std::abs(phase) < options.admissible_phase)) {
          throw RefinementRequired("chern_numbers: inadmissible plaquette phase; refine the grid");
        }
        sum += phase;
      }
    }
    const double c = sum / (2.0 * M_PI);
    const double rounded = std::round(c);
    const double defect = std::abs(c - rounded);
    report.max_integrality_defect = std::max(report.max_integrality_defect, defect);
    if (defect > options.integrality_tol) {
      std::ostringstream msg;
      msg << "chern_numbers: plaquette sum " << c << " is not integral; refine the grid";
      throw RefinementRequired(msg.str());
    }
    report.group_chern.push_back(static_cast<int>(rounded));
  }

  const bool covers_all = !groups.empty() && groups.front().first == 0 && groups.back().last == family.dim - 1;
  if (covers_all && report.total() != family.total_chern) {
    std::ostringstream msg;
    msg << "chern_numbers: band Chern numbers sum to " << report.total() << " instead of "
        << family.total_chern << "; refine the grid";
    throw RefinementRequired(msg.str());
  }

  report.per_band.assign(static_cast<std::size_t>(family.dim), std::nullopt);
  int running = 0;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    if (groups[gi].size() == 1) report.per_band[static_cast<std::size_t>(groups[gi].first)] = report.group_chern[gi];
    running += report.group_chern[gi];
    if (gi + 1 < groups.size()) report.per_gap.push_back(running);
  }
  return report;
}

ChernReport chern_numbers(const BlochMatrixFamily& family, const KGrid& grid,
                          const ChernOptions& options) {
  return chern_numbers(family, grid, singleton_groups(family.dim), options);
}

ChernReport chern_numbers_adaptive(const BlochMatrixFamily& family, const KGrid& grid,
                                   const std::vector<BandGroup>& groups,
                                   const ChernOptions& options, int max_doublings) {
  KGrid g = grid;
  for (int attempt = 0;; ++attempt) {
    try {
      return chern_numbers(family, g, groups, options);
    } catch (const RefinementRequired&) {
      if (attempt >= max_doublings) throw;
      g = make_grid(g.period1, g.period2, 2 * g.count1, 2 * g.count2);
    }
  }
}

ChernReport hofstadter_chern(RationalFlux flux, int grid_density) {
  const BlochMatrixFamily fam = hofstadter_family(flux);
  const IntervalSet intervals = hofstadter_intervals(flux, kInteractiveGridDensity, true);
  const KGrid grid = make_grid(fam.period1, fam.period2, grid_density, grid_density);
  return chern_numbers_adaptive(fam, grid, groups_from_intervals(intervals));
}

std::optional<int> GapLabelSet::at(int r) const {
  if (r == 0 || r == flux.q) return 0;
  if (r < 0 || r > flux.q) throw std::out_of_range("GapLabelSet: gap index out of range");
  return labels[static_cast<std::size_t>(r - 1)];
}

GapLabelSet gap_labels_diophantine(RationalFlux flux) {
  GapLabelSet out{flux, {}};
  const int p = flux.p;
  const int q = flux.q;
  for (int r = 1; r < q; ++r) {
    std::optional<int> label;
    // t is unique modulo q; pick the representative with |t| <= q/2
    for (int t = -q / 2; t <= q / 2; ++t) {
      if ((((p * t - r) % q) + q) % q != 0) continue;
      if (2 * std::abs(t) < q) label = t;
      break;
    }
    out.labels.push_back(label);
  }
  return out;
}

std::vector<std::optional<int>> band_chern_from_gaps(const GapLabelSet& labels) {
  std::vector<std::optional<int>> out;
  for (int n = 1; n <= labels.flux.q; ++n) {
    const auto above = labels.at(n);
    const auto below = labels.at(n - 1);
    if (above && below)
      out.push_back(*above - *below);
    else
      out.push_back(std::nullopt);
  }
  return out;
}

std::vector<std::optional<int>> group_chern_from_gaps(const GapLabelSet& labels,
                                                      const std::vector<BandGroup>& groups) {
  std::vector<std::optional<int>> out;
  for (const BandGroup& g : groups) {
    const auto above = labels.at(g.last + 1);
    const auto below = labels.at(g.first);
    if (above && below)
      out.push_back(*above - *below);
    else
      out.push_back(std::nullopt);
  }
  return out;
}

ButterflyData colored_butterfly(ButterflyData data) {
  for (ButterflyRow& row : data.rows) {
    std::vector<GapLabel> labels;
    if (row.flux.q > 1) {
      const GapLabelSet set = gap_labels_diophantine(row.flux);
      for (std::size_t i = 0; i + 1 < row.intervals.size(); ++i) {
        const int r = row.intervals[i].last_band + 1;
        if (const auto t = set.at(r)) labels.push_back({r, *t});
      }
    }
    row.labels = std::move(labels);
  }
  return data;
}

}  // namespace magband
