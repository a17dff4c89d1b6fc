#include "magband/hofstadter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "magband/parallel.hpp"

namespace magband {

double RationalFlux::angle() const { return 2.0 * M_PI * p / q; }

RationalFlux rational_flux(long p, long q) {
  if (q == 0) throw std::invalid_argument("rational_flux: denominator must be nonzero");
  if (q < 0) {
    p = -p;
    q = -q;
  }
  p %= q;
  if (p < 0) p += q;
  const long g = std::gcd(p, q);
  return {static_cast<int>(p / g), static_cast<int>(q / g)};
}

HermitianMatrix hofstadter_matrix(RationalFlux flux, Vec2 k) {
  const int q = flux.q;
  const double b0 = flux.angle();
  CMatrix d1 = CMatrix::Zero(q, q);
  for (int j = 0; j + 1 < q; ++j) d1(j + 1, j) += 1.0;
  d1(0, q - 1) += std::polar(1.0, q * k.x);

  CMatrix h = d1 + d1.adjoint();
  for (int j = 0; j < q; ++j) h(j, j) += 2.0 * std::cos(k.y + j * b0);
  return h;
}

BlochMatrixFamily hofstadter_family(RationalFlux flux) {
  BlochMatrixFamily f;
  f.dim = flux.q;
  f.period1 = 2.0 * M_PI / flux.q;
  f.period2 = 2.0 * M_PI;
  f.hamiltonian = [flux](Vec2 k) { return hofstadter_matrix(flux, k); };
  f.total_chern = 0;
  return f;
}

BandStructure band_structure(const BlochMatrixFamily& family, const KGrid& grid,
                             bool keep_vectors) {
  const double tol = 1e-12 * std::max(family.period1, family.period2);
  if (std::abs(grid.period1 - family.period1) > tol ||
      std::abs(grid.period2 - family.period2) > tol) {
    throw std::invalid_argument("band_structure: grid periods do not match the family");
  }
  BandStructure bs{grid, family, std::vector<RVector>(grid.size()), {}};
  if (keep_vectors) bs.vectors.resize(grid.size());
  parallel_for(static_cast<std::size_t>(grid.count1), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    for (int j = 0; j < grid.count2; ++j) {
      const CMatrix h = family(grid.point(i, j));
      const std::size_t idx = grid.index(i, j);
      if (keep_vectors) {
        EigenDecomposition ed = eigh(h);
        bs.energies[idx] = std::move(ed.values);
        bs.vectors[idx] = std::move(ed.vectors);
      } else {
        bs.energies[idx] = eigvalsh(h);
      }
    }
  });
  return bs;
}

namespace {

// Compass search for the minimum of f starting at k0 with per-axis steps.
template <class F>
std::pair<Vec2, double> compass_minimize(const F& f, Vec2 k0, double f0, double step1,
                                         double step2) {
  constexpr double kMinStep = 1e-10;
  Vec2 k = k0;
  double best = f0;
  double s1 = step1;
  double s2 = step2;
  for (int iter = 0; iter < 100000 && (s1 >= kMinStep || s2 >= kMinStep); ++iter) {
    bool moved = false;
    const Vec2 trials[4] = {{k.x + s1, k.y}, {k.x - s1, k.y}, {k.x, k.y + s2}, {k.x, k.y - s2}};
    for (const Vec2& t : trials) {
      const double v = f(t);
      if (v < best) {
        best = v;
        k = t;
        moved = true;
        break;
      }
    }
    if (!moved) {
      s1 *= 0.5;
      s2 *= 0.5;
    }
  }
  return {k, best};
}

}  // namespace

std::vector<BandRange> band_ranges(const BandStructure& bs, bool refine) {
  const int nb = bs.bands();
  std::vector<BandRange> out(static_cast<std::size_t>(nb));
  const KGrid& g = bs.grid;
  for (int n = 0; n < nb; ++n) {
    BandRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                {}, {}};
    for (int i = 0; i < g.count1; ++i) {
      for (int j = 0; j < g.count2; ++j) {
        const double e = bs.energy(n, i, j);
        if (e < r.lo) {
          r.lo = e;
          r.argmin = g.point(i, j);
        }
        if (e > r.hi) {
          r.hi = e;
          r.argmax = g.point(i, j);
        }
      }
    }
    out[static_cast<std::size_t>(n)] = r;
  }
  if (!refine) return out;

  parallel_for(static_cast<std::size_t>(nb), [&](std::size_t n) {
    const int band = static_cast<int>(n);
    auto energy = [&](Vec2 k) { return eigvalsh(bs.family(k))(band); };
    BandRange& r = out[n];
    auto lo = compass_minimize(energy, r.argmin, r.lo, g.step1(), g.step2());
    r.argmin = lo.first;
    r.lo = lo.second;
    auto hi = compass_minimize([&](Vec2 k) { return -energy(k); }, r.argmax, -r.hi, g.step1(),
                               g.step2());
    r.argmax = hi.first;
    r.hi = -hi.second;
  });
  return out;
}

IntervalSet merge_ranges(const std::vector<BandRange>& ranges, double merge_tol) {
  IntervalSet out;
  for (std::size_t n = 0; n < ranges.size(); ++n) {
    const BandRange& r = ranges[n];
    const int band = static_cast<int>(n);
    if (!out.empty() && r.lo - out.back().hi <= merge_tol) {
      out.back().hi = std::max(out.back().hi, r.hi);
      out.back().lo = std::min(out.back().lo, r.lo);
      out.back().last_band = band;
    } else {
      out.push_back({r.lo, r.hi, band, band});
    }
  }
  return out;
}

IntervalSet band_intervals(const BandStructure& bs, bool refine, double merge_tol) {
  return merge_ranges(band_ranges(bs, refine), merge_tol);
}

double unrefined_merge_tol(const KGrid& grid) {
  return 3.0 * std::max(grid.step1(), grid.step2());
}

std::vector<RationalFlux> farey(int max_q) {
  if (max_q < 1) throw std::invalid_argument("farey: max_q must be >= 1");
  // next-term recurrence of the Farey sequence
  std::vector<RationalFlux> out{{0, 1}};
  int a = 0, b = 1, c = 1, d = max_q;
  while (c <= max_q) {
    const int k = (max_q + b) / d;
    const int na = c, nb = d, nc = k * c - a, nd = k * d - b;
    a = na;
    b = nb;
    c = nc;
    d = nd;
    out.push_back({a, b});
  }
  return out;
}

IntervalSet hofstadter_intervals(RationalFlux flux, int grid_density, bool refine) {
  const BlochMatrixFamily fam = hofstadter_family(flux);
  const KGrid grid = make_grid(fam.period1, fam.period2, grid_density, grid_density);
  const BandStructure bs = band_structure(fam, grid, false);
  return band_intervals(bs, refine, refine ? kDefaultMergeTol : unrefined_merge_tol(grid));
}

ButterflyData butterfly(int max_q, int grid_density, bool refine) {
  if (grid_density < 1) throw std::invalid_argument("butterfly: grid density must be positive");
  ButterflyData data;
  for (const RationalFlux& f : farey(max_q)) {
    data.rows.push_back({f, hofstadter_intervals(f, grid_density, refine), std::nullopt});
  }
  return data;
}

}  // namespace magband
