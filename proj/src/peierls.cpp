#include "magband/peierls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace magband {

PeierlsParams peierls_params(int theta, int q, int ptilde, int qtilde) {
  if (q < 1) throw std::invalid_argument("peierls_params: q must be positive");
  if (qtilde == 0) throw std::invalid_argument("peierls_params: qtilde must be nonzero");
  if (qtilde < 0) {
    ptilde = -ptilde;
    qtilde = -qtilde;
  }
  const int g = std::gcd(std::abs(ptilde), qtilde);
  return PeierlsParams{theta, q, ptilde / g, qtilde / g};
}

PeierlsGenerators peierls_generators(const PeierlsParams& p, Vec2 k) {
  const int n = p.qtilde;
  const double step = p.diagonal_step();
  PeierlsGenerators g{CMatrix::Zero(n, n), CMatrix::Zero(n, n)};
  const cplx hop = std::polar(1.0, k.y * p.hopping_rate());
  for (int j = 0; j < n; ++j) {
    g.u1(j, j) = std::polar(1.0, p.q * (k.x + j * step));
    g.u2(j, (j + 1) % n) += hop;
  }
  return g;
}

HermitianMatrix peierls_matrix(const PeierlsParams& p, Vec2 k) {
  const PeierlsGenerators g = peierls_generators(p, k);
  return g.u1 + g.u1.adjoint() + g.u2 + g.u2.adjoint();
}

namespace {

int modular_inverse(int a, int m) {
  if (m == 1) return 0;
  const int r = ((a % m) + m) % m;
  for (int x = 1; x < m; ++x) {
    if ((static_cast<long>(r) * x) % m == 1) return x;
  }
  throw std::invalid_argument("modular_inverse: arguments are not coprime");
}

}  // namespace

BlochMatrixFamily peierls_family(const PeierlsParams& p) {
  const int n = p.qtilde;
  // The shift by L1 advances q k1 by 2 pi / qtilde, i.e. the diagonal phase
  // of slot j moves to slot j + ptilde^{-1}.
  const int inv = modular_inverse(p.ptilde, n);
  CMatrix perm = CMatrix::Zero(n, n);
  CMatrix twist = CMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    perm(j, (j + inv) % n) = 1.0;
    twist(j, j) = std::polar(1.0, 2.0 * M_PI * p.theta * j * p.ptilde / static_cast<double>(n));
  }
  BlochMatrixFamily fam;
  fam.dim = n;
  fam.period1 = p.period1();
  fam.period2 = p.period2();
  fam.hamiltonian = [p](Vec2 k) { return peierls_matrix(p, k); };
  fam.glue1 = [perm, p](Vec2 k) -> CMatrix {
    return std::polar(1.0, -p.theta * k.y / p.qtilde) * perm;
  };
  fam.glue2 = [twist](Vec2) { return twist; };
  fam.total_chern = p.theta;
  return fam;
}

double endpoint_hausdorff(const IntervalSet& a, const IntervalSet& b) {
  const auto endpoints = [](const IntervalSet& s) {
    std::vector<double> out;
    for (const Interval& iv : s) {
      out.push_back(iv.lo);
      out.push_back(iv.hi);
    }
    return out;
  };
  const std::vector<double> ea = endpoints(a);
  const std::vector<double> eb = endpoints(b);
  if (ea.empty() || eb.empty()) return ea.empty() && eb.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  const auto directed = [](const std::vector<double>& from, const std::vector<double>& to) {
    double worst = 0.0;
    for (double x : from) {
      double best = std::numeric_limits<double>::infinity();
      for (double y : to) best = std::min(best, std::abs(x - y));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(ea, eb), directed(eb, ea));
}

namespace {

IntervalSet refined_intervals(const BlochMatrixFamily& fam, int density) {
  const KGrid grid = make_grid(fam.period1, fam.period2, density, density);
  return band_intervals(band_structure(fam, grid, false), true);
}

}  // namespace

IsospectralityReport isospectrality_report(const PeierlsParams& p, int grid_density) {
  IsospectralityReport r;
  r.peierls = refined_intervals(peierls_family(p), grid_density);
  r.hofstadter = hofstadter_intervals(rational_flux(p.ptilde, p.qtilde), grid_density, true);
  r.distance = endpoint_hausdorff(r.peierls, r.hofstadter);
  return r;
}

TildeB tilde_b(int theta, int q, double b) {
  const double x = q * theta * b / (2.0 * M_PI);
  if (std::abs(1.0 - x) < 1e-12) {
    std::ostringstream msg;
    msg << "tilde_b: singular at q theta B = 2 pi (theta=" << theta << ", q=" << q << ", B=" << b << ")";
    throw std::domain_error(msg.str());
  }
  return TildeB{b / (1.0 - x), std::nullopt};
}

TildeB tilde_b(int theta, int q, Rational b_over_2pi) {
  const Rational denom = Rational(1) - Rational(static_cast<std::int64_t>(q) * theta) * b_over_2pi;
  if (denom.num() == 0) {
    std::ostringstream msg;
    msg << "tilde_b: singular at q theta B = 2 pi (theta=" << theta << ", q=" << q
        << ", B/2pi=" << b_over_2pi << ")";
    throw std::domain_error(msg.str());
  }
  const Rational exact = b_over_2pi / denom;
  return TildeB{2.0 * M_PI * exact.value(), exact};
}

ChernReport theta_chern_numbers(const PeierlsParams& p, int grid_density) {
  const BlochMatrixFamily fam = peierls_family(p);
  const IntervalSet intervals = refined_intervals(fam, kInteractiveGridDensity);
  ChernOptions opts;
  opts.background_curvature = p.q * p.theta / (2.0 * M_PI);
  const KGrid grid = make_grid(fam.period1, fam.period2, grid_density, grid_density);
  return chern_numbers_adaptive(fam, grid, groups_from_intervals(intervals), opts);
}

std::optional<ParentBand> find_parent_band(int theta, int q) {
  for (int p = 1; p < q; ++p) {
    if (std::gcd(p, q) != 1) continue;
    const RationalFlux flux = rational_flux(p, q);
    const ChernReport rep = hofstadter_chern(flux);
    for (std::size_t g = 0; g < rep.groups.size(); ++g) {
      if (rep.groups[g].size() == 1 && rep.group_chern[g] == theta) {
        return ParentBand{flux, rep.groups[g].first};
      }
    }
  }
  return std::nullopt;
}

const char* to_string(MatchStatus s) {
  switch (s) {
    case MatchStatus::Match:
      return "match";
    case MatchStatus::Mismatch:
      return "mismatch";
    case MatchStatus::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

SubbandExperiment subband_chern_experiment(int theta, int q, int ptilde, int qtilde,
                                           std::optional<ParentBand> parent) {
  SubbandExperiment ex;
  ex.params = peierls_params(theta, q, ptilde, qtilde);
  if (!parent) parent = find_parent_band(theta, q);
  if (!parent) {
    std::ostringstream msg;
    msg << "subband_chern_experiment: no isolated band of Chern number " << theta
        << " at any flux p/" << q;
    throw std::invalid_argument(msg.str());
  }
  if (parent->flux.q != q) throw std::invalid_argument("subband_chern_experiment: parent flux denominator must be q");
  ex.parent = *parent;

  const ChernReport peierls = theta_chern_numbers(ex.params);
  ex.peierls_groups = peierls.groups;
  ex.peierls_chern = peierls.group_chern;

  const IntervalSet parent_intervals = hofstadter_intervals(parent->flux, kInteractiveGridDensity, true);
  const auto window = std::find_if(parent_intervals.begin(), parent_intervals.end(), [&](const Interval& iv) {
    return iv.first_band == parent->band && iv.last_band == parent->band;
  });
  if (window == parent_intervals.end()) {
    throw std::invalid_argument("subband_chern_experiment: parent band is not isolated");
  }
  ex.window_lo = window->lo;
  ex.window_hi = window->hi;

  const Rational b0(parent->flux.p, parent->flux.q);
  ex.tilde_b = *tilde_b(theta, q, ex.params.field()).exact;
  const Rational total = b0 + ex.tilde_b;
  ex.flux = rational_flux(static_cast<long>(total.num()), static_cast<long>(total.den()));

  const ChernReport child = hofstadter_chern(ex.flux);
  const IntervalSet child_intervals = hofstadter_intervals(ex.flux, kInteractiveGridDensity, true);
  constexpr double kWindowTol = 1e-8;
  int bands_inside = 0;
  for (const Interval& iv : child_intervals) {
    const bool inside = iv.lo >= ex.window_lo - kWindowTol && iv.hi <= ex.window_hi + kWindowTol;
    const bool overlaps = iv.hi >= ex.window_lo - kWindowTol && iv.lo <= ex.window_hi + kWindowTol;
    if (inside) {
      const auto g = std::find(child.groups.begin(), child.groups.end(), BandGroup{iv.first_band, iv.last_band});
      if (g == child.groups.end()) {
        ex.note = "band grouping differs between spectrum and Chern computation";
        return ex;
      }
      ex.hofstadter_groups.push_back(*g);
      ex.hofstadter_chern.push_back(child.group_chern[static_cast<std::size_t>(g - child.groups.begin())]);
      bands_inside += g->size();
    } else if (overlaps) {
      std::ostringstream msg;
      msg << "bands " << iv.first_band << ".." << iv.last_band << " straddle the window edge";
      ex.note = msg.str();
      return ex;
    }
  }
  if (bands_inside != ex.params.qtilde) {
    std::ostringstream msg;
    msg << "window holds " << bands_inside << " bands, expected " << ex.params.qtilde;
    ex.note = msg.str();
    return ex;
  }

  bool same = ex.peierls_chern == ex.hofstadter_chern && ex.peierls_groups.size() == ex.hofstadter_groups.size();
  for (std::size_t i = 0; same && i < ex.peierls_groups.size(); ++i) {
    same = ex.peierls_groups[i].size() == ex.hofstadter_groups[i].size();
  }
  ex.status = same ? MatchStatus::Match : MatchStatus::Mismatch;
  return ex;
}

}  // namespace magband
