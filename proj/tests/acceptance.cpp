// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "magband/bundle.hpp"
#include "magband/effective.hpp"
#include "magband/errors.hpp"
#include "magband/hofstadter.hpp"
#include "magband/peierls.hpp"
#include "magband/topology.hpp"
#include "oracles.hpp"

using namespace magband;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::vector<std::string> reasons;

  void fail(const std::string& why) {
    pass = false;
    if (reasons.size() < 5) reasons.push_back(why);
  }
};

int failures = 0;

void run(int index, const std::string& name, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto t0 = Clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.fail(std::string("exception: ") + e.what());
  }
  if (!out.pass) ++failures;
  std::string text = out.detail.str();
  for (const std::string& r : out.reasons) text += "; " + r;
  std::printf("%s %d %s (%.1f s) %s\n", out.pass ? "PASS" : "FAIL", index, name.c_str(), seconds_since(t0),
              text.c_str());
  std::fflush(stdout);
}

std::string flux_name(RationalFlux f) { return std::to_string(f.p) + "/" + std::to_string(f.q); }

std::vector<RationalFlux> reduced_fluxes(int max_q) {
  std::vector<RationalFlux> out;
  for (int q = 1; q <= max_q; ++q)
    for (int p = 0; p < q; ++p)
      if (std::gcd(p, q) == 1) out.push_back({p, q});
  return out;
}

struct RandomPhase {
  double c[4];
  explicit RandomPhase(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    for (double& x : c) x = u(rng);
  }
  double operator()(double k1, double k2) const {
    return c[0] * std::sin(2 * M_PI * k1) + c[1] * std::cos(2 * M_PI * k2) +
           c[2] * std::sin(2 * M_PI * (k1 + k2)) + c[3] * std::cos(2 * M_PI * (k1 - 2 * k2));
  }
};

void criterion1(Outcome& out) {
  const auto t0 = Clock::now();
  const ChernReport r = hofstadter_chern({1, 3});
  const GapLabelSet gaps = gap_labels_diophantine({1, 3});
  const double elapsed = seconds_since(t0);
  if (r.grid.count1 != 40 || r.grid.count2 != 40) out.fail("grid is not 40x40");
  if (r.group_chern != std::vector<int>{1, -2, 1}) out.fail("band Chern numbers differ from (1, -2, 1)");
  if (r.per_gap != std::vector<int>{1, -1}) out.fail("curvature gap labels differ from (1, -1)");
  if (gaps.labels != std::vector<std::optional<int>>{1, -1}) out.fail("diophantine gap labels differ from (1, -1)");
  if (elapsed >= 1.0) out.fail("runtime " + std::to_string(elapsed) + " s");
  out.detail << "bands 1 -2 1, gaps 1 -1, " << elapsed << " s";
}

void criterion2(Outcome& out) {
  const auto t0 = Clock::now();
  const ButterflyData data = butterfly(20, kSweepGridDensity, true);
  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  std::size_t rows = 0;
  for (const ButterflyRow& row : data.rows) {
    if (row.flux.q == 1 && row.flux.p == 1) continue;
    ++rows;
    const int q = row.flux.q;
    const std::size_t expected = static_cast<std::size_t>(q % 2 == 1 ? q : q - 1);
    if (row.intervals.size() != expected)
      out.fail(flux_name(row.flux) + " has " + std::to_string(row.intervals.size()) + " intervals");
    const auto edges = oracle::chambers_edges(row.flux.p, q);
    for (const Interval& iv : row.intervals)
      worst = std::max({worst, oracle::distance_to_set(iv.lo, edges), oracle::distance_to_set(iv.hi, edges)});
  }
  if (worst > 1e-8) out.fail("endpoint error " + std::to_string(worst));
  if (elapsed >= 300.0) out.fail("sweep took " + std::to_string(elapsed) + " s");
  out.detail << rows << " fluxes, worst endpoint error " << worst << ", sweep " << elapsed << " s";
}

void criterion3(Outcome& out) {
  int bands = 0;
  for (RationalFlux f : reduced_fluxes(12)) {
    const ChernReport r = hofstadter_chern(f);
    const auto dioph = group_chern_from_gaps(gap_labels_diophantine(f), r.groups);
    const auto tknn = oracle::tknn_band_cherns(f.p, f.q);
    for (std::size_t g = 0; g < r.groups.size(); ++g) {
      int oracle_sum = 0;
      for (int b = r.groups[g].first; b <= r.groups[g].last; ++b) oracle_sum += tknn[static_cast<std::size_t>(b)];
      if (!dioph[g] || *dioph[g] != r.group_chern[g] || oracle_sum != r.group_chern[g])
        out.fail(flux_name(f) + " group " + std::to_string(g));
      bands += r.groups[g].size();
    }
  }
  out.detail << bands << " bands matched";
}

void criterion4(Outcome& out) {
  int fluxes = 0;
  for (RationalFlux f : reduced_fluxes(20)) {
    const ChernReport r = hofstadter_chern(f);
    if (r.total() != 0) out.fail(flux_name(f) + " sums to " + std::to_string(r.total()));
    // recomputed on a grid twice as fine
    const BlochMatrixFamily fam = hofstadter_family(f);
    const ChernReport fine =
        chern_numbers(fam, make_grid(fam.period1, fam.period2, 2 * r.grid.count1, 2 * r.grid.count2), r.groups);
    if (fine.group_chern != r.group_chern) out.fail(flux_name(f) + " changes under grid doubling");
    ++fluxes;
  }
  out.detail << fluxes << " fluxes sum to zero";
}

void criterion5(Outcome& out) {
  double worst = 0.0;
  int cases = 0;
  for (auto [theta, q] : {std::pair{1, 3}, std::pair{-2, 3}, std::pair{1, 5}}) {
    for (int qt = 1; qt <= 8; ++qt) {
      for (int pt = 1; pt < qt || (qt == 1 && pt == 1); ++pt) {
        if (std::gcd(pt, qt) != 1) continue;
        const IsospectralityReport r = isospectrality_report(peierls_params(theta, q, pt, qt));
        worst = std::max(worst, r.distance);
        if (r.distance >= 1e-6)
          out.fail("theta " + std::to_string(theta) + " q " + std::to_string(q) + " at " + std::to_string(pt) + "/" +
                   std::to_string(qt));
        ++cases;
      }
    }
  }
  const IsospectralityReport closed = isospectrality_report(peierls_params(-2, 3, 1, 2));
  const double r2 = 2 * std::sqrt(2.0);
  const auto close_form = [&](const IntervalSet& s) {
    return s.size() == 1 && std::abs(s[0].lo + r2) < 1e-8 && std::abs(s[0].hi - r2) < 1e-8;
  };
  if (!close_form(closed.peierls) || !close_form(closed.hofstadter)) out.fail("closed form [-2 sqrt 2, 2 sqrt 2] missed");
  out.detail << cases << " cases, worst distance " << worst;
}

void criterion6(Outcome& out) {
  for (int qt : {2, 3, 4}) {
    const SubbandExperiment e = subband_chern_experiment(-2, 3, 1, qt);
    std::ostringstream line;
    line << "B=2pi/" << 9 * qt << " flux " << flux_name(e.flux) << ' ' << to_string(e.status);
    if (!e.match()) out.fail(line.str() + (e.note.empty() ? "" : " (" + e.note + ")"));
    out.detail << line.str() << ' ';
  }
}

void criterion7(Outcome& out) {
  const int n = 200;
  int frames = 0;
  double worst_residual = 0.0, worst_real = 0.0;
  for (RationalFlux f : {RationalFlux{1, 3}, RationalFlux{1, 4}, RationalFlux{1, 5}}) {
    const ChernReport fhs = hofstadter_chern(f);
    const BlochMatrixFamily fam = hofstadter_family(f);
    for (std::size_t g = 0; g < fhs.groups.size(); ++g) {
      if (fhs.groups[g].size() != 1) continue;
      const ProjectorFamily p = projector_family(fam, fhs.groups[g]);
      const Frame frame = extend_frame(initial_line_frame(p, n, n), p, n);
      const TransitionFunction alpha = transition_function(frame);
      const MeanCurvature omega = mean_curvature(frame);
      const TransitionFunction canon = transition_function(canonical_gauge(frame, omega.theta, omega));
      const double residual = canonical_residual(canon, omega.theta);
      const std::string where = flux_name(f) + " band " + std::to_string(fhs.groups[g].first + 1);
      worst_residual = std::max(worst_residual, residual);
      worst_real = std::max(worst_real, std::abs(omega.chern_real - fhs.group_chern[g]));
      if (alpha.theta != fhs.group_chern[g]) out.fail(where + " winding theta " + std::to_string(alpha.theta));
      if (std::abs(omega.chern_real - fhs.group_chern[g]) >= 1e-4) out.fail(where + " Omega(1)/2pi off");
      if (residual >= 1e-6) out.fail(where + " canonical residual " + std::to_string(residual));
      ++frames;
    }
  }
  out.detail << frames << " bands, worst |Omega/2pi - c| " << worst_real << ", worst residual " << worst_residual;
}

void criterion8(Outcome& out) {
  const int n = 200;
  double worst_drift = 0.0;
  for (RationalFlux f : {RationalFlux{1, 3}, RationalFlux{1, 5}}) {
    const ProjectorFamily p = projector_family(hofstadter_family(f), {0, 0});
    const Frame frame = extend_frame(initial_line_frame(p, n, n), p, n);
    for (double d : frame.column_drift) worst_drift = std::max(worst_drift, d);
  }
  if (worst_drift >= 1e-9) out.fail("column drift " + std::to_string(worst_drift));

  // random segments, integrated with the frame resolution: two steps per
  // cell of a 200 x 200 grid
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  double worst_inter = 0.0;
  for (int band = 0; band < 3; ++band) {
    const BlochMatrixFamily fam = hofstadter_family({1, 3});
    const ProjectorFamily p = projector_family(fam, {band, band});
    const double cell = std::min(fam.period1, fam.period2) / n;
    for (int s = 0; s < 10; ++s) {
      const Vec2 y{u(rng), u(rng)}, x{u(rng), u(rng)};
      const Vec2 d = x - y;
      const int steps = kTransportStepsPerCell * static_cast<int>(std::ceil(std::hypot(d.x, d.y) / cell));
      worst_inter = std::max(worst_inter, intertwining_defect(p, berry_transport(p, y, x, steps)));
    }
  }
  if (worst_inter >= 1e-7) out.fail("intertwining " + std::to_string(worst_inter));

  double worst_ratio_err = 0.0;
  for (int band = 0; band < 3; ++band) {
    const ProjectorFamily p = projector_family(hofstadter_family({1, 3}), {band, band});
    const Vec2 z{0.31, 0.77};
    const Vec2 dir{0.6, 0.8};
    double previous = 0.0;
    for (double delta : {0.1, 0.05, 0.025, 0.0125}) {
      const Vec2 d = dir * delta;
      const TransportMatrix t = berry_transport(p, z, z + d, 200);
      const double remainder = (t.t - CMatrix::Identity(3, 3) - transport_generator(p, z, d)).norm();
      if (previous > 0.0) {
        const double err = std::abs(previous / remainder / 4.0 - 1.0);
        worst_ratio_err = std::max(worst_ratio_err, err);
        if (err >= 0.1) out.fail("Taylor ratio " + std::to_string(previous / remainder));
      }
      previous = remainder;
    }
  }
  out.detail << "drift " << worst_drift << ", intertwining " << worst_inter << ", Taylor ratio within "
             << 100 * worst_ratio_err << "% of 4";
}

void criterion9(Outcome& out) {
  const BlochMatrixFamily fam = hofstadter_family({1, 3});
  const int n = 256;
  const ProjectorFamily p = projector_family(fam, {1, 1});
  const Frame raw = extend_frame(initial_line_frame(p, n, n), p, n);
  const MeanCurvature omega = mean_curvature(raw);
  const Frame frame = canonical_gauge(raw, omega.theta, omega);
  const std::vector<double> energy = frame_energies(frame);
  const std::vector<double> m = rammal_wilkinson(frame, fam, energy);

  const EffectiveSymbol sym = effective_symbol(frame, omega.theta);
  const SymbolEvaluator h1 = subprincipal_symbol(sym, SlowFields{});
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-7.0, 7.0);
  double worst_h1 = 0.0;
  for (int s = 0; s < 1000; ++s) worst_h1 = std::max(worst_h1, std::abs(h1({u(rng), u(rng)}, {u(rng), u(rng)})));
  if (worst_h1 != 0.0) out.fail("h1 = " + std::to_string(worst_h1) + " at B = 0");

  double worst_oracle = 0.0;
  for (int i = 0; i < n; i += 16) {
    for (int j = 0; j < n; j += 16) {
      const double expected = oracle::rammal_wilkinson_sum_over_states(fam, 1, frame.point(i, j));
      worst_oracle = std::max(worst_oracle, std::abs(m[static_cast<std::size_t>(i * n + j)] - expected));
    }
  }
  if (worst_oracle >= 1e-6) out.fail("M differs from the oracle by " + std::to_string(worst_oracle));

  double worst_gauge = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const RandomPhase lambda(rng);
    Frame g = frame;
    for (int i = 0; i <= g.count1; ++i) {
      for (int j = 0; j < g.count2; ++j) {
        const Vec2 kappa = g.kappa(i, j);
        g.at(i, j) *= std::polar(1.0, lambda(kappa.x, kappa.y));
      }
    }
    const std::vector<double> mg = rammal_wilkinson(g, fam, energy);
    for (std::size_t k = 0; k < m.size(); ++k) worst_gauge = std::max(worst_gauge, std::abs(mg[k] - m[k]));
  }
  if (worst_gauge >= 1e-6) out.fail("gauge change moves M by " + std::to_string(worst_gauge));
  out.detail << "h1 at B=0 " << worst_h1 << ", oracle error " << worst_oracle << ", gauge error " << worst_gauge;
}

}  // namespace

int main() {
  run(1, "flux 1/3 Chern numbers and gap labels", criterion1);
  run(2, "butterfly interval law for q <= 20", criterion2);
  run(3, "curvature and diophantine Chern numbers for q <= 12", criterion3);
  run(4, "band Chern numbers sum to zero for q <= 20", criterion4);
  run(5, "isospectrality of the Peierls model", criterion5);
  run(6, "subband Chern numbers at flux B0 + tilde B", criterion6);
  run(7, "frame winding, mean curvature and canonical gauge", criterion7);
  run(8, "transport invariants", criterion8);
  run(9, "subprincipal symbol checks", criterion9);
  return failures == 0 ? 0 : 1;
}
