#include <random>

#include "doctest.h"
#include "magband/bundle.hpp"
#include "magband/effective.hpp"
#include "magband/errors.hpp"
#include "magband/hofstadter.hpp"
#include "oracles.hpp"

using namespace magband;

namespace {

BlochMatrixFamily constant_family() {
  BlochMatrixFamily f;
  f.dim = 3;
  f.period1 = 2 * M_PI;
  f.period2 = 2 * M_PI;
  f.hamiltonian = [](Vec2) {
    CMatrix h = CMatrix::Zero(3, 3);
    h.diagonal() << -1.0, 0.5, 2.0;
    return h;
  };
  return f;
}

struct BandFrame {
  Frame frame;
  TransitionFunction alpha;
  MeanCurvature omega;
};

BandFrame band_frame(RationalFlux flux, BandGroup bands, int n) {
  const ProjectorFamily p = projector_family(hofstadter_family(flux), bands);
  Frame f = extend_frame(initial_line_frame(p, n, n), p, n);
  TransitionFunction a = transition_function(f);
  MeanCurvature m = f.rank() == 1 ? mean_curvature(f) : MeanCurvature{};
  return {std::move(f), std::move(a), std::move(m)};
}

// Smooth 1-periodic function with random Fourier coefficients.
struct RandomTrig {
  double a[3], b[3], c;
  explicit RandomTrig(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int m = 0; m < 3; ++m) {
      a[m] = u(rng);
      b[m] = u(rng);
    }
    c = u(rng);
  }
  double operator()(double x) const {
    double s = c;
    for (int m = 0; m < 3; ++m) s += a[m] * std::cos(2 * M_PI * (m + 1) * x) + b[m] * std::sin(2 * M_PI * (m + 1) * x);
    return s;
  }
};

}  // namespace

TEST_CASE("projector family basics") {
  const ProjectorFamily p = projector_family(hofstadter_family({1, 3}), {1, 1});
  CHECK(p.rank() == 1);
  CHECK(p.dim() == 3);
  const CMatrix proj = p.projector({0.4, 1.3});
  CHECK((proj * proj - proj).norm() < 1e-10);
  CHECK((proj - proj.adjoint()).norm() < 1e-10);
  CHECK(std::abs(proj.trace() - 1.0) < 1e-10);
  CHECK_THROWS_AS(projector_family(hofstadter_family({1, 3}), {2, 3}), std::invalid_argument);
  const ProjectorFamily touching = projector_family(hofstadter_family({1, 2}), {0, 0});
  CHECK_THROWS_AS(touching.basis({M_PI / 2, M_PI / 2}), NumericalError);
}

TEST_CASE("constant projector transports trivially") {
  const ProjectorFamily p = projector_family(constant_family(), {0, 0});
  const TransportMatrix t = berry_transport(p, {0.1, 0.2}, {2.0, -1.0}, 8);
  CHECK((t.t - CMatrix::Identity(3, 3)).norm() < 1e-14);

  const LineFrame line = initial_line_frame(p, 16);
  for (const CMatrix& h : line.h) CHECK((h - line.h[0]).norm() < 1e-14);
  const Frame f = extend_frame(line, p, 16);
  for (const CMatrix& phi : f.phi) CHECK((phi - f.phi[0]).norm() < 1e-14);

  const TransitionFunction a = transition_function(f);
  for (const CMatrix& m : a.alpha) CHECK((m - CMatrix::Identity(1, 1)).norm() < 1e-14);
  CHECK(a.theta == 0);
  const MeanCurvature om = mean_curvature(f);
  for (double w : om.omega_bar) CHECK(std::abs(w) < 1e-14);
  CHECK(om.theta == 0);
  const Frame c = canonical_gauge(f, 0);
  for (std::size_t n = 0; n < f.phi.size(); ++n) CHECK((c.phi[n] - f.phi[n]).norm() < 1e-14);
}

TEST_CASE("first-order Taylor expansion with quadratic remainder") {
  const ProjectorFamily p = projector_family(hofstadter_family({1, 3}), {1, 1});
  const Vec2 z{0.31, 0.77};
  const Vec2 dir{0.6, 0.8};
  double previous = 0.0;
  for (double delta : {0.1, 0.05, 0.025}) {
    const Vec2 d = dir * delta;
    const TransportMatrix t = berry_transport(p, z, z + d, 200);
    const CMatrix linear = CMatrix::Identity(3, 3) + transport_generator(p, z, d);
    const double remainder = (t.t - linear).norm();
    if (previous > 0.0) CHECK(std::abs(previous / remainder - 4.0) < 0.4);
    previous = remainder;
  }
}

TEST_CASE("transport composition and intertwining") {
  const ProjectorFamily p = projector_family(hofstadter_family({1, 3}), {0, 0});
  const Vec2 z{0.1, 0.3}, y{0.9, 1.7}, x{1.7, 3.1};
  const TransportMatrix direct = berry_transport(p, z, x, 80);
  const TransportMatrix first = berry_transport(p, z, y, 40);
  const TransportMatrix second = berry_transport(p, y, x, 40);
  CHECK((direct.t - second.t * first.t).norm() < 1e-6);
  CHECK(intertwining_defect(p, direct) < 1e-7);
  CHECK(intertwining_defect(p, first) < 1e-7);
  CHECK(unitarity_defect(direct.t) < 1e-8);
  CHECK(direct.max_step_defect < kStepDefectLimit);
}

TEST_CASE("too few steps request refinement") {
  const ProjectorFamily p = projector_family(hofstadter_family({1, 3}), {1, 1});
  CHECK_THROWS_AS(berry_transport(p, {0.0, 0.0}, {2.0, 6.0}, 1), RefinementRequired);
  CHECK_THROWS_AS(berry_transport(p, {0.0, 0.0}, {1.0, 1.0}, 0), std::invalid_argument);
}

TEST_CASE("plaquette holonomy matches the link-variable phase") {
  const BlochMatrixFamily fam = hofstadter_family({1, 3});
  const ProjectorFamily p = projector_family(fam, {0, 0});
  const Vec2 z{0.2, 0.9};
  for (double a : {0.2, 0.1}) {
    const Vec2 c[4] = {z, z + Vec2{a, 0}, z + Vec2{a, a}, z + Vec2{0, a}};
    CMatrix t = CMatrix::Identity(3, 3);
    for (int s = 0; s < 4; ++s) t = berry_transport(p, c[s], c[(s + 1) % 4], 20).t * t;
    const CVector u = p.basis(z).col(0);
    const double holonomy = std::arg(u.dot(t * u));

    cplx links = 1.0;
    for (int s = 0; s < 4; ++s) links *= p.basis(c[s]).col(0).dot(p.basis(c[(s + 1) % 4]).col(0));
    const double plaquette = std::arg(links);
    CHECK(std::abs(plaquette) > 1e-3);
    CHECK(std::abs(holonomy + plaquette) < 0.05 * std::abs(plaquette));
  }
}

TEST_CASE("line frames are periodic and orthonormal") {
  // The closing mismatch is the transport error of the fourth-order
  // integrator, so doubling the sample count shrinks it about 16 times.
  const auto closing = [](const ProjectorFamily& p, int n) {
    const LineFrame line = initial_line_frame(p, n);
    REQUIRE(line.h.size() == static_cast<std::size_t>(n + 1));
    for (const CMatrix& h : line.h) CHECK((h.adjoint() * h - CMatrix::Identity(p.rank(), p.rank())).norm() < 1e-8);
    const Vec2 origin{line.offset * p.family.period1, 0.0};
    return (line.h.back() - p.family.gluing2(origin) * line.h.front()).norm();
  };
  for (int band = 0; band < 3; ++band) {
    const ProjectorFamily p = projector_family(hofstadter_family({1, 3}), {band, band});
    const double coarse = closing(p, 48);
    const double fine = closing(p, 96);
    CHECK(coarse < 1e-6);
    CHECK(fine < coarse / 8);
  }

  const ProjectorFamily pair = projector_family(hofstadter_family({1, 5}), {0, 1});
  const double coarse = closing(pair, 48);
  CHECK(coarse < 1e-6);
  CHECK(closing(pair, 96) < coarse / 8);
}

TEST_CASE("a Berry phase of pi moves the line-frame origin") {
  // band 1 of flux 1/3 has Berry phase pi along kappa1 = 0
  const ProjectorFamily p = projector_family(hofstadter_family({1, 3}), {0, 0});
  CHECK_THROWS_AS(line_frame_at(p, 48, 0.0), NumericalError);
  const LineFrame line = initial_line_frame(p, 48, 64);
  CHECK(line.offset == doctest::Approx(0.5 / 64));
}

TEST_CASE("extended frame invariants for flux 1/3 band 2") {
  const BandFrame bf = band_frame({1, 3}, {1, 1}, 100);
  const FrameDiagnostics d = frame_diagnostics(bf.frame);
  CHECK(d.max_gram_defect < 1e-8);
  CHECK(d.max_projector_defect < 1e-7);
  CHECK(d.max_step_ratio < 50.0);
  for (double drift : bf.frame.column_drift) CHECK(drift < 1e-9);

  // parallel along kappa1: <phi, d phi / d kappa1> vanishes
  const FrameField field(bf.frame);
  double worst = 0.0;
  for (int i = 0; i <= 100; i += 10) {
    for (int j = 0; j < 100; j += 10) {
      const CVector d1 = field.derivative(i, j, 0, 6, 1, false);
      worst = std::max(worst, std::abs(field.at(i, j).dot(d1)));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("transition functions and curvature of flux 1/3") {
  const int expected[] = {1, -2, 1};
  for (int band = 0; band < 3; ++band) {
    const BandFrame bf = band_frame({1, 3}, {band, band}, 120);
    CHECK(bf.alpha.theta == expected[band]);
    CHECK(bf.alpha.max_unitarity_defect < 1e-8);
    CHECK((bf.alpha.alpha.front() - bf.alpha.alpha.back()).norm() < 1e-7);
    CHECK(std::abs(bf.omega.chern_real - expected[band]) < 1e-4);
    CHECK(bf.omega.theta == expected[band]);

    const Frame canonical = canonical_gauge(bf.frame, bf.omega.theta, bf.omega);
    const TransitionFunction a = transition_function(canonical);
    CHECK(canonical_residual(a, bf.omega.theta) < 1e-6);
    for (std::size_t j = 0; j < a.alpha.size(); j += 20) {
      const cplx target = std::polar(1.0, -2 * M_PI * expected[band] * a.kappa2(j));
      CHECK(std::abs(a.alpha[j](0, 0) - target) < 1e-6);
    }
  }
}

TEST_CASE("rank-two frames") {
  const BandFrame bf = band_frame({1, 5}, {0, 1}, 80);
  CHECK(bf.frame.rank() == 2);
  CHECK(frame_diagnostics(bf.frame).max_gram_defect < 1e-8);
  CHECK(bf.alpha.theta == 2);
  CHECK(bf.alpha.max_unitarity_defect < 1e-8);
  CHECK_THROWS_AS(mean_curvature(bf.frame), std::invalid_argument);
  CHECK_THROWS_AS(canonical_gauge(bf.frame, 2), std::invalid_argument);
}

TEST_CASE("gauge covariance of the transition function") {
  std::mt19937 rng(29);
  const int n = 64;
  SUBCASE("rank one") {
    const ProjectorFamily p = projector_family(hofstadter_family({1, 3}), {1, 1});
    const LineFrame line = initial_line_frame(p, n, n);
    const TransitionFunction base = transition_function(extend_frame(line, p, n));
    for (int trial = 0; trial < 5; ++trial) {
      const RandomTrig lambda(rng);
      LineFrame moved = line;
      for (int j = 0; j <= n; ++j) moved.h[static_cast<std::size_t>(j)] *= std::polar(1.0, lambda(static_cast<double>(j) / n));
      const TransitionFunction a = transition_function(extend_frame(moved, p, n));
      CHECK(a.theta == base.theta);
      for (std::size_t j = 0; j < a.alpha.size(); ++j) CHECK((a.alpha[j] - base.alpha[j]).norm() < 1e-10);
    }
  }
  SUBCASE("rank two") {
    const ProjectorFamily p = projector_family(hofstadter_family({1, 5}), {0, 1});
    const LineFrame line = initial_line_frame(p, n, n);
    const TransitionFunction base = transition_function(extend_frame(line, p, n));
    for (int trial = 0; trial < 5; ++trial) {
      const RandomTrig l0(rng), l1(rng), l2(rng);
      std::vector<CMatrix> u;
      LineFrame moved = line;
      for (int j = 0; j <= n; ++j) {
        const double s = static_cast<double>(j) / n;
        CMatrix k(2, 2);
        k << l0(s), cplx(l1(s), l2(s)), cplx(l1(s), -l2(s)), -l0(s);
        u.push_back(unitary_exp(k, 1.0));
        moved.h[static_cast<std::size_t>(j)] = moved.h[static_cast<std::size_t>(j)] * u.back();
      }
      const TransitionFunction a = transition_function(extend_frame(moved, p, n));
      CHECK(a.theta == base.theta);
      for (std::size_t j = 0; j < a.alpha.size(); j += 8) {
        const CMatrix cocycle = u[j].transpose() * base.alpha[j] * u[j].conjugate();
        CHECK((a.alpha[j] - cocycle).norm() < 1e-9);
      }
    }
  }
}
