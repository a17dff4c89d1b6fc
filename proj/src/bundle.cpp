#include "magband/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "magband/errors.hpp"
#include "magband/parallel.hpp"

namespace magband {

ProjectorFamily projector_family(const BlochMatrixFamily& family, BandGroup bands) {
  if (bands.first < 0 || bands.last < bands.first || bands.last >= family.dim) {
    throw std::invalid_argument("projector_family: band group outside the family");
  }
  return ProjectorFamily{family, bands};
}

CMatrix ProjectorFamily::basis(Vec2 k) const {
  const EigenDecomposition e = eigh(family(k));
  const auto& ev = e.values;
  if (bands.first > 0 && ev(bands.first) - ev(bands.first - 1) <= min_gap) {
    throw NumericalError("projector: band group touches the band below");
  }
  if (bands.last + 1 < dim() && ev(bands.last + 1) - ev(bands.last) <= min_gap) {
    throw NumericalError("projector: band group touches the band above");
  }
  return e.vectors.middleCols(bands.first, rank());
}

CMatrix ProjectorFamily::projector(Vec2 k) const {
  const CMatrix b = basis(k);
  return b * b.adjoint();
}

CMatrix ProjectorFamily::directional_derivative(Vec2 k, Vec2 d, double h) const {
  const double len = std::hypot(d.x, d.y);
  if (len == 0.0) return CMatrix::Zero(dim(), dim());
  const Vec2 u = d * (h / len);
  return (projector(k + u) - projector(k - u)) * (len / (2.0 * h));
}

CMatrix transport_generator(const ProjectorFamily& p, Vec2 z, Vec2 d) {
  const CMatrix dp = p.directional_derivative(z, d);
  const CMatrix pz = p.projector(z);
  return dp * pz - pz * dp;
}

TransportMatrix berry_transport(const ProjectorFamily& p, Vec2 y, Vec2 x, int steps) {
  return berry_transport(p, y, x, steps, CMatrix::Identity(p.dim(), p.dim()));
}

TransportMatrix berry_transport(const ProjectorFamily& p, Vec2 y, Vec2 x, int steps,
                                const CMatrix& t0) {
  if (steps < 1) throw std::invalid_argument("berry_transport: steps must be positive");
  const Vec2 d = x - y;
  const double h = 1.0 / steps;
  const auto gen = [&](double s) { return transport_generator(p, y + d * s, d); };

  TransportMatrix out{y, x, t0};
  CMatrix& t = out.t;
  CMatrix a0 = gen(0.0);
  for (int n = 0; n < steps; ++n) {
    const double s = n * h;
    const CMatrix am = gen(s + 0.5 * h);
    const CMatrix a1 = gen(s + h);
    const CMatrix k1 = a0 * t;
    const CMatrix k2 = am * (t + (0.5 * h) * k1);
    const CMatrix k3 = am * (t + (0.5 * h) * k2);
    const CMatrix k4 = a1 * (t + h * k3);
    t += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double defect = unitarity_defect(t);
    out.max_step_defect = std::max(out.max_step_defect, defect);
    out.accumulated_defect += defect;
    if (defect > kStepDefectLimit) {
      std::ostringstream msg;
      msg << "berry_transport: step lost " << defect << " of unitarity; increase the step count";
      throw RefinementRequired(msg.str());
    }
    t = polar_unitary(t);
    a0 = a1;
  }
  return out;
}

double intertwining_defect(const ProjectorFamily& p, const TransportMatrix& t) {
  return (p.projector(t.to) * t.t - t.t * p.projector(t.from)).norm();
}

LineFrame line_frame_at(const ProjectorFamily& p, int count2, double offset) {
  if (count2 < 1) throw std::invalid_argument("line frame: count2 must be positive");
  const BlochMatrixFamily& fam = p.family;
  const auto point = [&](int j) {
    return Vec2{offset * fam.period1, static_cast<double>(j) / count2 * fam.period2};
  };

  LineFrame line;
  line.offset = offset;
  line.count2 = count2;
  std::vector<CMatrix> g(static_cast<std::size_t>(count2 + 1));
  g[0] = p.basis(point(0));
  CMatrix t = CMatrix::Identity(p.dim(), p.dim());
  for (int j = 0; j < count2; ++j) {
    const TransportMatrix step = berry_transport(p, point(j), point(j + 1), kTransportStepsPerCell, t);
    line.max_step_defect = std::max(line.max_step_defect, step.max_step_defect);
    t = step.t;
    g[static_cast<std::size_t>(j + 1)] = t * g[0];
  }

  line.closing_defect =
      polar_unitary(g[0].adjoint() * fam.gluing2(point(0)).adjoint() * g[static_cast<std::size_t>(count2)]);
  const CMatrix log_d = unitary_log(line.closing_defect);
  const Eigen::SelfAdjointEigenSolver<CMatrix> phases(log_d);
  if (phases.eigenvalues().cwiseAbs().maxCoeff() > M_PI - 1e-6) {
    throw NumericalError("line frame: closing defect has an eigenvalue at -1");
  }
  line.h.resize(g.size());
  for (int j = 0; j <= count2; ++j) {
    line.h[static_cast<std::size_t>(j)] =
        g[static_cast<std::size_t>(j)] * unitary_exp(log_d, -static_cast<double>(j) / count2);
  }
  return line;
}

LineFrame initial_line_frame(const ProjectorFamily& p, int count2, int count1, int max_shifts) {
  if (count1 < 1) throw std::invalid_argument("line frame: count1 must be positive");
  for (int shift = 0;; ++shift) {
    try {
      return line_frame_at(p, count2, 0.5 * shift / count1);
    } catch (const NumericalError&) {
      if (shift >= max_shifts) throw;
    }
  }
}

CMatrix Frame::wrapped(int i, int j) const {
  if (j < count2) return at(i, j);
  return projector.family.gluing2(point(i, 0)) * at(i, 0);
}

Frame extend_frame(const LineFrame& line, const ProjectorFamily& p, int count1) {
  if (count1 < 1) throw std::invalid_argument("extend_frame: count1 must be positive");
  Frame f;
  f.projector = p;
  f.offset = line.offset;
  f.count1 = count1;
  f.count2 = line.count2;
  f.phi.resize(static_cast<std::size_t>((count1 + 1) * f.count2));
  f.column_drift.assign(static_cast<std::size_t>(f.count2), 0.0);
  std::vector<double> column_max(static_cast<std::size_t>(f.count2), 0.0);

  parallel_for(static_cast<std::size_t>(f.count2), [&](std::size_t col) {
    const int j = static_cast<int>(col);
    const CMatrix& h = line.h[col];
    CMatrix t = CMatrix::Identity(p.dim(), p.dim());
    f.at(0, j) = h;
    for (int i = 0; i < count1; ++i) {
      const TransportMatrix step =
          berry_transport(p, f.point(i, j), f.point(i + 1, j), kTransportStepsPerCell, t);
      t = step.t;
      f.column_drift[col] += step.accumulated_defect;
      column_max[col] = std::max(column_max[col], step.max_step_defect);
      f.at(i + 1, j) = t * h;
    }
  });
  f.max_step_defect = std::max(line.max_step_defect,
                               *std::max_element(column_max.begin(), column_max.end()));
  return f;
}

TransitionFunction transition_function(const Frame& f) {
  const BlochMatrixFamily& fam = f.projector.family;
  TransitionFunction out;
  for (int j = 0; j <= f.count2; ++j) {
    const CMatrix pulled = fam.gluing1(f.point(0, j)).adjoint() * f.wrapped(f.count1, j);
    const CMatrix alpha = (pulled.adjoint() * f.wrapped(0, j)).transpose();
    const double defect = unitarity_defect(alpha);
    out.max_unitarity_defect = std::max(out.max_unitarity_defect, defect);
    if (defect > 1e-6) {
      std::ostringstream msg;
      msg << "transition_function: alpha is not unitary (defect " << defect << ")";
      throw NumericalError(msg.str());
    }
    out.alpha.push_back(alpha);
  }
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < out.alpha.size(); ++j) {
    total += std::arg(out.alpha[j + 1].determinant() / out.alpha[j].determinant());
  }
  out.winding = static_cast<int>(std::lround(total / (2.0 * M_PI)));
  out.theta = -out.winding;
  return out;
}

MeanCurvature mean_curvature(const Frame& f) {
  if (f.rank() != 1) throw std::invalid_argument("mean_curvature: rank-one frames only");
  const BlochMatrixFamily& fam = f.projector.family;
  const auto link = [&](int i, int j) -> cplx {
    if (i < f.count1) return f.wrapped(i, j).col(0).dot(f.wrapped(i, j + 1).col(0));
    const CMatrix a = fam.gluing1(f.point(0, j)).adjoint() * f.wrapped(i, j);
    const CMatrix b = fam.gluing1(f.point(0, j + 1)).adjoint() * f.wrapped(i, j + 1);
    return a.col(0).dot(b.col(0));
  };

  MeanCurvature out;
  out.omega_bar.assign(static_cast<std::size_t>(f.count2 + 1), 0.0);
  for (int j = 0; j < f.count2; ++j) {
    double strip = 0.0;
    cplx prev = link(0, j);
    for (int i = 0; i < f.count1; ++i) {
      const cplx next = link(i + 1, j);
      strip += std::arg(next * std::conj(prev));
      prev = next;
    }
    out.omega_bar[static_cast<std::size_t>(j + 1)] = out.omega_bar[static_cast<std::size_t>(j)] + strip;
  }
  out.chern_real = out.omega_bar.back() / (2.0 * M_PI);
  out.theta = static_cast<int>(std::lround(out.chern_real));
  if (std::abs(out.chern_real - out.theta) > 1e-4) {
    std::ostringstream msg;
    msg << "mean_curvature: Omega(1)/2pi = " << out.chern_real << " is not integral; refine the grid";
    throw RefinementRequired(msg.str());
  }
  return out;
}

Frame canonical_gauge(const Frame& f, int theta) {
  return canonical_gauge(f, theta, mean_curvature(f));
}

Frame canonical_gauge(const Frame& f, int theta, const MeanCurvature& omega) {
  if (f.rank() != 1) throw std::invalid_argument("canonical_gauge: rank-one frames only");
  const TransitionFunction alpha = transition_function(f);
  const double beta0 = -std::arg(alpha.alpha.front()(0, 0));
  Frame out = f;
  for (int j = 0; j < f.count2; ++j) {
    const double kappa2 = static_cast<double>(j) / f.count2;
    const double rate = 2.0 * M_PI * kappa2 * theta - omega.omega_bar[static_cast<std::size_t>(j)] - beta0;
    for (int i = 0; i <= f.count1; ++i) {
      out.at(i, j) *= std::polar(1.0, rate * i / f.count1);
    }
  }
  return out;
}

double canonical_residual(const TransitionFunction& alpha, int theta) {
  double worst = 0.0;
  for (std::size_t j = 0; j < alpha.alpha.size(); ++j) {
    const cplx target = std::polar(1.0, -2.0 * M_PI * theta * alpha.kappa2(j));
    worst = std::max(worst, std::abs(alpha.alpha[j](0, 0) - target));
  }
  return worst;
}

FrameDiagnostics frame_diagnostics(const Frame& f) {
  FrameDiagnostics d;
  const int m = f.rank();
  for (int i = 0; i <= f.count1; ++i) {
    for (int j = 0; j < f.count2; ++j) {
      const CMatrix& phi = f.at(i, j);
      d.max_gram_defect = std::max(d.max_gram_defect, (phi.adjoint() * phi - CMatrix::Identity(m, m)).norm());
      const CMatrix proj = f.projector.projector(f.point(i, j));
      d.max_projector_defect = std::max(d.max_projector_defect, (proj * phi - phi).norm());
      if (i < f.count1) {
        d.max_step_ratio = std::max(d.max_step_ratio, (f.at(i + 1, j) - phi).norm() * f.count1);
      }
      d.max_step_ratio = std::max(d.max_step_ratio, (f.wrapped(i, j + 1) - phi).norm() * f.count2);
    }
  }
  return d;
}

}  // namespace magband
