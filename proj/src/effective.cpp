#include "magband/effective.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "magband/errors.hpp"
#include "magband/parallel.hpp"

namespace magband {

Vec2 SlowFields::potential_gradient(Vec2 r) const {
  if (grad_phi) return grad_phi(r);
  if (!phi) return {};
  const double h = kFieldFdStep;
  return {(phi({r.x + h, r.y}) - phi({r.x - h, r.y})) / (2 * h),
          (phi({r.x, r.y + h}) - phi({r.x, r.y - h})) / (2 * h)};
}

namespace {

double curl_fd(const std::function<Vec2(Vec2)>& a, Vec2 r) {
  const double h = kFieldFdStep;
  const double d1a2 = (a({r.x + h, r.y}).y - a({r.x - h, r.y}).y) / (2 * h);
  const double d2a1 = (a({r.x, r.y + h}).x - a({r.x, r.y - h}).x) / (2 * h);
  return d1a2 - d2a1;
}

}  // namespace

double SlowFields::field(Vec2 r) const {
  if (b) return b(r);
  return a ? curl_fd(a, r) : 0.0;
}

double SlowFields::field_consistency(Vec2 r) const {
  const double curl = a ? curl_fd(a, r) : 0.0;
  return std::abs(field(r) - curl);
}

SlowFields uniform_field(double b, double c) {
  SlowFields f;
  f.phi = [c](Vec2) { return c; };
  f.grad_phi = [](Vec2) { return Vec2{}; };
  f.a = [b](Vec2 r) { return Vec2{-b * r.y, 0.0}; };
  f.b = [b](Vec2) { return b; };
  return f;
}

FrameField::FrameField(const Frame& frame) : frame_(frame) {
  if (frame.rank() != 1) throw std::invalid_argument("FrameField: rank-one frames only");
  const TransitionFunction tf = transition_function(frame);
  for (int j = 0; j < frame.count2; ++j) alpha_.push_back(tf.alpha[static_cast<std::size_t>(j)](0, 0));
}

CVector FrameField::at(int i, int j) const {
  const BlochMatrixFamily& fam = frame_.projector.family;
  const int n1 = frame_.count1;
  const int n2 = frame_.count2;
  if (j >= n2) return fam.gluing2(frame_.point(i, j - n2)) * at(i, j - n2);
  if (j < 0) return fam.gluing2(frame_.point(i, j)).adjoint() * at(i, j + n2);
  const cplx a = alpha_[static_cast<std::size_t>(j)];
  if (i > n1) return std::conj(a) * (fam.gluing1(frame_.point(i - n1, j)) * at(i - n1, j));
  if (i < 0) return a * (fam.gluing1(frame_.point(i, j)).adjoint() * at(i + n1, j));
  return frame_.at(i, j).col(0);
}

CVector FrameField::derivative(int i, int j, int axis, int order, int spacing, bool covariant) const {
  if (order != 2 && order != 4 && order != 6) {
    throw std::invalid_argument("FrameField: order must be 2, 4 or 6");
  }
  const CVector centre = at(i, j);
  const auto neighbour = [&](int m) -> CVector {
    CVector v = axis == 0 ? at(i + m * spacing, j) : at(i, j + m * spacing);
    if (covariant) {
      const cplx c = centre.dot(v);
      v *= std::conj(c) / std::abs(c);
    }
    return v;
  };
  const double h = static_cast<double>(spacing) / (axis == 0 ? frame_.count1 : frame_.count2);
  if (order == 2) return (neighbour(1) - neighbour(-1)) / (2.0 * h);
  if (order == 6) {
    return (45.0 * (neighbour(1) - neighbour(-1)) - 9.0 * (neighbour(2) - neighbour(-2)) +
            (neighbour(3) - neighbour(-3))) /
           (60.0 * h);
  }
  return (8.0 * (neighbour(1) - neighbour(-1)) - (neighbour(2) - neighbour(-2))) / (12.0 * h);
}

double FrameField::phase_derivative(int i, int j, int axis) const {
  const CVector centre = at(i, j);
  const auto phase = [&](int m) {
    return std::arg(centre.dot(axis == 0 ? at(i + m, j) : at(i, j + m)));
  };
  const double h = 1.0 / (axis == 0 ? frame_.count1 : frame_.count2);
  return (8.0 * (phase(1) - phase(-1)) - (phase(2) - phase(-2))) / (12.0 * h);
}

double FrameField::normalization_drift(int i, int j, int axis) const {
  const auto norm2 = [&](int m) { return (axis == 0 ? at(i + m, j) : at(i, j + m)).squaredNorm(); };
  const double h = 1.0 / (axis == 0 ? frame_.count1 : frame_.count2);
  return 0.5 * (8.0 * (norm2(1) - norm2(-1)) - (norm2(2) - norm2(-2))) / (12.0 * h);
}

ConnectionCoefficients connection_coefficients(const Frame& canonical, int theta) {
  const FrameField field(canonical);
  ConnectionCoefficients c;
  c.count1 = canonical.count1;
  c.count2 = canonical.count2;
  c.theta = theta;
  const std::size_t size = static_cast<std::size_t>((c.count1 + 1) * c.count2);
  c.a1.resize(size);
  c.a2.resize(size);
  std::vector<double> residue(size, 0.0);
  parallel_for(static_cast<std::size_t>(c.count1 + 1), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    for (int j = 0; j < c.count2; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i * c.count2 + j);
      c.a1[idx] = field.phase_derivative(i, j, 0) / (2.0 * M_PI);
      c.a2[idx] = field.phase_derivative(i, j, 1) / (2.0 * M_PI);
      for (int axis = 0; axis < 2; ++axis) {
        residue[idx] = std::max(residue[idx], std::abs(field.normalization_drift(i, j, axis)));
      }
    }
  });
  for (double r : residue) c.max_real_residue = std::max(c.max_real_residue, r);
  if (c.max_real_residue > kRealResidueLimit) {
    std::ostringstream msg;
    msg << "connection_coefficients: |Re <phi, d phi>| = " << c.max_real_residue
        << " exceeds " << kRealResidueLimit << "; the frame has lost normalization";
    throw NumericalError(msg.str());
  }
  for (int j = 0; j < c.count2; ++j) {
    c.max_periodicity_defect =
        std::max({c.max_periodicity_defect, std::abs(c.at1(c.count1, j) - c.at1(0, j)),
                  std::abs(c.at2(c.count1, j) - theta - c.at2(0, j))});
  }
  return c;
}

std::vector<double> frame_energies(const Frame& frame) {
  std::vector<double> e(static_cast<std::size_t>(frame.count1 * frame.count2));
  const int band = frame.projector.bands.first;
  parallel_for(static_cast<std::size_t>(frame.count1), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    for (int j = 0; j < frame.count2; ++j) {
      e[static_cast<std::size_t>(i * frame.count2 + j)] =
          eigvalsh(frame.projector.family(frame.point(i, j)))(band);
    }
  });
  return e;
}

std::vector<double> rammal_wilkinson(const Frame& frame, const BlochMatrixFamily& family,
                                     const std::vector<double>& energy, int order) {
  const FrameField field(frame);
  std::vector<double> m(static_cast<std::size_t>(frame.count1 * frame.count2));
  parallel_for(static_cast<std::size_t>(frame.count1), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    for (int j = 0; j < frame.count2; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i * frame.count2 + j);
      const CVector d1 = field.derivative(i, j, 0, order, 1, true) / family.period1;
      const CVector d2 = field.derivative(i, j, 1, order, 1, true) / family.period2;
      CMatrix h = family(frame.point(i, j));
      h.diagonal().array() -= energy[idx];
      m[idx] = -d1.dot(h * d2).imag();
    }
  });
  return m;
}

PeriodicInterpolator::PeriodicInterpolator(int n1, int n2, std::vector<double> values)
    : n1_(n1), n2_(n2), v_(std::move(values)) {
  if (n1 < 1 || n2 < 1 || v_.size() != static_cast<std::size_t>(n1 * n2)) {
    throw std::invalid_argument("PeriodicInterpolator: sample count does not match the grid");
  }
}

namespace {

// Cubic convolution kernel with a = -1/2.
void cubic_weights(double t, double w[4]) {
  const auto kernel = [](double x) {
    x = std::abs(x);
    if (x <= 1.0) return (1.5 * x - 2.5) * x * x + 1.0;
    if (x < 2.0) return ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0;
    return 0.0;
  };
  w[0] = kernel(1.0 + t);
  w[1] = kernel(t);
  w[2] = kernel(1.0 - t);
  w[3] = kernel(2.0 - t);
}

int wrap(long i, int n) {
  const long r = i % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

}  // namespace

double PeriodicInterpolator::operator()(double u1, double u2) const {
  const double f1 = std::floor(u1);
  const double f2 = std::floor(u2);
  double w1[4];
  double w2[4];
  cubic_weights(u1 - f1, w1);
  cubic_weights(u2 - f2, w2);
  const long i0 = static_cast<long>(f1);
  const long j0 = static_cast<long>(f2);
  double sum = 0.0;
  for (int a = 0; a < 4; ++a) {
    const int i = wrap(i0 + a - 1, n1_);
    double row = 0.0;
    for (int b = 0; b < 4; ++b) row += w2[b] * v_[static_cast<std::size_t>(i * n2_ + wrap(j0 + b - 1, n2_))];
    sum += w1[a] * row;
  }
  return sum;
}

EffectiveSymbol effective_symbol(const Frame& canonical, int theta, double epsilon) {
  const BlochMatrixFamily& fam = canonical.projector.family;
  const int n1 = canonical.count1;
  const int n2 = canonical.count2;
  const std::vector<double> energy = frame_energies(canonical);
  const ConnectionCoefficients conn = connection_coefficients(canonical, theta);
  const std::vector<double> m = rammal_wilkinson(canonical, fam, energy);

  const std::size_t size = static_cast<std::size_t>(n1 * n2);
  std::vector<double> d1(size);
  std::vector<double> d2(size);
  std::vector<double> a1(size);
  std::vector<double> p2(size);
  constexpr double h = 1e-6;
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i * n2 + j);
      const Vec2 k = canonical.point(i, j);
      const CVector phi = canonical.at(i, j).col(0);
      // Hellmann-Feynman: dE = <phi, dH phi>
      const CMatrix dh1 = (fam({k.x + h, k.y}) - fam({k.x - h, k.y})) / (2 * h);
      const CMatrix dh2 = (fam({k.x, k.y + h}) - fam({k.x, k.y - h})) / (2 * h);
      d1[idx] = phi.dot(dh1 * phi).real();
      d2[idx] = phi.dot(dh2 * phi).real();
      a1[idx] = conn.at1(i, j);
      p2[idx] = conn.at2(i, j) - theta * static_cast<double>(i) / n1;
    }
  }

  EffectiveSymbol s;
  s.theta = theta;
  s.period1 = fam.period1;
  s.period2 = fam.period2;
  s.offset = canonical.offset;
  s.count1 = n1;
  s.count2 = n2;
  s.epsilon = epsilon;
  s.energy = PeriodicInterpolator(n1, n2, energy);
  s.d1_energy = PeriodicInterpolator(n1, n2, std::move(d1));
  s.d2_energy = PeriodicInterpolator(n1, n2, std::move(d2));
  s.a1 = PeriodicInterpolator(n1, n2, std::move(a1));
  s.p2 = PeriodicInterpolator(n1, n2, std::move(p2));
  s.rw = PeriodicInterpolator(n1, n2, m);
  return s;
}

EffectiveSymbol effective_symbol(const BlochMatrixFamily& family, int band, int count, double epsilon) {
  const ProjectorFamily p = projector_family(family, {band, band});
  const Frame frame = extend_frame(initial_line_frame(p, count, count), p, count);
  const MeanCurvature omega = mean_curvature(frame);
  return effective_symbol(canonical_gauge(frame, omega.theta, omega), omega.theta, epsilon);
}

SymbolEvaluator principal_symbol(const EffectiveSymbol& sym, const SlowFields& fields) {
  auto s = std::make_shared<const EffectiveSymbol>(sym);
  return [s, fields](Vec2 k, Vec2 r) { return s->e(k - fields.vector_potential(r)) + fields.potential(r); };
}

SymbolEvaluator subprincipal_symbol(const EffectiveSymbol& sym, const SlowFields& fields) {
  auto s = std::make_shared<const EffectiveSymbol>(sym);
  return [s, fields](Vec2 k, Vec2 r) {
    const Vec2 a = fields.vector_potential(r);
    if (std::abs(a.y) > 1e-12) {
      std::ostringstream msg;
      msg << "subprincipal_symbol: vector potential violates the gauge A2 = 0 (A2 = " << a.y << ")";
      throw std::invalid_argument(msg.str());
    }
    const Vec2 kt = k - a;
    const double b = fields.field(r);
    const Vec2 grad_phi = fields.potential_gradient(r);
    const Vec2 grad_e = s->grad_e(kt);
    const double lorentz1 = -b * grad_e.y - grad_phi.x;
    const double lorentz2 = b * grad_e.x - grad_phi.y;
    const double c1 = s->conn1(kt) * (2.0 * M_PI / s->period1);
    const double c2 = (s->conn2_periodic(kt) - s->theta * a.x / s->period1) * (2.0 * M_PI / s->period2);
    return c1 * lorentz1 + c2 * lorentz2 + b * s->m(kt);
  };
}

SymbolEvaluator effective_hamiltonian_symbol(const EffectiveSymbol& sym, const SlowFields& fields) {
  const SymbolEvaluator h0 = principal_symbol(sym, fields);
  const SymbolEvaluator h1 = subprincipal_symbol(sym, fields);
  const double eps = sym.epsilon;
  return [h0, h1, eps](Vec2 k, Vec2 r) { return h0(k, r) + eps * h1(k, r); };
}

}  // namespace magband
