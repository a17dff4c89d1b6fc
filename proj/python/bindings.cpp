#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

#include "magband/bundle.hpp"
#include "magband/errors.hpp"
#include "magband/hofstadter.hpp"
#include "magband/io.hpp"
#include "magband/peierls.hpp"
#include "magband/topology.hpp"

namespace py = pybind11;
using namespace magband;

namespace {

py::list interval_list(const IntervalSet& set) {
  py::list out;
  for (const Interval& iv : set) out.append(py::make_tuple(iv.lo, iv.hi));
  return out;
}

py::list group_list(const std::vector<BandGroup>& groups) {
  py::list out;
  for (const BandGroup& g : groups) out.append(py::make_tuple(g.first, g.last));
  return out;
}

py::tuple rational_tuple(Rational r) { return py::make_tuple(r.num(), r.den()); }

ButterflyData butterfly_data(int max_q, int density, bool refine, bool color) {
  ButterflyData data = butterfly(max_q, density, refine);
  return color ? colored_butterfly(std::move(data)) : data;
}

py::dict chern_dict(const ChernReport& r) {
  py::dict d;
  d["groups"] = group_list(r.groups);
  d["group_chern"] = r.group_chern;
  d["per_gap"] = r.per_gap;
  d["grid"] = py::make_tuple(r.grid.count1, r.grid.count2);
  d["max_plaquette_phase"] = r.max_plaquette_phase;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the magband package.";

  py::register_exception<RefinementRequired>(m, "RefinementRequired", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def(
      "hofstadter_matrix",
      [](int p, int q, double k1, double k2) { return CMatrix(hofstadter_matrix(rational_flux(p, q), {k1, k2})); },
      py::arg("p"), py::arg("q"), py::arg("k1"), py::arg("k2"),
      "q x q Bloch matrix of the Hofstadter model at flux p/q.");

  m.def(
      "hofstadter_intervals",
      [](int p, int q, int density, bool refine) {
        return interval_list(hofstadter_intervals(rational_flux(p, q), density, refine));
      },
      py::arg("p"), py::arg("q"), py::arg("density") = kInteractiveGridDensity, py::arg("refine") = true,
      "Spectral intervals (lo, hi) at flux p/q, touching bands merged.");

  m.def(
      "butterfly",
      [](int max_q, int density, bool refine) {
        ButterflyData data;
        {
          py::gil_scoped_release release;
          data = butterfly(max_q, density, refine);
        }
        py::list rows;
        for (const ButterflyRow& row : data.rows)
          rows.append(py::make_tuple(row.flux.p, row.flux.q, interval_list(row.intervals)));
        return rows;
      },
      py::arg("max_q"), py::arg("density") = kSweepGridDensity, py::arg("refine") = true,
      "Rows (p, q, intervals) for every reduced flux with denominator <= max_q.");

  m.def(
      "butterfly_csv",
      [](int max_q, int density, bool refine) { return butterfly_csv(butterfly(max_q, density, refine)); },
      py::arg("max_q"), py::arg("density") = kSweepGridDensity, py::arg("refine") = true);

  m.def(
      "render_svg",
      [](int max_q, int density, bool color, int width, int height) {
        return render_svg(butterfly_data(max_q, density, true, color), SvgOptions{width, height, color});
      },
      py::arg("max_q"), py::arg("density") = kSweepGridDensity, py::arg("color") = false, py::arg("width") = 800,
      py::arg("height") = 600);

  m.def(
      "chern",
      [](int p, int q, int density) { return chern_dict(hofstadter_chern(rational_flux(p, q), density)); },
      py::arg("p"), py::arg("q"), py::arg("density") = kChernGridDensity,
      "Link-variable Chern numbers of the Hofstadter bands at flux p/q.");

  m.def(
      "gap_labels",
      [](int p, int q) { return gap_labels_diophantine(rational_flux(p, q)).labels; }, py::arg("p"), py::arg("q"),
      "Diophantine labels of the gaps r = 1..q-1, None where the gap is closed.");

  m.def(
      "band_frame",
      [](int p, int q, int band, int n) {
        const BlochMatrixFamily fam = hofstadter_family(rational_flux(p, q));
        const ProjectorFamily proj = projector_family(fam, {band, band});
        const Frame frame = extend_frame(initial_line_frame(proj, n, n), proj, n);
        const TransitionFunction alpha = transition_function(frame);
        const MeanCurvature omega = mean_curvature(frame);
        const TransitionFunction canon = transition_function(canonical_gauge(frame, omega.theta, omega));
        py::dict d;
        d["theta"] = alpha.theta;
        d["omega_over_2pi"] = omega.chern_real;
        d["canonical_residual"] = canonical_residual(canon, omega.theta);
        d["max_column_drift"] = *std::max_element(frame.column_drift.begin(), frame.column_drift.end());
        d["offset"] = frame.offset;
        return d;
      },
      py::arg("p"), py::arg("q"), py::arg("band"), py::arg("n") = 200,
      "Transported frame of one isolated band (zero-based) on an n x n grid.");

  m.def(
      "peierls_matrix",
      [](int theta, int q, int ptilde, int qtilde, double k1, double k2) {
        return CMatrix(peierls_matrix(peierls_params(theta, q, ptilde, qtilde), {k1, k2}));
      },
      py::arg("theta"), py::arg("q"), py::arg("ptilde"), py::arg("qtilde"), py::arg("k1"), py::arg("k2"));

  m.def(
      "isospectrality",
      [](int theta, int q, int ptilde, int qtilde, int density) {
        const IsospectralityReport r = isospectrality_report(peierls_params(theta, q, ptilde, qtilde), density);
        py::dict d;
        d["peierls"] = interval_list(r.peierls);
        d["hofstadter"] = interval_list(r.hofstadter);
        d["distance"] = r.distance;
        return d;
      },
      py::arg("theta"), py::arg("q"), py::arg("ptilde"), py::arg("qtilde"),
      py::arg("density") = kInteractiveGridDensity);

  m.def(
      "tilde_b",
      [](int theta, int q, long num, long den) {
        const TildeB t = tilde_b(theta, q, Rational(num, den));
        return py::make_tuple(t.value, t.exact ? py::object(rational_tuple(*t.exact)) : py::object(py::none()));
      },
      py::arg("theta"), py::arg("q"), py::arg("num"), py::arg("den"),
      "Effective field for B = 2 pi num / den: (radians, exact fraction of 2 pi or None).");

  m.def(
      "subband_experiment",
      [](int theta, int q, int ptilde, int qtilde) {
        const SubbandExperiment e = subband_chern_experiment(theta, q, ptilde, qtilde);
        py::dict d;
        d["parent"] = py::make_tuple(e.parent.flux.p, e.parent.flux.q, e.parent.band);
        d["tilde_b"] = rational_tuple(e.tilde_b);
        d["flux"] = py::make_tuple(e.flux.p, e.flux.q);
        d["window"] = py::make_tuple(e.window_lo, e.window_hi);
        d["peierls_chern"] = e.peierls_chern;
        d["hofstadter_chern"] = e.hofstadter_chern;
        d["status"] = std::string(to_string(e.status));
        d["note"] = e.note;
        return d;
      },
      py::arg("theta"), py::arg("q"), py::arg("ptilde"), py::arg("qtilde"));
}
