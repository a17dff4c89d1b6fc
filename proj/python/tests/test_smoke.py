import math

import numpy as np
import pytest

import magband


def test_matrix_is_hermitian_and_matches_closed_form():
    h = magband.hofstadter_matrix(1, 3, 0.0, 0.0)
    assert h.shape == (3, 3)
    assert np.allclose(h, h.conj().T)
    assert np.allclose(h.real, [[2, 1, 1], [1, -1, 1], [1, 1, -1]])


def test_third_flux_chern_numbers_and_gap_labels():
    report = magband.chern(1, 3)
    assert report["group_chern"] == [1, -2, 1]
    assert report["per_gap"] == [1, -1]
    assert report["grid"] == (40, 40)
    assert magband.gap_labels(1, 3) == [1, -1]
    assert magband.gap_labels(1, 2) == [None]


def test_half_flux_spectrum():
    (lo, hi), = magband.hofstadter_intervals(1, 2)
    assert lo == pytest.approx(-2 * math.sqrt(2), abs=1e-8)
    assert hi == pytest.approx(2 * math.sqrt(2), abs=1e-8)


def test_small_butterfly_counts():
    rows = magband.butterfly(5, density=32)
    for p, q, intervals in rows:
        if p == q:
            continue
        assert len(intervals) == (q if q % 2 else q - 1)
    text = magband.butterfly_csv(2, density=32)
    assert text.startswith("flux_p,flux_q,flux_value,interval_index,lo,hi\n")
    svg = magband.render_svg(3, density=32, color=True)
    assert svg.startswith("<?xml") and svg.endswith("</svg>\n")


def test_frame_of_middle_band():
    frame = magband.band_frame(1, 3, 1, n=80)
    assert frame["theta"] == -2
    assert abs(frame["omega_over_2pi"] + 2) < 1e-4
    assert frame["canonical_residual"] < 1e-6


def test_touching_band_raises():
    with pytest.raises(magband.NumericalError):
        magband.band_frame(1, 2, 0, n=16)


def test_peierls_model():
    h = magband.peierls_matrix(-2, 3, 1, 2, 0.0, 0.0)
    assert np.allclose(h.real, [[2, 2], [2, -2]])
    iso = magband.isospectrality(-2, 3, 1, 2)
    assert iso["distance"] < 1e-8
    value, exact = magband.tilde_b(-2, 3, 1, 27)
    assert exact == (1, 33)
    assert value == pytest.approx(2 * math.pi / 33)
    with pytest.raises(ValueError):
        magband.tilde_b(1, 2, 1, 2)


def test_subband_experiment_matches():
    e = magband.subband_experiment(-2, 3, 1, 3)
    assert e["flux"] == (4, 11)
    assert e["peierls_chern"] == [3, -8, 3]
    assert e["status"] == "match"
