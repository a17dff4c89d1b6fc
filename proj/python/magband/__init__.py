"""Hofstadter bands, their Chern numbers and the theta-quantized Peierls model."""

from ._core import (
    NumericalError,
    RefinementRequired,
    band_frame,
    butterfly,
    butterfly_csv,
    chern,
    gap_labels,
    hofstadter_intervals,
    hofstadter_matrix,
    isospectrality,
    peierls_matrix,
    render_svg,
    subband_experiment,
    tilde_b,
)

__all__ = [
    "NumericalError",
    "RefinementRequired",
    "band_frame",
    "butterfly",
    "butterfly_csv",
    "chern",
    "gap_labels",
    "hofstadter_intervals",
    "hofstadter_matrix",
    "isospectrality",
    "peierls_matrix",
    "render_svg",
    "subband_experiment",
    "tilde_b",
]
