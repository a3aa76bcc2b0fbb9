import numpy as np
import pytest

from ramix.augment import AugmentConfig, augment_spectrum, eval_baseline, substream
from ramix.plot import PlotSpec, render_svg, write_plot
from ramix.spectrum import Spectrum, WavenumberGrid, normalize_minmax


def test_single_series(library, tmp_path):
    spec = PlotSpec([library.pure_spectra[0]], ["aniline"], title="a < b")
    svg = render_svg(spec)
    assert svg.count("<polyline") == 1
    assert "a &lt; b" in svg and "cm⁻¹" in svg
    path = write_plot(spec, tmp_path / "p.svg")
    assert open(path, encoding="utf-8").read() == svg == render_svg(spec)


def test_augmented_overlay_differs_by_baseline(library):
    cfg = AugmentConfig()
    a = augment_spectrum(library.pure_spectra[2], cfg, substream(0, 0))
    clean = normalize_minmax(library.pure_spectra[2])
    base = eval_baseline(a.baseline, clean.grid)
    assert np.allclose(a.spectrum.intensities - clean.intensities, base.intensities, atol=1e-12)
    assert render_svg(PlotSpec([clean, a.spectrum], ["clean", "augmented"])).count("<polyline") == 2


def test_bad_specs(library):
    with pytest.raises(ValueError):
        PlotSpec([], [])
    with pytest.raises(ValueError):
        PlotSpec([library.pure_spectra[0]], ["a", "b"])
    other = Spectrum(WavenumberGrid(0.0, 1.0, 5), np.arange(5.0))
    with pytest.raises(ValueError):
        PlotSpec([library.pure_spectra[0], other], ["a", "b"])
    with pytest.raises(ValueError):
        PlotSpec([other], ["a"], width=50)


def test_flat_series_renders():
    flat = Spectrum(WavenumberGrid(0.0, 1.0, 5), np.zeros(5))
    assert "nan" not in render_svg(PlotSpec([flat], ["flat"]))
