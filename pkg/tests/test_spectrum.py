import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ramix.errors import DegenerateSpectrumError, GridError, LabelError, SpectrumFormatError
from ramix.spectrum import (
    CANONICAL_GRID,
    MixtureLabel,
    Spectrum,
    WavenumberGrid,
    format_spectrum_csv,
    grid_point,
    linear_combine,
    normalize_minmax,
    parse_spectrum_csv,
    read_spectrum_csv,
    resample,
    write_spectrum_csv,
)


def test_canonical_grid_points():
    assert CANONICAL_GRID.n_points == 2201
    assert grid_point(CANONICAL_GRID, 0) == 300.0
    assert grid_point(CANONICAL_GRID, 2200) == 2500.0
    assert grid_point(CANONICAL_GRID, 700) == pytest.approx(1000.0, abs=1e-12)
    x = CANONICAL_GRID.points()
    assert x[0] == 300.0 and x[-1] == 2500.0
    assert np.allclose(np.diff(x), 1.0)


@pytest.mark.parametrize("i", [-1, 2201])
def test_grid_point_out_of_range(i):
    with pytest.raises(IndexError):
        grid_point(CANONICAL_GRID, i)


@pytest.mark.parametrize("args", [(500.0, 300.0, 10), (300.0, 300.0, 10), (300.0, 2500.0, 1), (np.nan, 1.0, 3)])
def test_bad_grids(args):
    with pytest.raises(GridError):
        WavenumberGrid(*args)


def test_spectrum_is_read_only_and_finite():
    s = Spectrum(CANONICAL_GRID, np.zeros(2201))
    with pytest.raises(ValueError):
        s.intensities[0] = 1.0
    with pytest.raises(ValueError):
        Spectrum(CANONICAL_GRID, np.full(2201, np.nan))
    with pytest.raises(ValueError):
        Spectrum(CANONICAL_GRID, np.zeros(10))


def test_resample_identity_and_linear():
    x = CANONICAL_GRID.points()
    s = Spectrum(CANONICAL_GRID, 0.5 * x + 3.0)
    assert resample(s, CANONICAL_GRID) is s
    coarse = WavenumberGrid(400.0, 2000.0, 17)
    r = resample(s, coarse)
    assert np.allclose(r.intensities, 0.5 * coarse.points() + 3.0, atol=1e-12)


def test_resample_rejects_uncovered_range():
    src = Spectrum(WavenumberGrid(500.0, 2000.0, 151), np.ones(151))
    with pytest.raises(GridError):
        resample(src, CANONICAL_GRID)


def test_normalize_minmax():
    s = Spectrum(CANONICAL_GRID, np.linspace(-2.0, 6.0, 2201))
    n = normalize_minmax(s)
    assert n.intensities.min() == 0.0 and n.intensities.max() == 1.0
    with pytest.raises(DegenerateSpectrumError):
        normalize_minmax(Spectrum(CANONICAL_GRID, np.full(2201, 3.0)))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 100.0), st.floats(-50.0, 50.0))
def test_minmax_absorbs_positive_affine_maps(a, b):
    base = np.sin(np.linspace(0, 7, 2201)) + 0.1 * np.linspace(0, 1, 2201)
    s1 = normalize_minmax(Spectrum(CANONICAL_GRID, base))
    s2 = normalize_minmax(Spectrum(CANONICAL_GRID, a * base + b))
    assert np.max(np.abs(s1.intensities - s2.intensities)) < 1e-9


def test_linear_combine(library):
    mix = linear_combine(library.pure_spectra, [0.5, 0.0, 1.0, 0.25])
    expected = 0.5 * library.pure_spectra[0].intensities + library.pure_spectra[2].intensities
    expected = expected + 0.25 * library.pure_spectra[3].intensities
    assert np.allclose(mix.intensities, expected, atol=1e-15)
    with pytest.raises(ValueError):
        linear_combine(library.pure_spectra, [1.0, -0.1, 0.0, 0.0])
    with pytest.raises(ValueError):
        linear_combine(library.pure_spectra, [1.0, 0.0])


def test_mixture_label_invariants():
    lab = MixtureLabel.from_ratios([0.0, 0.5, 1.0, 0.0])
    assert lab.presence.tolist() == [0, 1, 1, 0]
    assert MixtureLabel.from_vector(lab.to_vector()) == lab
    with pytest.raises(LabelError):
        MixtureLabel([1, 0], [0.0, 0.0])
    with pytest.raises(LabelError):
        MixtureLabel([0, 1], [0.0, 1.5])
    with pytest.raises(LabelError):
        MixtureLabel.from_vector([1.0, 0.0, 1.0])


def test_csv_round_trip_exact(tmp_path, library):
    s = library.pure_spectra[1]
    path = tmp_path / "s.csv"
    write_spectrum_csv(s, path)
    back = read_spectrum_csv(path)
    assert np.array_equal(back.intensities, s.intensities)
    assert format_spectrum_csv(back) == path.read_text()


def test_csv_resamples_foreign_grid():
    grid = WavenumberGrid(200.0, 2600.0, 1201)
    x = grid.points()
    text = "wavenumber_cm1,intensity\n" + "".join(f"{a:.6f},{2 * a}\n" for a in x)
    s = parse_spectrum_csv(text)
    assert s.grid == CANONICAL_GRID
    assert np.allclose(s.intensities, 2 * CANONICAL_GRID.points())


@pytest.mark.parametrize(
    "text, line",
    [
        ("x,y\n300,1\n", 1),
        ("wavenumber_cm1,intensity\n300,1\n301,abc\n", 3),
        ("wavenumber_cm1,intensity\n300,1\n299,1\n", 3),
        ("wavenumber_cm1,intensity\n300,1\n301,1,5\n", 3),
        ("wavenumber_cm1,intensity\n300,1\n301,nan\n", 3),
    ],
)
def test_csv_errors_name_the_line(text, line):
    with pytest.raises(SpectrumFormatError) as exc:
        parse_spectrum_csv(text, path="in.csv", grid=None)
    assert exc.value.line == line
    assert f"in.csv:{line}:" in str(exc.value)
