import math

import mpmath
import numpy as np
import pytest

from axicav.analytic import (
    AnalyticMode,
    bessel_j,
    bessel_prime_zero,
    bessel_zero,
    estimate_match_tol,
    export_modes_csv,
    match_spectra,
    pillbox_spectrum,
)


def test_j0_at_origin():
    assert bessel_j(0, 0.0) == 1.0


def test_j1_at_origin():
    assert bessel_j(1, 0.0) == 0.0


def test_j0_first_zero_value():
    assert abs(bessel_j(0, bessel_zero(0, 1))) < 1e-12


@pytest.mark.parametrize("m", range(0, 11))
def test_bessel_values_against_mpmath(m):
    for x in np.linspace(0.05, 50.0, 61):
        assert bessel_j(m, float(x)) == pytest.approx(
            float(mpmath.besselj(m, float(x))), abs=1e-13
        )


def test_bessel_out_of_range():
    with pytest.raises(ValueError):
        bessel_j(11, 1.0)
    with pytest.raises(ValueError):
        bessel_j(1, -0.5)
    with pytest.raises(ValueError):
        bessel_zero(6, 1)
    with pytest.raises(ValueError):
        bessel_prime_zero(1, 6)


@pytest.mark.parametrize("m", range(0, 6))
@pytest.mark.parametrize("nu", range(1, 6))
def test_zeros_against_mpmath(m, nu):
    assert bessel_zero(m, nu) == pytest.approx(
        float(mpmath.besseljzero(m, nu)), abs=1e-12
    )
    # mpmath counts the derivative zero at x = 0 for m = 0; this table does not
    shift = 1 if m == 0 else 0
    assert bessel_prime_zero(m, nu) == pytest.approx(
        float(mpmath.besseljzero(m, nu + shift, derivative=1)), abs=1e-12
    )


def test_zero_interlacing():
    for m in range(0, 5):
        for nu in range(1, 5):
            assert bessel_zero(m, nu) < bessel_zero(m + 1, nu)
            assert bessel_zero(m, nu) < bessel_zero(m, nu + 1)


def test_pillbox_lowest_tm010():
    modes = pillbox_spectrum(1.0, 1.0, 0, 30.0)
    assert modes[0].family == "TM"
    assert (modes[0].m, modes[0].nu, modes[0].pi_idx) == (0, 1, 0)
    assert modes[0].omega == pytest.approx(bessel_zero(0, 1), rel=1e-14)


def test_pillbox_te111_tm111():
    modes = {md.mode_id: md for md in pillbox_spectrum(1.0, 1.0, 1, 40.0)}
    te111 = math.sqrt(bessel_prime_zero(1, 1) ** 2 + math.pi**2)
    tm111 = math.sqrt(bessel_zero(1, 1) ** 2 + math.pi**2)
    assert modes["TE111"].omega == pytest.approx(te111, rel=1e-14)
    assert modes["TM111"].omega == pytest.approx(tm111, rel=1e-14)
    assert te111 == pytest.approx(3.641368, abs=1e-6)
    assert tm111 == pytest.approx(4.954967, abs=3e-5)


def test_pillbox_prefix_property():
    small = pillbox_spectrum(1.0, 1.0, 1, 30.0)
    large = pillbox_spectrum(1.0, 1.0, 1, 60.0)
    assert [m.mode_id for m in small] == [m.mode_id for m in large[: len(small)]]


def test_te_requires_axial_index():
    modes = pillbox_spectrum(1.0, 1.0, 0, 60.0)
    assert all(md.pi_idx >= 1 for md in modes if md.family == "TE")


def test_match_exact():
    analytic = [AnalyticMode("TM", 0, 1, 0, 1.0), AnalyticMode("TM", 0, 1, 1, math.sqrt(2.0))]
    rep = match_spectra([1.0, 2.0], analytic, 1e-3)
    assert rep.spurious_count == 0
    assert not rep.missed


def test_match_flags_interloper():
    analytic = [AnalyticMode("TM", 0, 1, 0, 1.0), AnalyticMode("TM", 0, 1, 1, math.sqrt(2.0))]
    rep = match_spectra([1.0, 1.7**0.5 * 1.7**0.5, 2.0], analytic, 0.05)
    # computed {1.0, 1.7, 2.0} against {1.0, 2.0}
    rep = match_spectra([1.0, 1.7, 2.0], analytic, 0.05)
    assert rep.spurious_count == 1
    assert rep.spurious[0] == pytest.approx(math.sqrt(1.7))


def test_match_degenerate_pair():
    analytic = [AnalyticMode("TM", 1, 1, 0, 2.0), AnalyticMode("TE", 1, 1, 1, 2.0)]
    rep = match_spectra([4.0 * 0.999, 4.0 * 1.001], analytic, 0.01)
    assert rep.spurious_count == 0
    assert not rep.missed


def test_match_scale_invariance():
    analytic = [AnalyticMode("TM", 0, 1, 0, 1.0), AnalyticMode("TM", 0, 2, 0, 3.0)]
    rep1 = match_spectra([1.0, 9.1], analytic, 0.01)
    scaled = [AnalyticMode("TM", 0, 1, 0, 10.0), AnalyticMode("TM", 0, 2, 0, 30.0)]
    rep2 = match_spectra([100.0, 910.0], scaled, 0.01)
    assert rep1.spurious_count == rep2.spurious_count
    assert len(rep1.missed) == len(rep2.missed)


def test_estimate_match_tol_floor_and_cap():
    analytic = [AnalyticMode("TM", 0, 1, 0, 1.0)]
    assert estimate_match_tol([1.0], analytic) == pytest.approx(1e-6)
    assert estimate_match_tol([25.0], analytic) == pytest.approx(0.05)


def test_export_csv(tmp_path):
    modes = pillbox_spectrum(1.0, 1.0, 1, 40.0)
    path = tmp_path / "modes.csv"
    export_modes_csv(modes, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "family,m,nu,pi_idx,omega_over_c0,multiplicity"
    assert len(lines) == len(modes) + 1
    family, m, nu, pi_idx, omega, mult = lines[1].split(",")
    assert float(omega) == pytest.approx(modes[0].omega, rel=1e-16)
