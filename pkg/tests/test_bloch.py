from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinfloq.bloch import (
    BlochMap1D,
    NotIsolatedError,
    bands_2d,
    bloch_2d,
    bz_grid,
    chern_fhs,
    closed_grid,
    d_path,
    dispersion_1d,
    find_gap_closing,
    lattice_field_strength,
    lower_band_states,
    paper_chern_report,
    planar_d_field,
    skyrmion_chern,
    winding_for,
    winding_integral,
    winding_number,
    zak_phase,
)
from spinfloq.couplings import DriveConfig, GeometryConfig, table_for
from spinfloq.errors import DomainError, IllDefinedInvariantError

REFERENCE = {-16.0: 0, -11.0: -1, 4.0: 0, 19.0: 1, 21.0: 2, 26.0: 1}


def test_grids():
    g = bz_grid(8)
    assert g[0] == -np.pi and g[-1] < np.pi and len(g) == 8
    c = closed_grid(8)
    assert c[0] == -np.pi and c[-1] == np.pi
    with pytest.raises(DomainError):
        bz_grid(0)


def test_bloch_matrix_hermitian_and_chiral():
    bmap = BlochMap1D(table_for(21.0))
    for k in np.linspace(-np.pi, np.pi, 7):
        h = bmap.matrix(k)
        assert np.allclose(h, h.conj().T)
        assert h[0, 0] == 0 and h[1, 1] == 0


def test_bloch_function_definition():
    t = table_for(19.0)
    k = 0.37
    expected = (t.forward[1] + t.forward[3] * np.exp(1j * k)
                + t.backward[1] * np.exp(-1j * k) + t.backward[3] * np.exp(-2j * k))
    assert BlochMap1D(t).f(k) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("a0,w", sorted(REFERENCE.items()))
def test_reference_windings(a0, w):
    assert winding_for(a0) == w
    path = d_path(BlochMap1D(table_for(a0)), 4096)
    assert abs(winding_integral(path) - w) < 1e-3
    assert path.closure_error() < 1e-12
    assert np.all(path.dz == 0)


@settings(max_examples=60, deadline=None)
@given(a0=st.floats(-30, 30))
def test_single_order_winding_is_ssh(a0):
    # f = v + w e^{-ik}: winds once exactly when |w| > |v|
    t = table_for(a0, orders=(1,))
    v, w = abs(t.forward[1]), abs(t.backward[1])
    if abs(v - w) < 1e-6:
        return
    assert winding_for(a0, orders=(1,)) == (1 if w > v else 0)


def test_gapless_point_raises_with_momentum():
    with pytest.raises(IllDefinedInvariantError) as info:
        winding_for(5.0)
    assert info.value.k is not None


def test_winding_needs_fine_grid():
    with pytest.raises(DomainError):
        winding_number(d_path(BlochMap1D(table_for(4.0)), 100))


def test_find_gap_closing():
    a0c = find_gap_closing(GeometryConfig(), DriveConfig(a0=0.0), 19.0, 21.0)
    gap = np.abs(BlochMap1D(table_for(a0c)).f(closed_grid(20000))).min()
    assert gap < 1e-3
    assert winding_for(a0c - 1e-3) != winding_for(a0c + 1e-3)
    with pytest.raises(DomainError):
        find_gap_closing(GeometryConfig(), DriveConfig(a0=0.0), 12.0, 13.0)


def test_dispersion():
    d = dispersion_1d(BlochMap1D(table_for(21.0)), 64)
    assert np.allclose(d.lower, -d.upper)
    assert d.gap_minimum > 0
    with pytest.raises(DomainError):
        dispersion_1d(BlochMap1D(table_for(21.0)), 8)


@pytest.mark.parametrize("a0,w", sorted(REFERENCE.items()))
def test_zak_equals_winding_pi(a0, w):
    z = zak_phase(BlochMap1D(table_for(a0)))
    assert z.winding == w
    assert z.resolved == pytest.approx(w * np.pi)
    diff = (z.phase - w * np.pi + np.pi) % (2 * np.pi) - np.pi
    assert abs(diff) < 1e-6


def test_zak_random_gapped(rng):
    checked = 0
    while checked < 100:
        a0 = rng.uniform(-30, 30)
        bmap = BlochMap1D(table_for(a0))
        if np.abs(bmap.f(closed_grid(4096))).min() < 1e-3:
            continue
        z = zak_phase(bmap, check=False)
        diff = (z.phase - z.winding * np.pi + np.pi) % (2 * np.pi) - np.pi
        assert abs(diff) < 1e-6
        checked += 1


def test_lower_band_states_are_eigenvectors():
    bmap = BlochMap1D(table_for(19.0))
    for k in (-2.0, 0.1, 1.3):
        v = lower_band_states(bmap, k)
        h = bmap.matrix(k)
        assert np.allclose(h @ v, -abs(bmap.f(k)) * v)


def test_bloch_2d_structure():
    t = table_for(4.0)
    h = bloch_2d(t, 0.3, -1.1)
    assert np.allclose(h, h.conj().T)
    gamma = np.diag([1, -1, -1, 1])
    assert np.allclose(gamma @ h @ gamma, -h)


def test_bands_2d_formula_and_touching():
    b = bands_2d(table_for(4.0), grid=64)
    assert b.formula_error() < 1e-10
    gap = b.middle_gap()
    i0 = np.argmin(np.abs(b.kx))
    assert gap[i0, i0] < 1e-8
    assert gap[0, 0] < 1e-8
    # the two middle sheets are +-(|fx| - |fy|); they meet wherever |fx| = |fy|
    diag = np.diag(gap)
    assert np.max(diag) < 1e-8
    ex, ey = 1, -1
    v = b.eigenvector(ex, ey, 0.4, 1.2)
    h = bloch_2d(table_for(4.0), 0.4, 1.2)
    e = ex * abs(b.bmap.f(0.4)) + ey * abs(b.bmap.f(1.2))
    assert np.allclose(h @ v, e * v)


def _qwz_lower_states(m, grid):
    k = bz_grid(grid)
    kx, ky = np.meshgrid(k, k, indexing="ij")
    dx, dy, dz = np.sin(kx), np.sin(ky), m + np.cos(kx) + np.cos(ky)
    h = np.zeros(kx.shape + (2, 2), dtype=complex)
    h[..., 0, 0] = dz
    h[..., 1, 1] = -dz
    h[..., 0, 1] = dx - 1j * dy
    h[..., 1, 0] = dx + 1j * dy
    _, v = np.linalg.eigh(h)
    return v[..., :1], (dx, dy, dz)


@pytest.mark.parametrize("m,expected", [(1.0, 1), (-1.0, -1), (3.0, 0)])
def test_field_strength_on_reference_model(m, expected):
    states, _ = _qwz_lower_states(m, 48)
    assert abs(abs(lattice_field_strength(states)) - abs(expected)) < 1e-9
    # independent continuum skyrmion count of the same d-vector
    k = closed_grid(200)
    kx, ky = np.meshgrid(k, k, indexing="ij")
    sk = skyrmion_chern(np.sin(kx), np.sin(ky), m + np.cos(kx) + np.cos(ky), k, k)
    assert abs(abs(sk) - abs(expected)) < 1e-2


def test_chern_grid_refinement_and_sum():
    t = table_for(4.0)
    c0 = chern_fhs(t, 0, 64)
    assert c0 == chern_fhs(t, 0, 128)
    mid = chern_fhs(t, (1, 2), 64)
    assert mid == chern_fhs(t, (1, 2), 128)
    total = c0 + mid + chern_fhs(t, 3, 64)
    assert total == 0
    assert chern_fhs(t, (0, 1, 2, 3), 32) == 0


def test_chern_refuses_touching_band():
    with pytest.raises(NotIsolatedError):
        chern_fhs(table_for(4.0), 1, 64)
    with pytest.raises(DomainError):
        chern_fhs(table_for(4.0), 5, 16)


def test_planar_field_has_no_skyrmion():
    assert skyrmion_chern(*planar_d_field(table_for(21.0), 64)) == 0.0


@pytest.mark.parametrize("a0,w", sorted(REFERENCE.items()))
def test_half_winding_report(a0, w):
    rep = paper_chern_report(a0)
    assert rep.chern == Fraction(w, 2)
    assert rep.zak_vector == pytest.approx((w * np.pi, w * np.pi))
    assert "W/2" in rep.convention
