"""Momentum-space analysis: Bloch matrices, dispersions and invariants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from spinfloq.couplings import (
    DEFAULT_ORDERS,
    DriveConfig,
    GeometryConfig,
    HoppingTable,
    build_hopping_table,
)
from spinfloq.errors import DomainError, IllDefinedInvariantError

GAP_FLOOR = 1e-10


def bz_grid(M: int) -> np.ndarray:
    """Uniform Brillouin-zone grid -pi + 2 pi i / M, endpoint excluded."""
    if M < 1:
        raise DomainError("grid size must be positive")
    return -np.pi + 2 * np.pi * np.arange(M) / M


def closed_grid(M: int) -> np.ndarray:
    return np.linspace(-np.pi, np.pi, M + 1)


class BlochMap1D:
    """Off-diagonal Bloch element f(k) of the two-band chain.

    f(k) = sum_r forward[2r+1] e^{ikr} + sum_r' backward[2r'-1] e^{-ikr'}.
    """

    def __init__(self, table: HoppingTable):
        self.table = table
        shifts, amps = [], []
        for s in table.neighbor_orders:
            shifts.append((s - 1) // 2)
            amps.append(table.forward[s])
            shifts.append(-((s + 1) // 2))
            amps.append(table.backward[s])
        self._shifts = np.array(shifts, dtype=float)
        self._amps = np.array(amps, dtype=complex)

    def f(self, k):
        k = np.asarray(k, dtype=float)
        out = np.exp(1j * np.multiply.outer(k, self._shifts)) @ self._amps
        return out if out.ndim else complex(out)

    def theta(self, k):
        return np.angle(self.f(k))

    def matrix(self, k: float) -> np.ndarray:
        fk = self.f(k)
        return np.array([[0, fk], [np.conj(fk), 0]], dtype=complex)

    def d_vector(self, k):
        """Planar d-vector (d_x, d_y) = (Re f, -Im f); d_z vanishes."""
        fk = self.f(k)
        return np.real(fk), -np.imag(fk)


def bloch_1d(table: HoppingTable, k: float) -> np.ndarray:
    return BlochMap1D(table).matrix(k)


@dataclass
class Dispersion1D:
    k: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @property
    def gap(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def gap_minimum(self) -> float:
        return float(self.gap.min())


def dispersion_1d(bmap: BlochMap1D, k_points: int = 256) -> Dispersion1D:
    if k_points < 16:
        raise DomainError("dispersion needs at least 16 k points")
    k = closed_grid(k_points)
    e = np.abs(bmap.f(k))
    return Dispersion1D(k=k, lower=-e, upper=e)


@dataclass
class DPath:
    k_grid: np.ndarray
    dx: np.ndarray
    dy: np.ndarray

    @property
    def dz(self) -> np.ndarray:
        return np.zeros_like(self.dx)

    def closure_error(self) -> float:
        return float(math.hypot(self.dx[0] - self.dx[-1], self.dy[0] - self.dy[-1]))


def d_path(bmap: BlochMap1D, k_points: int = 1024) -> DPath:
    k = closed_grid(k_points)
    dx, dy = bmap.d_vector(k)
    return DPath(k_grid=k, dx=np.asarray(dx), dy=np.asarray(dy))


def _check_gapped(path: DPath):
    mag = np.hypot(path.dx, path.dy)
    bad = np.flatnonzero(mag < GAP_FLOOR)
    if bad.size:
        k = float(path.k_grid[bad[0]])
        raise IllDefinedInvariantError(
            f"gap closes on the grid at k={k:.6g} (|d|={mag[bad[0]]:.3g}); invariant ill-defined",
            k=k)


def winding_number(path: DPath) -> int:
    """Counterclockwise turns of (d_x, d_y) around the origin."""
    if path.k_grid.size < 256:
        raise DomainError("winding number needs a grid of at least 256 points")
    _check_gapped(path)
    angle = np.arctan2(path.dy, path.dx)
    steps = np.diff(np.append(angle, angle[0]))
    # wrap increments into (-pi, pi]
    steps = -((-steps + np.pi) % (2 * np.pi) - np.pi)
    return int(round(steps.sum() / (2 * np.pi)))


def winding_integral(path: DPath) -> float:
    """(1/2pi) \\int n x dn/dk dk by central differences and the trapezoid rule.

    Only accurate on fine grids; serves as a cross-check of the exact
    angle-accumulation count.
    """
    _check_gapped(path)
    mag = np.hypot(path.dx, path.dy)
    nx, ny = path.dx / mag, path.dy / mag
    k = path.k_grid
    dnx = np.gradient(nx, k)
    dny = np.gradient(ny, k)
    integrand = nx * dny - ny * dnx
    return float(np.trapezoid(integrand, k) / (2 * np.pi))


def winding_for(a0: float, omega: float = 10.0, q: int = 1, orders=DEFAULT_ORDERS,
                k_points: int = 1024, geometry: GeometryConfig | None = None) -> int:
    table = build_hopping_table(geometry or GeometryConfig(), DriveConfig(a0, omega, q), orders)
    return winding_number(d_path(BlochMap1D(table), k_points))


def find_gap_closing(geometry: GeometryConfig, drive: DriveConfig, lo: float, hi: float,
                     orders=DEFAULT_ORDERS, k_points: int = 1024, xtol: float = 1e-10) -> float:
    """Bisect in a0 for the transition between two winding values."""

    def w(a0):
        table = build_hopping_table(geometry, drive.with_a0(a0), orders)
        return winding_number(d_path(BlochMap1D(table), k_points))

    w_lo, w_hi = w(lo), w(hi)
    if w_lo == w_hi:
        raise DomainError(f"winding is {w_lo} at both ends of [{lo}, {hi}]")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        try:
            w_mid = w(mid)
        except IllDefinedInvariantError:
            return mid
        if w_mid == w_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class ZakResult:
    phase: float
    winding: int
    k_points: int

    @property
    def resolved(self) -> float:
        """Winding-resolved Zak phase W * pi (e.g. 2 pi for W = 2)."""
        return self.winding * np.pi


def lower_band_states(bmap: BlochMap1D, k) -> np.ndarray:
    fk = bmap.f(k)
    theta = np.angle(fk)
    return np.stack([np.ones_like(theta), -np.exp(-1j * theta)], axis=-1) / np.sqrt(2)


def zak_phase(bmap: BlochMap1D, k_points: int = 1024, check: bool = True) -> ZakResult:
    """Berry phase of the lower band from the discrete Wilson loop.

    The numerical eigenvectors of each 2x2 Bloch matrix carry arbitrary
    phases; the closed loop product makes the result gauge free.
    """
    k = bz_grid(k_points)
    path = d_path(bmap, max(k_points, 256))
    _check_gapped(path)
    mats = np.array([bmap.matrix(x) for x in k])
    _, vecs = np.linalg.eigh(mats)
    lower = vecs[:, :, 0]
    overlaps = np.einsum("ij,ij->i", lower.conj(), np.roll(lower, -1, axis=0))
    total = np.prod(overlaps / np.abs(overlaps))
    phase = float(-np.angle(total))
    if phase <= -np.pi + 1e-9:
        phase += 2 * np.pi
    result = ZakResult(phase=phase, winding=winding_number(path), k_points=k_points)
    if check:
        diff = (phase - result.resolved + np.pi) % (2 * np.pi) - np.pi
        if abs(diff) > 1e-6:
            raise ArithmeticError(
                f"Zak phase {phase} disagrees with winding {result.winding} * pi")
    return result


def bloch_2d(table: HoppingTable, kx: float, ky: float, bmap: BlochMap1D | None = None) -> np.ndarray:
    """4x4 Bloch matrix in the (A, B, C, D) basis."""
    bmap = bmap or BlochMap1D(table)
    fx, fy = bmap.f(kx), bmap.f(ky)
    cx, cy = np.conj(fx), np.conj(fy)
    return np.array([
        [0, fx, fy, 0],
        [cx, 0, 0, fy],
        [cy, 0, 0, fx],
        [0, cy, cx, 0],
    ], dtype=complex)


def _bloch_2d_grid(bmap: BlochMap1D, kx: np.ndarray, ky: np.ndarray) -> np.ndarray:
    fx = bmap.f(kx)[:, None] * np.ones(len(ky))[None, :]
    fy = np.ones(len(kx))[:, None] * bmap.f(ky)[None, :]
    h = np.zeros(fx.shape + (4, 4), dtype=complex)
    h[..., 0, 1] = fx
    h[..., 2, 3] = fx
    h[..., 0, 2] = fy
    h[..., 1, 3] = fy
    return h + np.conj(np.swapaxes(h, -1, -2))


BRANCHES = ((-1, -1), (-1, 1), (1, -1), (1, 1))


@dataclass
class Bands2D:
    """Four energy sheets on a (kx, ky) grid keyed by branch signs."""

    kx: np.ndarray
    ky: np.ndarray
    sheets: dict
    numeric: np.ndarray
    bmap: BlochMap1D

    def sorted_sheets(self) -> np.ndarray:
        return np.sort(np.stack([self.sheets[b] for b in BRANCHES], axis=-1), axis=-1)

    def formula_error(self) -> float:
        return float(np.max(np.abs(self.sorted_sheets() - self.numeric)))

    def middle_gap(self) -> np.ndarray:
        return self.numeric[..., 2] - self.numeric[..., 1]

    def eigenvector(self, ex: int, ey: int, kx: float, ky: float) -> np.ndarray:
        tx, ty = self.bmap.theta(kx), self.bmap.theta(ky)
        return 0.5 * np.array([1, ex * np.exp(-1j * tx), ey * np.exp(-1j * ty),
                               ex * ey * np.exp(-1j * (tx + ty))])


def bands_2d(table: HoppingTable, kx=None, ky=None, grid: int = 128) -> Bands2D:
    bmap = BlochMap1D(table)
    kx = bz_grid(grid) if kx is None else np.asarray(kx, dtype=float)
    ky = bz_grid(grid) if ky is None else np.asarray(ky, dtype=float)
    ax = np.abs(bmap.f(kx))[:, None]
    ay = np.abs(bmap.f(ky))[None, :]
    sheets = {(ex, ey): ex * ax + ey * ay for ex, ey in BRANCHES}
    numeric = np.linalg.eigvalsh(_bloch_2d_grid(bmap, kx, ky))
    return Bands2D(kx=kx, ky=ky, sheets=sheets, numeric=numeric, bmap=bmap)


def _as_band_tuple(band_selector) -> tuple[int, ...]:
    if isinstance(band_selector, (int, np.integer)):
        bands = (int(band_selector),)
    else:
        bands = tuple(sorted(int(b) for b in band_selector))
    if not bands or any(b < 0 or b > 3 for b in bands):
        raise DomainError(f"band selector must pick bands among 0..3, got {band_selector!r}")
    return bands


def lattice_field_strength(states: np.ndarray) -> float:
    """Sum of plaquette field strengths for a grid of occupied frames.

    ``states`` has shape (Mx, My, dim, n_occ); links are determinants of the
    overlap matrices so degenerate multiplets are handled as one.
    """

    def link(a, b):
        d = np.linalg.det(np.einsum("xyin,xyim->xynm", a.conj(), b))
        return d / np.abs(d)

    sx = np.roll(states, -1, axis=0)
    sy = np.roll(states, -1, axis=1)
    ux = link(states, sx)
    uy = link(states, sy)
    flux = ux * np.roll(uy, -1, axis=0) * np.conj(np.roll(ux, -1, axis=1)) * np.conj(uy)
    return float(np.angle(flux).sum() / (2 * np.pi))


class NotIsolatedError(IllDefinedInvariantError):
    pass


def band_frames(table: HoppingTable, band_selector, grid: int = 64, isolation: float = 1e-8):
    bands = _as_band_tuple(band_selector)
    bmap = BlochMap1D(table)
    k = bz_grid(grid)
    w, v = np.linalg.eigh(_bloch_2d_grid(bmap, k, k))
    others = [b for b in range(4) if b not in bands]
    if others:
        sel = w[..., list(bands)]
        rest = w[..., others]
        sep = np.min(np.abs(sel[..., :, None] - rest[..., None, :]), axis=(-1, -2))
        if sep.min() <= isolation:
            i, j = np.unravel_index(np.argmin(sep), sep.shape)
            raise NotIsolatedError(
                f"bands {bands} not isolated: separation {sep.min():.3g} at "
                f"k=({k[i]:.4g}, {k[j]:.4g})", k=float(k[i]))
    return v[..., list(bands)]


def chern_fhs(table: HoppingTable, band_selector, grid: int = 64) -> int:
    """Lattice-gauge Chern number of one band or of a band multiplet."""
    return int(round(lattice_field_strength(band_frames(table, band_selector, grid))))


def skyrmion_chern(dvec_x, dvec_y, dvec_z, kx: np.ndarray, ky: np.ndarray) -> float:
    """(1/4pi) \\int (dn/dkx x dn/dky) . n for a sampled d-vector field.

    Any planar field (d_z = 0) gives zero identically, which is the case for
    this model.
    """
    d = np.stack([dvec_x, dvec_y, dvec_z], axis=-1).astype(float)
    n = d / np.linalg.norm(d, axis=-1, keepdims=True)
    dnx = np.gradient(n, kx, axis=0)
    dny = np.gradient(n, ky, axis=1)
    density = np.einsum("xyi,xyi->xy", np.cross(dnx, dny), n)
    return float(np.trapezoid(np.trapezoid(density, ky, axis=1), kx) / (4 * np.pi))


def planar_d_field(table: HoppingTable, grid: int = 64):
    """d-vector of the 2D model built from the x and y chain d-vectors."""
    bmap = BlochMap1D(table)
    k = closed_grid(grid)
    dxx, dyx = bmap.d_vector(k)
    dxy, dyy = bmap.d_vector(k)
    dx = dxx[:, None] + dxy[None, :]
    dy = dyx[:, None] + dyy[None, :]
    return dx, dy, np.zeros_like(dx), k, k


@dataclass
class ChernReport:
    chern: Fraction
    zak_vector: tuple[float, float]
    winding: int
    convention: str = "half winding W/2 of the chain, not the lattice-gauge integer"


def paper_chern_report(a0: float, drive: DriveConfig | None = None,
                       geometry: GeometryConfig | None = None, orders=DEFAULT_ORDERS,
                       k_points: int = 1024) -> ChernReport:
    drive = (drive or DriveConfig(a0)).with_a0(a0)
    table = build_hopping_table(geometry or GeometryConfig(), drive, orders)
    w = winding_number(d_path(BlochMap1D(table), k_points))
    return ChernReport(chern=Fraction(w, 2), zak_vector=(w * np.pi, w * np.pi), winding=w)
