"""Real-space single-excitation Hamiltonians: chain, 2D network and strip.

All operators live on the one-excitation subspace, so a chain of ``N`` cells
has dimension ``2N``, an ``N x N`` network ``(2N)**2`` and a strip ``4 Nx``.
Site ``i`` (0-based) along a chain belongs to sublattice A for even ``i`` and
B for odd ``i``.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from spinfloq.bloch import BlochMap1D, bloch_1d
from spinfloq.couplings import (
    DEFAULT_ORDERS,
    DriveConfig,
    GeometryConfig,
    HoppingTable,
    build_hopping_table,
)
from spinfloq.errors import DomainError, PreconditionError

OPEN = "open"
PERIODIC = "periodic"

MAX_NETWORK_CELLS = 12
EDGE_FRACTION = 0.1
EDGE_THRESHOLD = 0.5


@dataclass
class LatticeOperator:
    """Dense Hermitian single-excitation Hamiltonian with a labeled basis.

    ``chirality`` holds the diagonal of the sublattice operator Gamma and
    ``position`` the coordinate along x (in sites) used for edge weights.
    """

    kind: str
    matrix: np.ndarray
    basis_labels: list
    boundary: tuple[str, ...]
    chirality: np.ndarray
    position: np.ndarray
    shape: tuple[int, ...] = ()
    meta: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def chiral_error(self) -> float:
        g = self.chirality
        return float(np.max(np.abs(g[:, None] * self.matrix * g[None, :] + self.matrix),
                            initial=0.0))


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual: float
    operator: LatticeOperator | None = None

    def gram_error(self) -> float:
        v = self.eigenvectors
        return float(np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1])), initial=0.0))


@dataclass
class EdgeReport:
    """Zero modes of an operator with their localization diagnostics.

    ``modes`` holds one column per zero mode, rotated inside the zero-energy
    subspace so that each is an eigenvector of the chiral operator.
    ``left_weight``/``right_weight`` are the probabilities in the outermost
    10% of sites at each end; ``edge_weight`` is the larger of the two.
    """

    energies: np.ndarray
    indices: np.ndarray | None
    modes: np.ndarray
    left_weight: np.ndarray
    right_weight: np.ndarray
    sublattice_polarization: np.ndarray
    corner_weight: np.ndarray | None = None

    @property
    def count(self) -> int:
        return self.modes.shape[1]

    @property
    def edge_weight(self) -> np.ndarray:
        return np.maximum(self.left_weight, self.right_weight)


def diagonalize(op: LatticeOperator) -> SpectrumResult:
    w, v = np.linalg.eigh(op.matrix)
    residual = float(np.max(np.abs(op.matrix @ v - v * w), initial=0.0))
    return SpectrumResult(eigenvalues=w, eigenvectors=v, residual=residual, operator=op)


def _chain_matrix(n_sites: int, table: HoppingTable, periodic: bool) -> np.ndarray:
    h = np.zeros((n_sites, n_sites), dtype=complex)
    for s in table.neighbor_orders:
        if not periodic and s >= n_sites:
            continue
        for i in range(n_sites):
            j = i + s
            if j >= n_sites:
                if not periodic:
                    break
                j %= n_sites
            # even i: A on the left, B to the right
            amp = table.forward[s] if i % 2 == 0 else table.backward[s].conjugate()
            h[j, i] += amp
            h[i, j] += np.conj(amp)
    return h


def _check_boundary(boundary: str) -> str:
    if boundary not in (OPEN, PERIODIC):
        raise DomainError(f"boundary must be 'open' or 'periodic', got {boundary!r}")
    return boundary


def build_chain(N: int, table: HoppingTable, boundary: str = OPEN) -> LatticeOperator:
    """Chain of ``N`` A-B cells with the odd-neighbor hoppings of ``table``."""
    if int(N) != N or N < 2:
        raise DomainError(f"chain needs N >= 2 cells, got {N!r}")
    N = int(N)
    boundary = _check_boundary(boundary)
    n_sites = 2 * N
    h = _chain_matrix(n_sites, table, boundary == PERIODIC)
    labels = [(i + 1, "AB"[i % 2]) for i in range(n_sites)]
    chir = np.where(np.arange(n_sites) % 2 == 0, 1.0, -1.0)
    return LatticeOperator(kind="chain", matrix=h, basis_labels=labels, boundary=(boundary,),
                           chirality=chir, position=np.arange(n_sites, dtype=float),
                           shape=(n_sites,), meta={"N": N})


def chain_for(N: int, a0: float, omega: float = 10.0, q: int = 1, orders=DEFAULT_ORDERS,
              boundary: str = OPEN, geometry: GeometryConfig | None = None) -> LatticeOperator:
    table = build_hopping_table(geometry or GeometryConfig(), DriveConfig(a0, omega, q), orders)
    return build_chain(N, table, boundary)


def sweep_spectrum(N: int, geometry: GeometryConfig, drive_template: DriveConfig, a0_grid,
                   orders=DEFAULT_ORDERS, boundary: str = OPEN, jobs: int = 1):
    """Chain eigenvalues for each a0 of the grid, rows sorted by a0."""
    grid = sorted(float(a) for a in a0_grid)
    if not grid:
        raise DomainError("a0 grid is empty")

    def one(a0):
        table = build_hopping_table(geometry, drive_template.with_a0(a0), orders)
        return a0, np.linalg.eigvalsh(build_chain(N, table, boundary).matrix)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(one, grid))
        else:
            rows = [one(a0) for a0 in grid]
    return rows


def _edge_masks(op: LatticeOperator, fraction: float = EDGE_FRACTION):
    x = op.position
    lo, hi = x.min(), x.max()
    extent = hi - lo + 1
    depth = max(1, math.ceil(fraction * extent))
    return x < lo + depth, x > hi - depth


def _corner_masks(op: LatticeOperator, fraction: float = EDGE_FRACTION):
    if op.kind != "network":
        return None
    side = op.shape[0]
    depth = max(1, math.ceil(fraction * side))
    ix = np.array([lab[3] for lab in op.basis_labels])
    iy = np.array([lab[4] for lab in op.basis_labels])
    near_x = (ix < depth) | (ix >= side - depth)
    near_y = (iy < depth) | (iy >= side - depth)
    return near_x & near_y


def edge_report(op: LatticeOperator, modes: np.ndarray, energies, indices=None) -> EdgeReport:
    """Localization and sublattice diagnostics for given mode columns."""
    prob = np.abs(modes) ** 2
    left, right = _edge_masks(op)
    g = op.chirality
    corners = _corner_masks(op)
    return EdgeReport(
        energies=np.asarray(energies, dtype=float),
        indices=None if indices is None else np.asarray(indices),
        modes=modes,
        left_weight=prob[left].sum(axis=0),
        right_weight=prob[right].sum(axis=0),
        sublattice_polarization=np.abs((g[:, None] * prob).sum(axis=0)),
        corner_weight=None if corners is None else prob[corners].sum(axis=0),
    )


def zero_modes(spec: SpectrumResult, tol: float = 1e-6) -> EdgeReport:
    """Eigenstates with |E| < tol, resolved into chiral (one-sublattice) modes."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    op = spec.operator
    idx = np.flatnonzero(np.abs(spec.eigenvalues) < tol)
    z = spec.eigenvectors[:, idx]
    if idx.size:
        # Gamma maps the zero-energy subspace onto itself; diagonalize it there
        _, rot = np.linalg.eigh(z.conj().T @ (op.chirality[:, None] * z))
        z = z @ rot
    return edge_report(op, z, spec.eigenvalues[idx], idx)


def chiral_blocks(op: LatticeOperator, tol: float = 1e-12):
    """Split ``op`` as [[0, h], [h^dagger, 0]] over its two sublattice blocks."""
    err = op.chiral_error()
    if err > tol * max(1.0, float(np.max(np.abs(op.matrix), initial=0.0))):
        raise PreconditionError(f"operator is not chiral symmetric (error {err:.3g})")
    plus = np.flatnonzero(op.chirality > 0)
    minus = np.flatnonzero(op.chirality < 0)
    return plus, minus, op.matrix[np.ix_(plus, minus)]


def chiral_zero_mode_solver(op: LatticeOperator, tol: float | None = None,
                            rtol: float = 1e-10) -> EdgeReport:
    """Zero modes from the null spaces of the off-diagonal chiral block.

    Singular values of ``h`` below ``tol`` (default ``rtol * ||h||``) count as
    zero.  Null vectors of ``h`` live on the minus sublattice, those of
    ``h^dagger`` on the plus sublattice.
    """
    plus, minus, h = chiral_blocks(op)
    u, s, vh = np.linalg.svd(h)
    norm = s[0] if s.size else 0.0
    thr = rtol * norm if tol is None else tol
    dim = op.dimension
    modes, sv = [], []
    # right null space of h: vectors on the minus sublattice
    null_h = np.flatnonzero(s < thr)
    extra_minus = vh.shape[0] - s.size
    for k in list(null_h) + list(range(s.size, s.size + extra_minus)):
        vec = np.zeros(dim, dtype=complex)
        vec[minus] = vh[k].conj()
        modes.append(vec)
        sv.append(s[k] if k < s.size else 0.0)
    extra_plus = u.shape[1] - s.size
    for k in list(null_h) + list(range(s.size, s.size + extra_plus)):
        vec = np.zeros(dim, dtype=complex)
        vec[plus] = u[:, k]
        modes.append(vec)
        sv.append(s[k] if k < s.size else 0.0)
    z = np.array(modes).T if modes else np.zeros((dim, 0), dtype=complex)
    return edge_report(op, z, sv)


def build_network(N: int, table: HoppingTable, boundary_x: str = OPEN, boundary_y: str = OPEN,
                  allow_large: bool = False) -> LatticeOperator:
    """Square network of ``N x N`` four-site cells, same hoppings along x and y.

    Sites are ordered by (x, y) with index ``ix * 2N + iy``; the sublattice of
    a site is A, B, C or D for (x even, y even), (odd, even), (even, odd) and
    (odd, odd) in 0-based coordinates.
    """
    if int(N) != N or N < 2:
        raise DomainError(f"network needs N >= 2 cells, got {N!r}")
    N = int(N)
    if N > MAX_NETWORK_CELLS and not allow_large:
        raise DomainError(f"N={N} exceeds the dense cap {MAX_NETWORK_CELLS}; "
                          "pass allow_large=True to override")
    side = 2 * N
    hx = _chain_matrix(side, table, _check_boundary(boundary_x) == PERIODIC)
    hy = _chain_matrix(side, table, _check_boundary(boundary_y) == PERIODIC)
    eye = np.eye(side)
    h = np.kron(hx, eye) + np.kron(eye, hy)
    labels, chir, pos = [], [], []
    for ix in range(side):
        for iy in range(side):
            sub = "ABCD"[(ix % 2) + 2 * (iy % 2)]
            labels.append((ix // 2 + 1, iy // 2 + 1, sub, ix, iy))
            chir.append(1.0 if sub in "AD" else -1.0)
            pos.append(ix)
    return LatticeOperator(kind="network", matrix=h, basis_labels=labels,
                           boundary=(boundary_x, boundary_y), chirality=np.array(chir),
                           position=np.array(pos, dtype=float), shape=(side, side),
                           meta={"N": N})


def wrap_momentum(k: float) -> float:
    return float((k + np.pi) % (2 * np.pi) - np.pi) if abs(k) > np.pi else float(k)


def build_strip(Nx: int, ky: float, table: HoppingTable) -> LatticeOperator:
    """Strip open along x with ``Nx`` cells, Bloch-reduced along y at ``ky``.

    The y bonds enter through the two-band Bloch block of the y chain, the same
    function that fills the 4x4 Bloch matrix, so an Nx -> infinity strip
    reproduces the 2D bands projected at fixed ky.
    """
    if int(Nx) != Nx or Nx < 2:
        raise DomainError(f"strip needs Nx >= 2 cells, got {Nx!r}")
    Nx = int(Nx)
    if abs(ky) > np.pi:
        wrapped = wrap_momentum(ky)
        warnings.warn(f"ky={ky} outside [-pi, pi], wrapped to {wrapped}", RuntimeWarning,
                      stacklevel=2)
        ky = wrapped
    n_x = 2 * Nx
    hx = _chain_matrix(n_x, table, periodic=False)
    hy = bloch_1d(table, ky)
    h = np.kron(hx, np.eye(2)) + np.kron(np.eye(n_x), hy)
    labels, chir, pos = [], [], []
    for ix in range(n_x):
        for iy in range(2):
            sub = "ABCD"[(ix % 2) + 2 * iy]
            labels.append((ix // 2 + 1, sub, ky))
            chir.append(1.0 if sub in "AD" else -1.0)
            pos.append(ix)
    return LatticeOperator(kind="strip", matrix=h, basis_labels=labels, boundary=(OPEN, PERIODIC),
                           chirality=np.array(chir), position=np.array(pos, dtype=float),
                           shape=(n_x, 2), meta={"Nx": Nx, "ky": ky})


@dataclass
class ProjectedBands:
    """Strip spectra on a ky grid.

    ``edge_weight`` is the probability in the outermost cell at both ends
    together; ``edge_flags`` marks states above ``threshold``.  ``in_gap``
    marks edge states lying outside every bulk continuum of the 2D bands
    projected on the same ky.
    """

    ky: np.ndarray
    energies: np.ndarray
    edge_weight: np.ndarray
    edge_flags: np.ndarray
    in_gap: np.ndarray
    threshold: float

    def edge_counts(self) -> np.ndarray:
        return self.edge_flags.sum(axis=1)

    def in_gap_counts(self) -> np.ndarray:
        return self.in_gap.sum(axis=1)


def projected_bands(Nx: int, table: HoppingTable, ky_grid, threshold: float = EDGE_THRESHOLD,
                    edge_cells: int = 1, jobs: int = 1, bulk_kpoints: int = 4096) -> ProjectedBands:
    ky_grid = np.asarray(ky_grid, dtype=float)
    if np.any(np.abs(ky_grid) > np.pi + 1e-12):
        raise DomainError("ky grid must lie in [-pi, pi]")
    bmap = BlochMap1D(table)
    mod = np.abs(bmap.f(np.linspace(-np.pi, np.pi, bulk_kpoints, endpoint=False)))
    rmin, rmax = mod.min(), mod.max()

    def one(ky):
        op = build_strip(Nx, ky, table)
        w, v = np.linalg.eigh(op.matrix)
        prob = np.abs(v) ** 2
        cell = op.position // 2
        outer = (cell < edge_cells) | (cell >= Nx - edge_cells)
        weight = prob[outer].sum(axis=0)
        fy = abs(bmap.f(ky))
        inside = np.zeros(w.shape, dtype=bool)
        for sy in (1.0, -1.0):
            for sx in (1.0, -1.0):
                lo, hi = sorted((sy * fy + sx * rmin, sy * fy + sx * rmax))
                inside |= (w >= lo) & (w <= hi)
        return w, weight, ~inside

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one, ky_grid))
    else:
        rows = [one(ky) for ky in ky_grid]
    energies = np.array([r[0] for r in rows])
    weight = np.array([r[1] for r in rows])
    flags = weight > threshold
    gap = np.array([r[2] for r in rows]) & flags
    return ProjectedBands(ky=ky_grid, energies=energies, edge_weight=weight, edge_flags=flags,
                          in_gap=gap, threshold=threshold)
