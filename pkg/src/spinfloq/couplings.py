"""Floquet-averaged hoppings of a square-wave driven spin array.

Sites are numbered from 1 along the chain.  Odd sites form sublattice A and
even sites sublattice B; the drive imprints a staircase potential whose steps
alternate between ``a0`` (odd -> even) and ``b0`` (even -> odd).  Averaging
the interaction-picture hopping over one drive period renormalizes every bond
by a complex factor that depends only on the potential difference across it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from spinfloq.errors import DomainError

# Below this phase the closed form suffers cancellation; use the series.
_SMALL_PHASE = 1e-6

DEFAULT_ORDERS = (1, 3)


@dataclass(frozen=True)
class GeometryConfig:
    """Spin spacing, phonon decay length and the bare rate J0."""

    spacing: float = 1.0
    decay_length: float = 1.0
    J0: float = 1.0

    def __post_init__(self):
        for name in ("spacing", "decay_length", "J0"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)!r}")


@dataclass(frozen=True)
class DriveConfig:
    """Square-wave drive with staircase on-site amplitudes.

    ``b0`` is always derived as ``q * omega - a0`` so that the even-neighbor
    hoppings cancel exactly.
    """

    a0: float
    omega: float = 10.0
    q: int = 1

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError(f"omega must be positive, got {self.omega!r}")
        if isinstance(self.q, bool) or int(self.q) != self.q or self.q < 1:
            raise DomainError(f"q must be a positive integer, got {self.q!r}")
        object.__setattr__(self, "q", int(self.q))

    @property
    def b0(self) -> float:
        return self.q * self.omega - self.a0

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega

    def with_a0(self, a0: float) -> "DriveConfig":
        return DriveConfig(a0=a0, omega=self.omega, q=self.q)

    def potential(self, j):
        """On-site drive amplitude V_j for 1-based site index ``j``."""
        j = np.asarray(j)
        step = self.a0 + self.b0
        out = np.where(j % 2 == 1, self.b0 + 0.5 * step * (j - 1), 0.5 * step * j)
        return out if out.ndim else float(out)

    def square_wave(self, t):
        """f(t): -1 on the first half period, +1 on the second."""
        phase = np.mod(t, self.period)
        return np.where(phase < 0.5 * self.period, -1.0, 1.0)

    def high_frequency_ok(self, J0: float = 1.0) -> bool:
        return self.omega >= 5.0 * J0


def bare_coupling(geometry: GeometryConfig, distance: float) -> float:
    """Band-gap mediated coupling J0 * exp(-distance / L_c)."""
    if not distance > 0:
        raise DomainError(f"distance must be positive, got {distance!r}")
    return geometry.J0 * math.exp(-distance / geometry.decay_length)


def floquet_coupling(J: float, dV: float, omega: float) -> complex:
    """Zeroth-order Floquet average of a hopping across potential step ``dV``.

    ``dV`` is V_i - V_j for the coefficient of sigma+_i sigma-_j.
    """
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega!r}")
    phase = 2 * math.pi * dV / omega
    if abs(phase) < _SMALL_PHASE:
        return complex(J) * (1 - 0.5j * phase)
    return complex(J * (1j * omega / (2 * math.pi * dV)) * (np.exp(-1j * phase) - 1))


def _accumulated_drive(t: np.ndarray, period: float) -> np.ndarray:
    # integral of f from 0 to t, for t in [0, T]
    return np.where(t <= 0.5 * period, -t, t - period)


def time_averaged_coupling(
    J: float,
    Vi: float,
    Vj: float,
    omega: float,
    steps: int = 1_000_000,
    return_info: bool = False,
):
    """Brute-force period average of J exp(2i (Delta_i(t) - Delta_j(t))).

    Trapezoid rule on ``steps`` intervals of one period.  Independent of the
    closed form in :func:`floquet_coupling` and used to check it.  With
    ``return_info`` the result comes with a metadata dict holding an error
    estimate from halving the grid and an ``accurate`` flag.
    """
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega!r}")
    steps = int(steps)
    if steps < 2:
        raise DomainError("steps must be at least 2")
    accurate = steps >= 1000
    if not accurate:
        warnings.warn(f"time_averaged_coupling: steps={steps} < 1000, result is inaccurate",
                      RuntimeWarning, stacklevel=2)
    period = 2 * math.pi / omega

    def average(n):
        # even n keeps the kink at T/2 on a grid point
        n += n % 2
        t = np.linspace(0.0, period, n + 1)
        integrand = J * np.exp(2j * (Vi - Vj) * _accumulated_drive(t, period))
        return (integrand.sum() - 0.5 * (integrand[0] + integrand[-1])) / n

    value = complex(average(steps))
    if not return_info:
        return value
    info = {
        "steps": steps,
        "accurate": accurate,
        "error_estimate": abs(value - average(max(steps // 2, 2))),
    }
    return value, info


@dataclass
class HoppingTable:
    """Floquet hoppings per odd neighbor order.

    ``forward[s]`` is the matrix element <B|H|A> for a B spin ``s`` sites to
    the right of an A spin, ``backward[s]`` the same element for B ``s`` sites
    to the left.  The reverse elements are the complex conjugates.
    ``even_residuals[s]`` holds the (suppressed) same-sublattice hoppings for
    diagnostics only; lattices never use them.
    """

    neighbor_orders: tuple[int, ...]
    forward: dict[int, complex]
    backward: dict[int, complex]
    even_residuals: dict[int, complex] = field(default_factory=dict)
    bare: dict[int, float] = field(default_factory=dict)

    def forward_reverse(self, order: int) -> complex:
        """<A|H|B> for the forward bond."""
        return self.forward[order].conjugate()

    def backward_reverse(self, order: int) -> complex:
        return self.backward[order].conjugate()

    def rows(self) -> list[dict]:
        return [
            {
                "order": s,
                "forward_re": self.forward[s].real,
                "forward_im": self.forward[s].imag,
                "backward_re": self.backward[s].real,
                "backward_im": self.backward[s].imag,
            }
            for s in self.neighbor_orders
        ]

    @classmethod
    def empty(cls) -> "HoppingTable":
        return cls(neighbor_orders=(), forward={}, backward={})


def _check_orders(neighbor_orders) -> tuple[int, ...]:
    orders = []
    for s in neighbor_orders:
        if isinstance(s, bool) or int(s) != s or s < 1:
            raise DomainError(f"neighbor order must be a positive integer, got {s!r}")
        if int(s) % 2 == 0:
            raise DomainError(
                f"even neighbor order {s} rejected: even hoppings are diagnostics only")
        orders.append(int(s))
    return tuple(sorted(set(orders)))


def build_hopping_table(
    geometry: GeometryConfig,
    drive: DriveConfig,
    neighbor_orders=DEFAULT_ORDERS,
) -> HoppingTable:
    """Tabulate forward/backward hoppings for each odd neighbor order."""
    orders = _check_orders(neighbor_orders)
    if not drive.high_frequency_ok(geometry.J0):
        warnings.warn(
            f"omega={drive.omega} < 5 J0: zeroth-order Floquet average is unreliable",
            RuntimeWarning, stacklevel=2)
    step = drive.a0 + drive.b0
    forward, backward, bare = {}, {}, {}
    for s in orders:
        J = bare_coupling(geometry, s * geometry.spacing)
        bare[s] = J
        r = (s - 1) // 2
        forward[s] = floquet_coupling(J, r * step + drive.a0, drive.omega)
        rp = (s + 1) // 2
        backward[s] = floquet_coupling(J, -(rp * step - drive.a0), drive.omega)

    even = {}
    for s in range(2, (max(orders) if orders else 1) + 2, 2):
        J = bare_coupling(geometry, s * geometry.spacing)
        even[s] = floquet_coupling(J, (s // 2) * step, drive.omega)
    return HoppingTable(neighbor_orders=orders, forward=forward, backward=backward,
                        even_residuals=even, bare=bare)


def table_for(a0: float, omega: float = 10.0, q: int = 1, orders=DEFAULT_ORDERS,
              geometry: GeometryConfig | None = None) -> HoppingTable:
    """Shortcut for the common unit-spacing, L_c = a configuration."""
    return build_hopping_table(geometry or GeometryConfig(), DriveConfig(a0, omega, q), orders)
