"""Device parameters to coupling rates for SiV spins in a phononic band gap.

All quantities are SI with angular frequencies in rad/s.  Reports carry each
rate both in rad/s and divided by 2 pi (Hz).
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

from spinfloq.errors import DomainError

HBAR = 1.054571817e-34  # J s
TWO_PI = 2 * math.pi

# Detuning that turns g_c / 2pi = 25 MHz into J0 / 2pi = 4.1 MHz.
PRESET_DETUNING = TWO_PI * 25e6 ** 2 / (2 * 4.1e6)

TRANSFER_PERIOD_J0 = 900.0  # transfer period in units of 1/J0


@dataclass(frozen=True, kw_only=True)
class PhysicalParams:
    """Diamond phononic-crystal device; ``detuning`` (Delta_BE) is required."""

    detuning: float
    strain_sensitivity: float = TWO_PI * 1e15
    sound_speed: float = 1.71e4
    mass_density: float = 3539.0
    lattice_const: float = 100e-9
    cross_section: float = 100e-9 * 20e-9
    band_edge: float = TWO_PI * 44.933e9
    strain_profile: float = 1.0
    raman_factor: float = 0.1
    decay_length_ratio: float = 1.0
    spin_dephasing: float = TWO_PI * 100.0
    mech_Q: float = 1e7
    coherence_T2: float = 10e-3
    # elastic constants only matter for the FEM band structure; kept as metadata
    youngs_modulus: float = 1050e9
    poisson_ratio: float = 0.2

    def __post_init__(self):
        positive = ("strain_sensitivity", "sound_speed", "mass_density", "lattice_const",
                    "cross_section", "band_edge", "decay_length_ratio", "mech_Q",
                    "coherence_T2")
        for name in positive:
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)!r}")
        for name in ("strain_profile", "raman_factor", "spin_dephasing"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative, got {getattr(self, name)!r}")
        if not self.detuning > 0:
            raise DomainError("detuning Delta_BE must be positive (spin above the band edge)")

    def replace(self, **changes) -> "PhysicalParams":
        return dataclasses.replace(self, **changes)


def reference_preset(**overrides) -> PhysicalParams:
    """Defaults plus the preset detuning 2pi x 76.2 MHz."""
    return PhysicalParams(detuning=overrides.pop("detuning", PRESET_DETUNING), **overrides)


def spin_phonon_coupling(p: PhysicalParams) -> float:
    """g_k = (d / v_l) sqrt(hbar w_BE / (4 pi rho a A)) xi."""
    zero_point = math.sqrt(HBAR * p.band_edge
                           / (4 * math.pi * p.mass_density * p.lattice_const * p.cross_section))
    return p.strain_sensitivity / p.sound_speed * zero_point * p.strain_profile


def bandgap_coupling(p: PhysicalParams) -> float:
    """g_c = raman_factor * g_k * sqrt(2 pi a / L_c)."""
    return p.raman_factor * spin_phonon_coupling(p) * math.sqrt(TWO_PI / p.decay_length_ratio)


def bare_rate(p: PhysicalParams, g_c: float | None = None) -> float:
    """J0 = g_c^2 / (2 Delta_BE); ``g_c`` defaults to :func:`bandgap_coupling`."""
    if not p.detuning > 0:
        raise DomainError("detuning Delta_BE must be positive")
    g = bandgap_coupling(p) if g_c is None else g_c
    return g * g / (2 * p.detuning)


def detuning_for_rate(g_c: float, J0: float) -> float:
    """Detuning that yields bare rate ``J0`` from coupling ``g_c``."""
    if not J0 > 0:
        raise DomainError("J0 must be positive")
    return g_c * g_c / (2 * J0)


def mechanical_damping(p: PhysicalParams) -> float:
    return p.band_edge / p.mech_Q


def _rate(value: float) -> dict:
    return {"rad_per_s": value, "hz": value / TWO_PI}


def feasibility_report(p: PhysicalParams, g_c: float | None = None) -> dict:
    """Coupling rates, the rate hierarchy and transfer time against T2*."""
    gk = spin_phonon_coupling(p)
    gc = bandgap_coupling(p) if g_c is None else g_c
    J0 = bare_rate(p, gc)
    gm = mechanical_damping(p)
    transfer_time = TRANSFER_PERIOD_J0 / J0
    return {
        "g_k": _rate(gk),
        "g_c": _rate(gc),
        "J0": _rate(J0),
        "detuning": _rate(p.detuning),
        "gamma_m": _rate(gm),
        "gamma_s": _rate(p.spin_dephasing),
        "hierarchy": {
            "g_c_over_gamma_s": gc / p.spin_dephasing if p.spin_dephasing else math.inf,
            "g_c_over_gamma_m": gc / gm,
            "strong_coupling": gc > 100 * max(p.spin_dephasing, gm),
        },
        "transfer_time_s": transfer_time,
        "coherence_T2_s": p.coherence_T2,
        "transfer_within_T2": transfer_time < p.coherence_T2,
        "gamma_s_over_J0": p.spin_dephasing / J0,
    }


_FIELDS = {f.name for f in dataclasses.fields(PhysicalParams)}


def load_params(path: str | Path | None = None, **overrides) -> PhysicalParams:
    """Read a flat JSON key-value file on top of :func:`reference_preset`."""
    values = {}
    if path is not None:
        data = json.loads(Path(path).read_text())
        if not isinstance(data, dict):
            raise DomainError("parameter file must hold a flat JSON object")
        values.update(data)
    values.update(overrides)
    unknown = sorted(set(values) - _FIELDS)
    if unknown:
        raise DomainError(f"unknown physical parameter(s): {', '.join(unknown)}")
    return reference_preset(**{k: float(v) for k, v in values.items()})
