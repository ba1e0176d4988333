"""Closed-form statistics of the deterministic thermal-ancilla amplifier family.

An input coherent state ``|alpha>`` leaves the amplifier as a Gaussian
centred on ``g*alpha`` whose normally ordered noise is ``mu2 (g^2 - 1)``.
``mu2 = 1`` is the ideal (physical) linear amplifier, ``mu2 = 1/2`` the
perfect amplifier and ``mu2 = 0`` the immaculate one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import AmplifierError

PFP_TOL = 1e-12


@dataclass(frozen=True)
class GaussianAmpSpec:
    gain: float
    mu2: float

    def __post_init__(self):
        if not self.gain > 1.0:
            raise ValueError(f"gain must exceed 1, got {self.gain}")
        if not self.mu2 >= 0.0:
            raise ValueError(f"mu2 must be nonnegative, got {self.mu2}")

    @property
    def physical(self) -> bool:
        """Completely positive only for a physical (thermal) ancilla, ``mu2 >= 1``."""
        return self.mu2 >= 1.0


@dataclass(frozen=True)
class GaussianOutputStats:
    mean: complex
    var_P: float
    var_W: float
    var_Q: float


def output_stats(spec: GaussianAmpSpec, alpha: complex) -> GaussianOutputStats:
    var_p = spec.mu2 * (spec.gain**2 - 1.0)
    return GaussianOutputStats(
        mean=spec.gain * complex(alpha),
        var_P=var_p,
        var_W=var_p + 0.5,
        var_Q=var_p + 1.0,
    )


def output_q(spec: GaussianAmpSpec, alpha: complex, beta: complex) -> float:
    """Output Q distribution at ``beta``: a Gaussian of variance ``var_Q``."""
    s = output_stats(spec, alpha)
    return math.exp(-abs(complex(beta) - s.mean) ** 2 / s.var_Q) / (math.pi * s.var_Q)


def fidelity_mu(spec: GaussianAmpSpec) -> float:
    """Fidelity of the output with ``|g alpha>``; independent of ``alpha``."""
    return 1.0 / (spec.mu2 * (spec.gain**2 - 1.0) + 1.0)


def success_bound_mu(spec: GaussianAmpSpec) -> float:
    """Largest working probability compatible with the uncertainty principle."""
    return spec.mu2 + (1.0 - spec.mu2) / spec.gain**2


def pfp_bound(spec: GaussianAmpSpec) -> float:
    """Probability-fidelity product bound; equals ``1/g^2`` for every ``mu2``."""
    pfp = success_bound_mu(spec) * fidelity_mu(spec)
    target = 1.0 / spec.gain**2
    if abs(pfp - target) > PFP_TOL * max(1.0, target):
        raise ArithmeticError(f"probability-fidelity product {pfp} != 1/g^2 = {target}")
    return pfp


def snr_resolvability_bound(abar: float) -> float:
    """Input quadrature SNR ``sqrt(2) abar``, the ceiling on ``sqrt(p) * SNR_out``."""
    if abar < 0:
        raise ValueError("abar must be nonnegative")
    return math.sqrt(2.0) * abar


def cloning_fidelity(M: int) -> float:
    """Optimal Gaussian 1 -> M coherent-state cloning fidelity ``M / (2M - 1)``."""
    if M < 1:
        raise AmplifierError(f"number of clones must be >= 1, got {M}")
    return M / (2.0 * M - 1.0)
