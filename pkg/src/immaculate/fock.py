"""Truncated Fock-space primitives for a single bosonic mode.

States are stored as complex amplitude arrays over number states
``|0>, ..., |D>``. Every factorial or power ratio goes through ``lgamma``
so that amplitudes such as ``abar**n / sqrt(n!)`` never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammainc, gammaln, logsumexp

from .errors import AliasingError, DegenerateStateError

TWO_PI = 2.0 * math.pi
NORMALIZED_TOL = 1e-12


def default_cutoff(mean: float) -> int:
    """Cutoff ``ceil(lam + 12 sqrt(lam) + 25)`` for the largest Poisson mean in play."""
    mean = max(float(mean), 0.0)
    return int(math.ceil(mean + 12.0 * math.sqrt(mean) + 25.0))


@dataclass(frozen=True, eq=False)
class FockVector:
    """Complex amplitudes ``c_0..c_D`` over number states."""

    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if amps.size == 0:
            raise ValueError("a Fock vector needs at least one amplitude")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def cutoff(self) -> int:
        return self.amps.size - 1

    @property
    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm2 - 1.0) <= NORMALIZED_TOL

    def normalized(self) -> "FockVector":
        n2 = self.norm2
        if n2 <= 0.0:
            raise DegenerateStateError("cannot normalize a zero vector")
        return FockVector(self.amps / math.sqrt(n2))

    def padded(self, cutoff: int) -> "FockVector":
        """Zero-pad (never truncate) to the given cutoff."""
        if cutoff < self.cutoff:
            raise ValueError(f"cannot pad cutoff {self.cutoff} down to {cutoff}")
        out = np.zeros(cutoff + 1, dtype=complex)
        out[: self.amps.size] = self.amps
        return FockVector(out)

    @classmethod
    def number(cls, n: int, cutoff: int) -> "FockVector":
        if not 0 <= n <= cutoff:
            raise ValueError("number state outside the cutoff")
        amps = np.zeros(cutoff + 1, dtype=complex)
        amps[n] = 1.0
        return cls(amps)

    @classmethod
    def vacuum(cls, cutoff: int = 0) -> "FockVector":
        return cls.number(0, cutoff)


@dataclass(frozen=True)
class CoherentParams:
    """Polar coordinates of a coherent amplitude ``abar * exp(i phi)``."""

    abar: float
    phi: float = 0.0

    def __post_init__(self):
        if not self.abar >= 0.0:
            raise ValueError(f"abar must be nonnegative, got {self.abar}")
        object.__setattr__(self, "abar", float(self.abar))
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)

    @property
    def alpha(self) -> complex:
        return self.abar * complex(math.cos(self.phi), math.sin(self.phi))

    @classmethod
    def from_complex(cls, alpha: complex) -> "CoherentParams":
        return cls(abs(alpha), math.atan2(alpha.imag, alpha.real) if alpha else 0.0)


@dataclass(frozen=True)
class PoissonQuery:
    mean: float
    n: int

    def __post_init__(self):
        if not self.mean >= 0.0:
            raise ValueError("Poisson mean must be nonnegative")
        if self.n < 0:
            raise ValueError("Poisson count must be nonnegative")


@dataclass(frozen=True)
class Moments:
    mean_a: complex
    mean_a2: complex
    mean_n: float
    mean_n2: float
    norm2: float = field(default=1.0)


def log_coherent_magnitudes(abar: float, cutoff: int) -> np.ndarray:
    """``log |<n|alpha>|`` for n = 0..cutoff; ``-inf`` where the amplitude vanishes."""
    n = np.arange(cutoff + 1)
    if abar == 0.0:
        out = np.full(cutoff + 1, -np.inf)
        out[0] = 0.0
        return out
    return -0.5 * abar * abar + n * math.log(abar) - 0.5 * gammaln(n + 1)


def coherent_fock(p: CoherentParams, cutoff: int | None = None) -> tuple[FockVector, float]:
    """Number-basis coherent state and the probability weight lost above the cutoff.

    The lost weight is evaluated as the Poisson upper tail rather than
    ``1 - sum|c_n|^2`` so it stays accurate when it is far below 1e-16.
    """
    lam = p.abar * p.abar
    if cutoff is None:
        cutoff = default_cutoff(lam)
    if cutoff < 0:
        raise ValueError("cutoff must be nonnegative")
    n = np.arange(cutoff + 1)
    amps = np.exp(log_coherent_magnitudes(p.abar, cutoff)) * np.exp(1j * n * p.phi)
    tail = float(gammainc(cutoff + 1, lam)) if lam > 0 else 0.0
    return FockVector(amps), tail


def coherent(alpha: complex, cutoff: int | None = None) -> FockVector:
    """Shorthand for :func:`coherent_fock` from a complex amplitude, dropping the tail."""
    return coherent_fock(CoherentParams.from_complex(complex(alpha)), cutoff)[0]


def log_poisson_pmf(q: PoissonQuery) -> float:
    """``log Pr[n | lam]``; ``-inf`` for ``lam = 0, n > 0``."""
    if q.mean == 0.0:
        return 0.0 if q.n == 0 else -math.inf
    return -q.mean + q.n * math.log(q.mean) - math.lgamma(q.n + 1)


def log_poisson_terms(mean: float, n: np.ndarray) -> np.ndarray:
    """Vectorised :func:`log_poisson_pmf`."""
    n = np.asarray(n)
    if mean == 0.0:
        return np.where(n == 0, 0.0, -np.inf)
    return -mean + n * math.log(mean) - gammaln(n + 1)


def truncated_exp(x: float, N: int) -> float:
    """``e_N(x) = sum_{n=0}^{N} x^n / n!`` by forward recurrence, compensated sum."""
    if x < 0 or N < 0:
        raise ValueError("truncated_exp needs x >= 0 and N >= 0")
    terms = [1.0]
    t = 1.0
    for n in range(1, N + 1):
        t *= x / n
        terms.append(t)
    return math.fsum(terms)


def log_truncated_exp(x: float, N: int) -> float:
    """``log e_N(x)``, safe for arguments where ``e_N`` overflows."""
    if x < 0 or N < 0:
        raise ValueError("log_truncated_exp needs x >= 0 and N >= 0")
    if x == 0.0:
        return 0.0
    n = np.arange(N + 1)
    return float(logsumexp(n * math.log(x) - gammaln(n + 1)))


def poisson_cdf(N: int, mean: float) -> float:
    """``Pr[n <= N | mean] = exp(-mean) e_N(mean)``, summed in log space."""
    if N < 0:
        return 0.0
    if mean == 0.0:
        return 1.0
    return min(1.0, math.exp(-mean + log_truncated_exp(mean, N)))


def overlap(u: FockVector, v: FockVector) -> complex:
    """``<u|v>``; the shorter vector is zero-padded."""
    m = min(u.amps.size, v.amps.size)
    return complex(np.vdot(u.amps[:m], v.amps[:m]))


def state_moments(v: FockVector) -> Moments:
    """``<a>, <a^2>, <n>, <n^2>`` of the normalized state."""
    n2 = v.norm2
    if n2 <= 0.0:
        raise DegenerateStateError("moments of a zero vector are undefined")
    c = v.amps / math.sqrt(n2)
    n = np.arange(c.size, dtype=float)
    p = np.abs(c) ** 2
    mean_a = complex(np.sum(np.conj(c[:-1]) * np.sqrt(n[1:]) * c[1:])) if c.size > 1 else 0j
    mean_a2 = (
        complex(np.sum(np.conj(c[:-2]) * np.sqrt(n[1:-1] * n[2:]) * c[2:])) if c.size > 2 else 0j
    )
    return Moments(
        mean_a=mean_a,
        mean_a2=mean_a2,
        mean_n=math.fsum(n * p),
        mean_n2=math.fsum(n * n * p),
        norm2=n2,
    )


def circle_projection_check(abar: float, n: int, K: int | None = None, cutoff: int = 30) -> FockVector:
    """Trapezoid rule for the Fourier projection ``int dphi/2pi e^{-i n phi} |abar e^{i phi}>``.

    The integrand is a trigonometric polynomial of degree ``cutoff + |n|``, so
    ``K > cutoff + |n|`` nodes integrate it exactly; we demand ``4x`` headroom.
    Negative ``n`` returns (numerically) zero, the discrete signature of the
    linear dependence of the coherent states on a circle.
    """
    if K is None:
        K = 8 * (cutoff + abs(n) + 1)
    if K < 4 * (cutoff + abs(n)):
        raise AliasingError(f"K={K} nodes alias a degree-{cutoff + abs(n)} integrand")
    phis = TWO_PI * np.arange(K) / K
    m = np.arange(cutoff + 1)
    mags = np.exp(log_coherent_magnitudes(abar, cutoff))
    # rows: nodes; columns: number states
    phase = np.exp(1j * np.outer(phis, m - n))
    amps = mags * phase.mean(axis=0)
    return FockVector(amps)
