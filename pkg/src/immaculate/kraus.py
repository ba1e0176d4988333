"""Optimal phase-insensitive probabilistic immaculate amplifier.

A phase-insensitive Kraus operator has number-basis elements on a single
diagonal strip ``|n><n+k|``. The optimal operators amplify the disk
``|alpha| <~ sqrt(N)/g`` into ``|g alpha>``:

* restricted ``P_N K_k``: elements ``sqrt(N!/(N+k)!) g^(n-N) sqrt((n+k)!/n!)``
  for ``n <= N`` and nothing above,
* extended ``Upsilon_k``: the same plus unit elements ``|n><n+k|`` for ``n > N``.

Strips are stored as a profile of matrix elements, never as dense matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import TruncationError
from .fock import (
    FockVector,
    coherent,
    default_cutoff,
    log_poisson_terms,
    log_truncated_exp,
    overlap,
    poisson_cdf,
)

CONTRACTION_TOL = 1e-12
TAIL_RTOL = 1e-16


@dataclass(frozen=True)
class AmplifierSpec:
    gain: float
    N: int
    k: int = 0

    def __post_init__(self):
        if not self.gain > 1.0:
            raise ValueError(f"gain must exceed 1, got {self.gain}")
        if self.N < 0 or self.k < 0:
            raise ValueError("N and k must be nonnegative")

    def with_k(self, k: int) -> "AmplifierSpec":
        return AmplifierSpec(self.gain, self.N, k)


@dataclass(frozen=True, eq=False)
class StripKraus:
    """Operator ``sum_n elements[n] |n><n+offset|`` on number states ``0..cutoff``."""

    offset: int
    elements: np.ndarray
    cutoff: int
    profile: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.elements.size != self.cutoff - self.offset + 1:
            raise ValueError("strip length does not match cutoff and offset")
        if np.any(self.elements < 0) or np.any(self.elements**2 > 1.0 + CONTRACTION_TOL):
            raise ValueError("strip operator is not trace decreasing")
        self.elements.setflags(write=False)

    def effect_diagonal(self) -> np.ndarray:
        """Diagonal of ``Upsilon^dag Upsilon``, indexed by input number ``m = 0..cutoff``."""
        d = np.zeros(self.cutoff + 1)
        d[self.offset :] = self.elements**2
        return d

    def dense(self) -> np.ndarray:
        """Dense matrix, for tests and small cross-checks only."""
        mat = np.zeros((self.cutoff + 1, self.cutoff + 1))
        n = np.arange(self.elements.size)
        mat[n, n + self.offset] = self.elements
        return mat


@dataclass(frozen=True)
class KrausOutcome:
    out: FockVector | None
    prob: float
    zero: bool = False


@dataclass(frozen=True)
class ChernoffBound:
    value: float
    side: str  # "lower" or "upper"


def _log_lambda(spec: AmplifierSpec) -> float:
    """``log sqrt(N!/(N+k)!) - N log g``, the restricted strip prefactor."""
    return 0.5 * (math.lgamma(spec.N + 1) - math.lgamma(spec.N + spec.k + 1)) - spec.N * math.log(spec.gain)


def _log_elements_inside(spec: AmplifierSpec, n: np.ndarray) -> np.ndarray:
    return _log_lambda(spec) + n * math.log(spec.gain) + 0.5 * (gammaln(n + spec.k + 1) - gammaln(n + 1))


def _build(spec: AmplifierSpec, cutoff: int, extended: bool) -> StripKraus:
    if cutoff < spec.N + spec.k:
        raise TruncationError(f"cutoff {cutoff} < N + k = {spec.N + spec.k}")
    n = np.arange(cutoff - spec.k + 1)
    inside = n <= spec.N
    elements = np.where(inside, np.exp(_log_elements_inside(spec, np.minimum(n, spec.N))), 1.0 if extended else 0.0)
    # f_k(n): the element with the sqrt((n+k)!/n!) ladder factor stripped off
    profile = elements * np.exp(-0.5 * (gammaln(n + spec.k + 1) - gammaln(n + 1)))
    return StripKraus(offset=spec.k, elements=elements, cutoff=cutoff, profile=profile)


def restricted_kraus(spec: AmplifierSpec, cutoff: int) -> StripKraus:
    """``P_N K_k`` truncated to number states ``0..cutoff``."""
    return _build(spec, cutoff, extended=False)


def extended_kraus(spec: AmplifierSpec, cutoff: int) -> StripKraus:
    """``Upsilon_k = P_N K_k + sum_{n>N} |n><n+k|``."""
    return _build(spec, cutoff, extended=True)


def apply(kr: StripKraus, state: FockVector) -> KrausOutcome:
    """Apply the strip to a pure state; returns the normalized branch and its probability."""
    if state.cutoff > kr.cutoff:
        raise TruncationError(f"state cutoff {state.cutoff} exceeds operator cutoff {kr.cutoff}")
    psi = state.padded(kr.cutoff).amps
    out = np.zeros(kr.cutoff + 1, dtype=complex)
    out[: kr.elements.size] = kr.elements * psi[kr.offset :]
    prob = float(np.sum(np.abs(out) ** 2))
    if prob == 0.0:
        return KrausOutcome(out=None, prob=0.0, zero=True)
    return KrausOutcome(out=FockVector(out / math.sqrt(prob)), prob=prob)


def apply_cutoff(spec: AmplifierSpec, abar: float) -> int:
    """Cutoff covering both the input and the target Poisson tails, plus the strip offset."""
    return default_cutoff(max(spec.gain**2, 1.0) * abar * abar) + spec.k


def amplify_coherent(
    spec: AmplifierSpec, abar: float, phi: float = 0.0, extended: bool = True, cutoff: int | None = None
) -> KrausOutcome:
    """Run ``|abar e^{i phi}>`` through the (extended by default) Kraus operator.

    An explicit ``cutoff`` may only raise the automatic one.
    """
    auto = max(apply_cutoff(spec, abar), spec.N + spec.k + 1)
    if cutoff is None:
        cutoff = auto
    elif cutoff < auto:
        raise TruncationError(f"cutoff {cutoff} is below the required {auto}")
    build = extended_kraus if extended else restricted_kraus
    return apply(build(spec, cutoff), coherent(abar * complex(math.cos(phi), math.sin(phi)), cutoff))


# ---------------------------------------------------------------------------
# closed forms


def success_prob_restricted(spec: AmplifierSpec, abar: float) -> float:
    """``N!/(N+k)! exp(-abar^2) abar^(2k) g^(-2N) e_N(g^2 abar^2)``."""
    if abar < 0:
        raise ValueError("abar must be nonnegative")
    lam = abar * abar
    if lam == 0.0:
        return math.exp(2.0 * _log_lambda(spec)) if spec.k == 0 else 0.0
    return math.exp(
        2.0 * _log_lambda(spec) - lam + spec.k * math.log(lam) + log_truncated_exp(spec.gain**2 * lam, spec.N)
    )


def fidelity_restricted(spec: AmplifierSpec, abar: float) -> float:
    """Poisson CDF ``Pr[n <= N | g^2 abar^2]``; independent of ``k``."""
    if abar < 0:
        raise ValueError("abar must be nonnegative")
    return poisson_cdf(spec.N, (spec.gain * abar) ** 2)


def fidelity_chernoff_bounds(spec: AmplifierSpec, abar: float) -> ChernoffBound:
    """Chernoff lower bound inside the disk, upper bound outside it."""
    lam = (spec.gain * abar) ** 2
    N = spec.N
    F = fidelity_restricted(spec, abar)
    if lam <= N:
        if lam == 0.0:
            out = ChernoffBound(1.0, "lower")
        else:
            out = ChernoffBound(1.0 - math.exp(-lam + (N + 1) * (1.0 + math.log(lam) - math.log(N + 1))), "lower")
        ok = out.value <= F * (1.0 + 1e-12) + 1e-300
    else:
        out = ChernoffBound(math.exp(N * (1.0 + math.log(lam) - lam / N - math.log(N))) if N > 0 else math.exp(-lam), "upper")
        ok = F <= out.value * (1.0 + 1e-12) + 1e-300
    if not ok:
        raise ArithmeticError(f"Chernoff {out.side} bound {out.value} does not bracket F={F}")
    return out


def _tail_logs(start: int, stop_hint: float, term) -> np.ndarray:
    """Log-terms ``term(n)`` for ``n >= start`` until they fall ``TAIL_RTOL`` below the sum."""
    n_end = int(math.ceil(max(stop_hint, start) + 12.0 * math.sqrt(max(stop_hint, 1.0)) + 40.0))
    while True:
        n = np.arange(start, n_end + 1)
        logs = term(n)
        if logs[-1] < math.log(TAIL_RTOL) + logsumexp(logs) or n_end > 10**7:
            return logs
        n_end *= 2


def _log_brackets(spec: AmplifierSpec, abar: float) -> tuple[float, float]:
    """Logs of the two bracketed series in the extended ``p_k`` and ``F_k``.

    ``B = N!/((N+k)! g^(2N)) e_N(g^2 abar^2) + sum_{n>N} abar^(2n) / (n+k)!``
    ``A = sqrt(N!/(N+k)!) g^(-N) e_N(g^2 abar^2) + sum_{n>N} g^n abar^(2n) / sqrt(n! (n+k)!)``
    """
    g, N, k = spec.gain, spec.N, spec.k
    lam = abar * abar
    log_ll = _log_lambda(spec)
    if lam == 0.0:
        return 2.0 * log_ll, log_ll
    log_en = log_truncated_exp(g * g * lam, N)
    log_lam = math.log(lam)
    b_tail = _tail_logs(N + 1, lam, lambda n: n * log_lam - gammaln(n + k + 1))
    a_tail = _tail_logs(
        N + 1, g * lam, lambda n: n * math.log(g) + n * log_lam - 0.5 * (gammaln(n + 1) + gammaln(n + k + 1))
    )
    log_B = float(logsumexp(np.concatenate(([2.0 * log_ll + log_en], b_tail))))
    log_A = float(logsumexp(np.concatenate(([log_ll + log_en], a_tail))))
    return log_B, log_A


def success_prob_extended(spec: AmplifierSpec, abar: float) -> float:
    """``p_k = exp(-abar^2) abar^(2k) B`` for the extended operator."""
    if abar < 0:
        raise ValueError("abar must be nonnegative")
    lam = abar * abar
    if lam == 0.0:
        return math.exp(2.0 * _log_lambda(spec)) if spec.k == 0 else 0.0
    log_B, _ = _log_brackets(spec, abar)
    return min(1.0, math.exp(-lam + spec.k * math.log(lam) + log_B))


def fidelity_extended(spec: AmplifierSpec, abar: float) -> float:
    """``F_k = exp(-g^2 abar^2) A^2 / B``.

    The ``abar^(2k)`` factors cancel analytically, so the ``abar -> 0`` limit
    (a ``0/0`` in the raw ratio for ``k >= 1``) is finite and equal to 1.
    """
    if abar < 0:
        raise ValueError("abar must be nonnegative")
    log_B, log_A = _log_brackets(spec, abar)
    return min(1.0, math.exp(-((spec.gain * abar) ** 2) + 2.0 * log_A - log_B))


def pfp_and_do_nothing(spec: AmplifierSpec, abar: float) -> tuple[float, float]:
    """``(p_0 F_0, |<alpha|g alpha>|^2)``; the first never exceeds the second."""
    if spec.k != 0:
        raise ValueError("do-nothing comparison is defined for the k = 0 amplifier")
    pfp = success_prob_extended(spec, abar) * fidelity_extended(spec, abar)
    nothing = math.exp(-((spec.gain - 1.0) * abar) ** 2)
    if pfp > nothing * (1.0 + 1e-12):
        raise ArithmeticError(f"p F = {pfp} beats doing nothing ({nothing}) at abar={abar}")
    return pfp, nothing


# ---------------------------------------------------------------------------
# verification of the k-ordering and rotation covariance


@dataclass
class MonotonicityReport:
    gain: float
    N: int
    ks: list[int]
    checks: int = 0
    violations: list[dict] = field(default_factory=list)
    max_q_negativity: float = 0.0
    max_g_sym: float = -math.inf

    @property
    def ok(self) -> bool:
        return not self.violations


def q_difference_diagonal(gain: float, N: int, k: int, cutoff: int) -> np.ndarray:
    """Diagonal of ``Upsilon_k^dag Upsilon_k - Upsilon_{k+1}^dag Upsilon_{k+1}``."""
    a = extended_kraus(AmplifierSpec(gain, N, k), cutoff).effect_diagonal()
    b = extended_kraus(AmplifierSpec(gain, N, k + 1), cutoff).effect_diagonal()
    return a - b


def log_profile(gain: float, N: int, k: int, n: np.ndarray) -> np.ndarray:
    """``log f_k(n)`` for the extended operator."""
    n = np.asarray(n)
    inside = 0.5 * (math.lgamma(N + 1) - math.lgamma(N + k + 1)) + (n - N) * math.log(gain)
    outside = 0.5 * (gammaln(n + 1) - gammaln(n + k + 1))
    return np.where(n <= N, inside, outside)


def g_symmetric(gain: float, N: int, k: int, abar: float, m: np.ndarray, n: np.ndarray) -> np.ndarray:
    """``G(m,n) + G(n,m) = P_n P_m f(n) f(m) [g^m f(n) - g^n f(m)] [h^2(m) - h^2(n)]``.

    Evaluated as sign times ``exp`` of a log-magnitude so that large ``n`` and
    tiny Poisson weights neither overflow nor lose the sign.
    """
    m = np.asarray(m)
    n = np.asarray(n)
    lg = math.log(gain)
    lfm, lfn = log_profile(gain, N, k, m), log_profile(gain, N, k, n)
    lam = abar * abar
    lpm, lpn = log_poisson_terms(lam, m), log_poisson_terms(lam, n)
    # g^m f(n) - g^n f(m) = g^m f(n) (1 - exp(d))
    d = n * lg + lfm - (m * lg + lfn)
    bracket1_sign = -np.sign(d)
    with np.errstate(divide="ignore"):
        bracket1_log = m * lg + lfn + np.log(np.abs(-np.expm1(d)))
    h2m = 1.0 / (np.maximum(m, N) + k + 1)
    h2n = 1.0 / (np.maximum(n, N) + k + 1)
    diff = h2m - h2n
    with np.errstate(divide="ignore"):
        log_mag = lpn + lpm + lfn + lfm + bracket1_log + np.log(np.abs(diff))
    return bracket1_sign * np.sign(diff) * np.exp(log_mag)


def verify_monotonicity(
    gain: float,
    N: int,
    ks,
    abar_grid,
    *,
    rtol: float = 1e-12,
    q_tol: float = 1e-14,
    g_tol: float = 1e-14,
    random_pairs: int = 200,
    seed: int = 0,
) -> MonotonicityReport:
    """Check ``p_k >= p_{k+1}``, ``F_k >= F_{k+1}`` and the certificates behind them.

    Also checks ``F_0`` against the restricted fidelity. Pairs ``(m, n)`` for
    ``G`` cover all ``m < n <= N + 15`` plus ``random_pairs`` larger ones, so
    every case region (both inside, straddling, both outside) is exercised.
    """
    ks = sorted(int(k) for k in ks)
    if len(ks) < 2:
        raise ValueError("need at least two k values")
    rep = MonotonicityReport(gain=gain, N=N, ks=ks)
    rng = np.random.default_rng(seed)
    top = N + 15
    mm, nn = np.triu_indices(top + 1, k=1)
    extra_m = rng.integers(0, 4 * top, size=random_pairs)
    extra_n = extra_m + rng.integers(1, 4 * top, size=random_pairs)
    mm = np.concatenate((mm, extra_m))
    nn = np.concatenate((nn, extra_n))

    for k in ks:
        cutoff = N + k + 40
        qd = q_difference_diagonal(gain, N, k, cutoff)
        rep.checks += qd.size
        worst = float(qd.min())
        rep.max_q_negativity = min(rep.max_q_negativity, worst)
        if worst < -q_tol:
            rep.violations.append({"check": "Q_k", "k": k, "n": int(qd.argmin()), "value": worst})

    for abar in abar_grid:
        abar = float(abar)
        p = {k: success_prob_extended(AmplifierSpec(gain, N, k), abar) for k in ks}
        F = {k: fidelity_extended(AmplifierSpec(gain, N, k), abar) for k in ks}
        for k0, k1 in zip(ks, ks[1:]):
            rep.checks += 2
            if p[k1] > p[k0] * (1.0 + rtol):
                rep.violations.append({"check": "p_k", "k": k0, "abar": abar, "p_k": p[k0], "p_k1": p[k1]})
            if F[k1] > F[k0] * (1.0 + rtol):
                rep.violations.append({"check": "F_k", "k": k0, "abar": abar, "F_k": F[k0], "F_k1": F[k1]})
        if 0 in ks:
            rep.checks += 1
            Fr = fidelity_restricted(AmplifierSpec(gain, N, 0), abar)
            if Fr > F[0] * (1.0 + rtol):
                rep.violations.append({"check": "F0>=F_restricted", "abar": abar, "F0": F[0], "F": Fr})
        for k in ks:
            gs = g_symmetric(gain, N, k, abar, mm, nn)
            rep.checks += gs.size
            i = int(np.argmax(gs))
            rep.max_g_sym = max(rep.max_g_sym, float(gs[i]))
            if gs[i] > g_tol:
                rep.violations.append(
                    {"check": "G", "k": k, "abar": abar, "m": int(mm[i]), "n": int(nn[i]), "value": float(gs[i])}
                )
    return rep


def rotation(theta: float, cutoff: int) -> np.ndarray:
    return np.exp(1j * theta * np.arange(cutoff + 1))


def verify_rotation_covariance(kr: StripKraus, trials: int, seed: int = 0, thetas=None) -> float:
    """Max ``|| e^{ik theta} R(theta) Upsilon psi - Upsilon R(theta) psi ||`` over random trials."""
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for t in range(trials):
        theta = float(thetas[t % len(thetas)]) if thetas is not None else float(rng.uniform(0, 2 * math.pi))
        psi = rng.normal(size=kr.cutoff + 1) + 1j * rng.normal(size=kr.cutoff + 1)
        psi /= np.linalg.norm(psi)
        R = rotation(theta, kr.cutoff)
        lhs = np.exp(1j * kr.offset * theta) * R * _raw_apply(kr, psi)
        rhs = _raw_apply(kr, R * psi)
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst


def _raw_apply(kr: StripKraus, psi: np.ndarray) -> np.ndarray:
    out = np.zeros(kr.cutoff + 1, dtype=complex)
    out[: kr.elements.size] = kr.elements * psi[kr.offset :]
    return out


def fidelity_from_state(spec: AmplifierSpec, abar: float, extended: bool = True) -> tuple[float, float]:
    """``(p, |<g alpha|out>|^2)`` by explicit application; oracle for the closed forms."""
    res = amplify_coherent(spec, abar, extended=extended)
    if res.zero:
        return 0.0, 0.0
    target = coherent(spec.gain * abar, res.out.cutoff)
    return res.prob, abs(overlap(target, res.out)) ** 2

