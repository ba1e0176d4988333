"""Invariant suites behind ``immaculate verify``.

Each suite returns a :class:`SuiteResult` counting the checks it made and
listing every violation as a JSON-friendly dict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fock import (
    CoherentParams,
    circle_projection_check,
    coherent,
    coherent_fock,
    log_coherent_magnitudes,
    overlap,
    poisson_cdf,
)
from .gaussian import GaussianAmpSpec, cloning_fidelity, fidelity_mu, pfp_bound, success_bound_mu
from .kraus import (
    AmplifierSpec,
    amplify_coherent,
    extended_kraus,
    fidelity_chernoff_bounds,
    fidelity_extended,
    fidelity_from_state,
    fidelity_restricted,
    pfp_and_do_nothing,
    success_prob_extended,
    success_prob_restricted,
    verify_monotonicity,
    verify_rotation_covariance,
)
from .quasidist import q_distribution, snr_report
from .usd import (
    SymmetricEnsemble,
    amplifier_usd_bound,
    branch_fidelity,
    build_reciprocal_basis,
    chernoff_remainder,
    disk_bound,
    failure_spectrum,
    helstrom_two,
    q_r_exact,
    q_spectrum,
    usd_amp_apply,
    usd_success,
    usd_two,
)

KRAUS_FAMILIES = ((math.sqrt(2.0), 2), (math.sqrt(2.0), 4), (3.0, 9))


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    violations: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def check(self, passed: bool, **detail) -> None:
        self.checks += 1
        if not passed:
            self.violations.append({k: _plain(v) for k, v in detail.items()})

    def as_dict(self) -> dict:
        return {"name": self.name, "checks": self.checks, "ok": self.ok, "violations": self.violations}


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def fock_suite() -> SuiteResult:
    res = SuiteResult("fock")
    for abar in np.linspace(0.0, 4.0, 41):
        v, tail = coherent_fock(CoherentParams(float(abar)))
        res.check(tail <= 1e-12, check="truncation tail", abar=abar, tail=tail)
        res.check(abs(v.norm2 + tail - 1.0) <= 1e-12, check="norm + tail", abar=abar, norm2=v.norm2)
    rng = np.random.default_rng(1)
    for _ in range(50):
        a, b = rng.normal(scale=1.5, size=2) + 1j * rng.normal(scale=1.5, size=2)
        D = 80
        got = abs(overlap(coherent(a, D), coherent(b, D))) ** 2
        want = math.exp(-abs(a - b) ** 2)
        res.check(abs(got - want) <= 1e-12, check="coherent overlap", alpha=complex(a), beta=complex(b), got=got)
    for lam in (0.5, 3.0, 16.0):
        for N in (0, 3, 10, 40):
            p = poisson_cdf(N, lam)
            res.check(0.0 <= p <= 1.0, check="poisson cdf range", mean=lam, N=N, value=p)
    for abar in (0.5, 1.0, 2.0):
        mags = np.exp(log_coherent_magnitudes(abar, 30))
        for n in range(0, 11):
            v = circle_projection_check(abar, n)
            want = np.zeros(31)
            want[n] = mags[n]
            err = float(np.max(np.abs(v.amps - want)))
            res.check(err <= 1e-10, check="circle projection", abar=abar, n=n, err=err)
        for n in range(-5, 0):
            v = circle_projection_check(abar, n)
            res.check(math.sqrt(v.norm2) <= 1e-10, check="negative projection", abar=abar, n=n, norm=math.sqrt(v.norm2))
    return res


def gaussian_suite() -> SuiteResult:
    res = SuiteResult("gaussian")
    for g in (1.05, math.sqrt(2.0), 2.0, 3.0, 5.0):
        prev = math.inf
        for mu2 in np.linspace(0.0, 2.0, 21):
            spec = GaussianAmpSpec(g, float(mu2))
            try:
                pfp = pfp_bound(spec)
                res.check(True)
            except ArithmeticError as exc:
                res.check(False, check="pfp = 1/g^2", g=g, mu2=mu2, error=str(exc))
                continue
            F = fidelity_mu(spec)
            res.check(0.0 < F <= 1.0, check="fidelity range", g=g, mu2=mu2, F=F)
            res.check(F <= prev, check="fidelity decreasing in mu2", g=g, mu2=mu2, F=F)
            prev = F
            if mu2 <= 1.0:
                P = success_bound_mu(spec)
                res.check(P <= 1.0 + 1e-15, check="success bound <= 1", g=g, mu2=mu2, P=P, pfp=pfp)
    res.check(abs(cloning_fidelity(2) - 2.0 / 3.0) <= 1e-15, check="two clones", F=cloning_fidelity(2))
    fs = [cloning_fidelity(M) for M in range(1, 201)]
    res.check(all(a > b for a, b in zip(fs, fs[1:])), check="cloning fidelity decreasing")
    res.check(abs(fs[-1] - 0.5) < 2e-3, check="cloning limit", F=fs[-1])
    return res


def usd_suite() -> SuiteResult:
    res = SuiteResult("usd")
    for abar in np.linspace(0.0, 6.0, 25):
        for M in range(2, 41):
            e = SymmetricEnsemble(float(abar), M)
            try:
                sp = usd_success(e)
            except ArithmeticError as exc:
                res.check(False, check="sum q_r = M", abar=abar, M=M, error=str(exc))
                continue
            res.check(True)
            res.check(sp.q.min() <= 1.0 + 1e-12 and sp.q.max() >= 1.0 - 1e-12, check="min q <= 1 <= max q", abar=abar, M=M)
    for abar in (0.3, 1.0, 2.5, 5.0):
        for M in (2, 5, 12):
            e = SymmetricEnsemble(abar, M)
            vec = q_spectrum(e)
            for r in range(M):
                ex = q_r_exact(e, r)
                res.check(abs(vec[r] - ex) <= 1e-10 * max(ex, 1e-300), check="spectrum vs series", abar=abar, M=M, r=r)
    for M in range(2, 13):
        prev = -1.0
        for abar in np.arange(0.0, 6.0 + 1e-9, 0.05):
            p = usd_success(SymmetricEnsemble(float(abar), M)).success
            res.check(p >= prev - 1e-12, check="monotone in abar", M=M, abar=abar, p=p, prev=prev)
            prev = p
    for M in range(2, 11):
        for abar in np.linspace(0.1, 3.0, 15):
            if 2 * M - 1 <= abar * abar:
                continue
            try:
                chernoff_remainder(SymmetricEnsemble(float(abar), M))
                res.check(True)
            except ArithmeticError as exc:
                res.check(False, check="Chernoff remainder", M=M, abar=abar, error=str(exc))
    for g in (1.5, 2.0, 3.0):
        for M in range(2, 7):
            b = amplifier_usd_bound(SymmetricEnsemble(1e-3, M), g)
            d = disk_bound(M, g)
            res.check(abs(b - d) <= 1e-4 * d, check="disk limit", g=g, M=M, bound=b, disk=d)
    for g in (1.5, 3.0):
        for d in (0.0, 0.1, 1.0, 3.0):
            h = helstrom_two(0j, d, g).bound
            u = usd_two(0j, d, g).bound
            res.check(abs(u - h * h) <= 1e-14, check="usd = helstrom^2", g=g, sep=d, helstrom=h, usd=u)
            res.check(u <= 1.0, check="two-state bound <= 1", g=g, sep=d, usd=u)
    for abar in (1.0, 2.0, 3.0):
        for M in (2, 4, 8):
            e = SymmetricEnsemble(abar, M)
            basis = build_reciprocal_basis(e)
            err = float(np.max(np.abs(basis.gram() - np.eye(M))))
            res.check(err <= 1e-8, check="dual basis", abar=abar, M=M, err=err)
            lo = float(failure_spectrum(basis).min())
            res.check(lo >= -1e-10, check="failure operator positive", abar=abar, M=M, min_eig=lo)
            P = usd_success(e).success
            for j, a in enumerate(e.alphas):
                state = coherent(a, basis.cutoff)
                br = usd_amp_apply(basis, e, 2.0, state)
                tot = math.fsum(b.prob for b in br)
                F = branch_fidelity(br, coherent(2.0 * a, br[0].out.cutoff))
                res.check(abs(tot - P) <= 1e-10, check="USD amplifier success", abar=abar, M=M, j=j, p=tot, P=P)
                res.check(F >= 1.0 - 1e-8, check="USD amplifier fidelity", abar=abar, M=M, j=j, F=F)
    return res


def kraus_suite() -> SuiteResult:
    res = SuiteResult("kraus")
    for g, N in KRAUS_FAMILIES:
        spec = AmplifierSpec(g, N)
        p0 = success_prob_extended(spec, 0.0)
        res.check(abs(p0 - g ** (-2 * N)) <= 1e-14 * g ** (-2 * N), check="origin probability", g=g, N=N, p0=p0)
        for abar in np.linspace(0.0, 1.5 * math.sqrt(N), 31):
            abar = float(abar)
            for extended in (True, False):
                p_m, F_m = fidelity_from_state(spec, abar, extended=extended)
                if extended:
                    p_c, F_c = success_prob_extended(spec, abar), fidelity_extended(spec, abar)
                else:
                    p_c, F_c = success_prob_restricted(spec, abar), fidelity_restricted(spec, abar)
                res.check(
                    abs(p_m - p_c) <= 1e-10 * p_c and abs(F_m - F_c) <= 1e-10,
                    check="closed form vs matrix",
                    g=g, N=N, abar=abar, extended=extended, p_matrix=p_m, p_closed=p_c, F_matrix=F_m, F_closed=F_c,
                )
            try:
                pfp_and_do_nothing(spec, abar)
                fidelity_chernoff_bounds(spec, abar)
                res.check(True)
            except ArithmeticError as exc:
                res.check(False, check="do-nothing / Chernoff", g=g, N=N, abar=abar, error=str(exc))
        rep = verify_monotonicity(g, N, range(5), np.linspace(0.0, 1.5 * math.sqrt(N), 16))
        res.checks += rep.checks
        for v in rep.violations:
            res.violations.append({"g": g, "N": N, **{k: _plain(x) for k, x in v.items()}})
        for k in range(4):
            kr = extended_kraus(spec.with_k(k), N + k + 30)
            dev = verify_rotation_covariance(kr, trials=20)
            res.check(dev <= 1e-12, check="rotation covariance", g=g, N=N, k=k, deviation=dev)
    return res


def quasidist_suite() -> SuiteResult:
    res = SuiteResult("quasidist")
    states = [("coherent 1+1j", coherent(1 + 1j))]
    spec = AmplifierSpec(3.0, 9)
    for abar in (0.5, 1.5, 3.0, 5.0):
        states.append((f"g=3 N=9 abar={abar}", amplify_coherent(spec, abar).out))
    for label, st in states:
        m = q_distribution(st).mass
        res.check(0.997 <= m <= 1.0 + 1e-9, check="Q mass", state=label, mass=m)
    for g, N in KRAUS_FAMILIES:
        s = AmplifierSpec(g, N)
        for abar in np.linspace(0.05, 1.5 * math.sqrt(N), 30):
            rep = snr_report(s, float(abar))
            res.check(
                rep.within_bound,
                check="resolvability",
                g=g, N=N, abar=float(abar), root_p_snr1=rep.root_p_snr1, root_p_snr2=rep.root_p_snr2, bound=rep.bound,
            )
    witness = number_snr_witness(3.0, 9)
    res.check(witness is not None, check="number-SNR witness", g=3.0, N=9)
    return res


def number_snr_witness(gain: float, N: int, points: int = 60):
    """First ``abar`` in ``(sqrt(N)/g, sqrt(N))`` where ``sqrt(p) SNR_N`` beats the input ``abar``."""
    spec = AmplifierSpec(gain, N)
    lo, hi = math.sqrt(N) / gain, math.sqrt(N)
    for abar in np.linspace(lo, hi, points + 2)[1:-1]:
        rep = snr_report(spec, float(abar))
        if rep.root_p_snr_n > abar:
            return float(abar), rep.root_p_snr_n
    return None


SUITES = {
    "fock": fock_suite,
    "gaussian": gaussian_suite,
    "usd": usd_suite,
    "kraus": kraus_suite,
    "quasidist": quasidist_suite,
}


def run_suites(names=None) -> list[SuiteResult]:
    names = list(SUITES) if not names else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suites: {', '.join(unknown)}")
    return [SUITES[n]() for n in names]
