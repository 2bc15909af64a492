"""Closed-form pillbox cavity spectrum and spectrum matching.

A pillbox cavity of radius R and length L has the well-known mode families

  TM(m, nu, pi):  omega/c0 = sqrt((j_{m,nu}/R)^2  + (pi_idx*pi/L)^2),  pi_idx >= 0
  TE(m, nu, pi):  omega/c0 = sqrt((j'_{m,nu}/R)^2 + (pi_idx*pi/L)^2),  pi_idx >= 1

with j_{m,nu} (j'_{m,nu}) the nu-th positive zero of the Bessel function
J_m (of its derivative).  Bessel values come from a power series for small
arguments and Miller's downward recurrence elsewhere; zeros from a sign
scan plus bisection.  Tabulated range: m <= 5, nu <= 5, arguments <= 60.

For the n-th azimuthal block of the eigensolver the relevant analytic
modes are those with m = |n|; TE modes of the n = 0 block live in the
azimuthal (scalar) sub-problem and TM modes in the in-plane one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "AnalyticMode",
    "MatchReport",
    "bessel_j",
    "bessel_j_prime",
    "bessel_zero",
    "bessel_prime_zero",
    "pillbox_spectrum",
    "group_modes",
    "match_spectra",
    "estimate_match_tol",
    "export_modes_csv",
]

_MAX_ORDER = 10
_MAX_ARG = 60.0
_ZERO_MAX_M = 5
_ZERO_MAX_NU = 5


def _series(m: int, x: float) -> float:
    half = 0.5 * x
    term = half**m / math.factorial(m)
    total = term
    for k in range(1, 200):
        term *= -(half * half) / (k * (k + m))
        total += term
        if abs(term) < 1e-18 * abs(total) + 1e-300:
            break
    return total


def _miller(m: int, x: float) -> float:
    start = int(x) + 40
    if start % 2:
        start += 1
    bkp1, bk = 0.0, 1e-30
    wanted = 0.0
    norm = 0.0
    for k in range(start, 0, -1):
        bkm1 = (2.0 * k / x) * bk - bkp1
        bkp1, bk = bk, bkm1
        if abs(bk) > 1e250:
            bk *= 1e-250
            bkp1 *= 1e-250
            wanted *= 1e-250
            norm *= 1e-250
        idx = k - 1
        if idx == m:
            wanted = bk
        if idx >= 2 and idx % 2 == 0:
            norm += 2.0 * bk
    norm += bk  # J_0 contribution
    return wanted / norm


def bessel_j(m: int, x: float) -> float:
    """Bessel function of the first kind, 0 <= m <= 10, 0 <= x <= 60."""
    if not (0 <= m <= _MAX_ORDER):
        raise ValueError(f"order out of supported range: {m}")
    if not (0.0 <= x <= _MAX_ARG):
        raise ValueError(f"argument out of supported range: {x}")
    if x == 0.0:
        return 1.0 if m == 0 else 0.0
    if x < 10.0:
        return _series(m, x)
    return _miller(m, x)


def bessel_j_prime(m: int, x: float) -> float:
    if m == 0:
        return -bessel_j(1, x)
    return 0.5 * (bessel_j(m - 1, x) - bessel_j(m + 1, x))


def _scan_zeros(f, lo: float, hi: float, count: int, step: float = 0.02):
    zeros = []
    x0 = lo
    f0 = f(x0)
    while x0 < hi and len(zeros) < count:
        x1 = min(x0 + step, hi)
        f1 = f(x1)
        if f0 == 0.0:
            zeros.append(x0)
        elif f0 * f1 < 0.0:
            a, b, fa = x0, x1, f0
            for _ in range(100):
                mid = 0.5 * (a + b)
                fm = f(mid)
                if fa * fm <= 0.0:
                    b = mid
                else:
                    a, fa = mid, fm
                if b - a < 1e-15:
                    break
            zeros.append(0.5 * (a + b))
        x0, f0 = x1, f1
    return zeros


@lru_cache(maxsize=None)
def bessel_zero(m: int, nu: int) -> float:
    """nu-th positive zero of J_m to about 1e-13 absolute."""
    if not (0 <= m <= _ZERO_MAX_M):
        raise ValueError(f"Bessel zero order out of tabulated range: m={m}")
    if not (1 <= nu <= _ZERO_MAX_NU):
        raise ValueError(f"Bessel zero index out of tabulated range: nu={nu}")
    zeros = _scan_zeros(lambda x: bessel_j(m, x), 0.05, 40.0, nu)
    if len(zeros) < nu:
        raise RuntimeError(f"failed to bracket zero {nu} of J_{m}")
    return zeros[nu - 1]


@lru_cache(maxsize=None)
def bessel_prime_zero(m: int, nu: int) -> float:
    """nu-th positive zero of J_m' (the zero at x = 0 is not counted)."""
    if not (0 <= m <= _ZERO_MAX_M):
        raise ValueError(f"Bessel zero order out of tabulated range: m={m}")
    if not (1 <= nu <= _ZERO_MAX_NU):
        raise ValueError(f"Bessel zero index out of tabulated range: nu={nu}")
    zeros = _scan_zeros(lambda x: bessel_j_prime(m, x), 0.05, 40.0, nu)
    if len(zeros) < nu:
        raise RuntimeError(f"failed to bracket zero {nu} of J_{m}'")
    return zeros[nu - 1]


@dataclass(frozen=True)
class AnalyticMode:
    family: str  # "TM" or "TE"
    m: int
    nu: int
    pi_idx: int
    omega: float  # omega / c0

    @property
    def lam(self) -> float:
        return self.omega**2

    @property
    def mode_id(self) -> str:
        return f"{self.family}{self.m}{self.nu}{self.pi_idx}"


def pillbox_spectrum(R: float, L: float, n: int, lam_max: float,
                     families=("TM", "TE")) -> list:
    """All modes with azimuthal index |n| and omega^2 <= lam_max, sorted."""
    if R <= 0 or L <= 0:
        raise ValueError("R and L must be positive")
    m = abs(int(n))
    modes = []
    for family in families:
        zero_fn = bessel_zero if family == "TM" else bessel_prime_zero
        pi_min = 0 if family == "TM" else 1
        for nu in range(1, _ZERO_MAX_NU + 1):
            base = (zero_fn(m, nu) / R) ** 2
            if base > lam_max:
                break
            pi_idx = pi_min
            while True:
                lam = base + (pi_idx * math.pi / L) ** 2
                if lam > lam_max:
                    break
                modes.append(AnalyticMode(family, m, nu, pi_idx, math.sqrt(lam)))
                pi_idx += 1
        else:
            if (zero_fn(m, _ZERO_MAX_NU) / R) ** 2 <= lam_max:
                raise ValueError(
                    "spectrum window exceeds the tabulated Bessel-zero range"
                )
    modes.sort(key=lambda md: (md.omega, md.family, md.nu, md.pi_idx))
    return modes


def group_modes(modes, rtol: float = 1e-9):
    """Group modes with (relatively) equal frequency; returns (omega, [modes])."""
    groups = []
    for md in modes:
        if groups and abs(md.omega - groups[-1][0]) <= rtol * groups[-1][0]:
            groups[-1][1].append(md)
        else:
            groups.append((md.omega, [md]))
    return groups


@dataclass
class MatchReport:
    pairs: list  # (computed omega, AnalyticMode)
    spurious: list  # computed omegas with no analytic partner
    missed: list  # analytic modes with no computed partner

    @property
    def spurious_count(self) -> int:
        return len(self.spurious)


def match_spectra(computed_lams, analytic_modes, rel_tol: float) -> MatchReport:
    """Greedy in-order matching of sorted spectra on omega = sqrt(lambda).

    Analytic modes with (numerically) equal frequencies form one group whose
    capacity is its multiplicity.  Computed values that fit no group within
    rel_tol are spurious; undersubscribed groups are missed.
    """
    computed = np.sqrt(np.sort(np.asarray(computed_lams, dtype=float)))
    groups = group_modes(sorted(analytic_modes, key=lambda md: md.omega))
    capacity = [len(g[1]) for g in groups]
    taken = [0] * len(groups)
    pairs, spurious = [], []
    gi = 0
    for om in computed:
        while gi < len(groups) and (
            taken[gi] >= capacity[gi] or groups[gi][0] * (1 + rel_tol) < om
        ):
            gi += 1
        if gi < len(groups) and abs(om - groups[gi][0]) <= rel_tol * groups[gi][0]:
            pairs.append((om, groups[gi][1][taken[gi]]))
            taken[gi] += 1
        else:
            spurious.append(float(om))
    missed = []
    for g, (omega, mds) in enumerate(groups):
        missed.extend(mds[taken[g]:])
    return MatchReport(pairs=pairs, spurious=spurious, missed=missed)


def estimate_match_tol(computed_lams, analytic_modes, factor: float = 10.0,
                       floor: float = 1e-6, cap: float = 0.05) -> float:
    """Mesh-dependent matching tolerance.

    The error estimate is the largest nearest-neighbor relative frequency
    distance from an analytic mode to the computed spectrum, capped so a
    genuinely missing mode cannot balloon the tolerance; the tolerance is
    'factor' times that estimate with an absolute floor.
    """
    computed = np.sqrt(np.asarray(computed_lams, dtype=float))
    if computed.size == 0:
        return cap
    est = 0.0
    for md in analytic_modes:
        est = max(est, np.min(np.abs(computed - md.omega)) / md.omega)
    return float(max(floor, factor * min(est, cap / factor)))


def export_modes_csv(modes, path) -> None:
    """CSV table: family, m, nu, pi_idx, omega_over_c0, multiplicity."""
    groups = group_modes(modes)
    with open(path, "w") as fh:
        fh.write("family,m,nu,pi_idx,omega_over_c0,multiplicity\n")
        for omega, mds in groups:
            mult = len(mds)
            for md in mds:
                fh.write(
                    f"{md.family},{md.m},{md.nu},{md.pi_idx},{md.omega:.17g},{mult}\n"
                )
