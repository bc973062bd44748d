"""Efficiency-resolved statistics: large-deviation function, most likely
efficiency, efficiency cumulants and the coherent/incoherent cumulant ratio."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .engine import EngineParams, derived_quantities
from .errors import InconsistentMinimum, NoBracket
from .generator import EfficiencyTracking, ParticleCold, efficiency_family, heat_family, work_family
from .spectral import cgf, cgf_cumulants, zero_field_expansion

__all__ = [
    "LdfPoint",
    "NearEqForm",
    "MostLikely",
    "EfficiencyCumulants",
    "CoherenceRatio",
    "golden_section",
    "efficiency_cgf",
    "ldf",
    "ldf_curve",
    "efficiency_grid",
    "current_ratio_efficiency",
    "most_likely_efficiency",
    "efficiency_cumulants",
    "coherence_ratio",
    "near_equilibrium_s1",
]

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
SCAN_POINTS = 63
LAMBDA_TOL = 1e-10
ETA_TOL = 1e-10
MAX_DOUBLINGS = 2
ARGMIN_AGREEMENT = 1e-6
VANISHING = 1e-9
MAX_WINDOW_SHRINKS = 12


def golden_section(f, a: float, b: float, tol: float = 1e-10, max_iter: int = 200) -> tuple[float, float]:
    """Minimise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    fx = f(x)
    # the endpoints already evaluated may beat the midpoint on a flat floor
    return min((fx, x), (fc, c), (fd, d))[::-1]


def efficiency_cgf(p: EngineParams, lam: float, eta: float) -> float:
    return cgf(p, EfficiencyTracking(lam, eta))


def _bounded_min(f, Lam: float) -> tuple[float, float, bool]:
    """Minimum of convex ``f`` on ``[-Lam, Lam]``: ``(lam*, f(lam*), at_edge)``."""
    grid = np.linspace(-Lam, Lam, SCAN_POINTS)
    values = [f(x) for x in grid]
    k = int(np.argmin(values))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, SCAN_POINTS - 1)]
    lam, s = golden_section(f, lo, hi, tol=LAMBDA_TOL)
    if values[k] < s:
        lam, s = grid[k], values[k]
    at_edge = k in (0, SCAN_POINTS - 1) and abs(abs(lam) - Lam) < 1e-6 * Lam
    return float(lam), float(s), at_edge


def _initial_lambda(p: EngineParams) -> float:
    d = derived_quantities(p)
    return 5.0 / max(d.Q_h, d.W)


@dataclass(frozen=True)
class LdfPoint:
    eta: float
    lambda_star: float
    I: float
    I0: float


def _ldf_value(p: EngineParams, eta: float, Lam: float | None, strict: bool) -> tuple[float, float]:
    def S(lam: float) -> float:
        return efficiency_cgf(p, lam, eta)

    Lam = _initial_lambda(p) if Lam is None else Lam
    for attempt in range(MAX_DOUBLINGS + 1):
        lam, s, at_edge = _bounded_min(S, Lam)
        if not (strict and at_edge):
            return lam, -s
        if attempt < MAX_DOUBLINGS:
            Lam *= 2.0
    raise NoBracket(f"no interior minimum of S(lam, {eta:g} lam) within |lam| <= {Lam:g}")


def ldf(
    p: EngineParams,
    eta: float,
    with_incoherent: bool = True,
    Lam: float | None = None,
    strict: bool = True,
) -> LdfPoint:
    """Efficiency large-deviation function ``I(eta) = -min_lam S(lam, eta lam)``.

    A 63-point scan over ``[-Lam, Lam]`` brackets the minimiser, golden-section
    search refines it. With ``strict`` the window doubles (at most twice) while
    the minimum sits on its edge and then raises :class:`NoBracket`; without it
    the constrained minimum over the initial window is returned. ``I0`` repeats
    the computation with both coherences switched off.
    """
    lam, I = _ldf_value(p, eta, Lam, strict)
    I0 = math.nan
    if with_incoherent:
        I0 = _ldf_value(p.incoherent(), eta, Lam, strict)[1]
    return LdfPoint(eta=eta, lambda_star=lam, I=I, I0=I0)


def efficiency_grid(p: EngineParams, n: int = 201, upper: float | None = None) -> np.ndarray:
    """Uniform grid on ``[0, 1.2 eta_C]`` (or ``[0, upper]``)."""
    d = derived_quantities(p)
    return np.linspace(0.0, 1.2 * d.eta_C if upper is None else upper, n)


def ldf_curve(p: EngineParams, etas: Sequence[float], with_incoherent: bool = True) -> list[LdfPoint]:
    """LDF over a grid; points without a bracket are reported as NaN."""
    out = []
    for eta in etas:
        try:
            out.append(ldf(p, float(eta), with_incoherent=with_incoherent))
        except NoBracket:
            out.append(LdfPoint(float(eta), math.nan, math.nan, math.nan))
    return out


def current_ratio_efficiency(p: EngineParams) -> float:
    """Mean work current over mean heat current drawn from the hot bath.

    Both first cumulants come from energy-conjugate single-field families. The
    hot field counts emissions into the bath, so the absorbed heat current is
    minus its first cumulant.
    """
    exp = zero_field_expansion(p)
    work1 = exp.family_cumulants(work_family)[0]
    heat1 = exp.family_cumulants(heat_family)[0]
    return work1 / (-heat1)


class MostLikely(NamedTuple):
    eta_star: float
    eta_e_eq10: float


def most_likely_efficiency(p: EngineParams, n_grid: int = 201) -> MostLikely:
    """Argmin of the LDF, cross-checked against the current ratio.

    The engine is tightly coupled, so away from the most likely efficiency the
    unconstrained LDF is flat and the zero is isolated. With the tracking
    field held to a window ``|lam| <= Lam`` the LDF becomes a well of half-width
    about ``|mu*|/(Q_h Lam)`` around the same argmin; the window shrinks by 4x
    until at least three grid points fall inside the well, then golden-section
    search refines between the neighbours of the grid argmin.

    Raises :class:`InconsistentMinimum` when the argmin and the current ratio
    differ by more than 1e-6.
    """
    d = derived_quantities(p)
    etas = efficiency_grid(p, n_grid, upper=1.2 * max(d.eta_C, d.eta_e))
    Lam = _initial_lambda(p)
    for _ in range(MAX_WINDOW_SHRINKS):

        def I(eta: float, Lam=Lam) -> float:
            return _ldf_value(p, eta, Lam, strict=False)[1]

        values = np.array([I(e) for e in etas])
        top = values.max()
        if np.count_nonzero(values < top - 1e-6 * abs(top)) >= 3:
            break
        Lam /= 4.0
    k = int(np.argmin(values))
    lo, hi = etas[max(k - 1, 0)], etas[min(k + 1, len(etas) - 1)]
    eta_star, _ = golden_section(I, lo, hi, tol=ETA_TOL)

    ratio = current_ratio_efficiency(p)
    if not abs(eta_star - ratio) <= ARGMIN_AGREEMENT:
        raise InconsistentMinimum(f"LDF argmin {eta_star:.12g} vs current ratio {ratio:.12g}")
    return MostLikely(eta_star=float(eta_star), eta_e_eq10=d.eta_e)


class EfficiencyCumulants(NamedTuple):
    eta1: float
    eta2: float
    eta1_o: float
    eta2_o: float


def efficiency_cumulants(p: EngineParams, eta: float, method: str = "perturbative") -> EfficiencyCumulants:
    """First two cumulants of ``S(lam, eta lam)`` with and without coherences."""
    fam = efficiency_family(eta)
    coh = cgf_cumulants(p, fam, method=method)
    inc = cgf_cumulants(p.incoherent(), fam, method=method)
    return EfficiencyCumulants(coh.c1, coh.c2, inc.c1, inc.c2)


@dataclass(frozen=True)
class CoherenceRatio:
    etas: tuple[float, ...]
    K1: tuple[float, ...]
    K2: tuple[float, ...]
    # (eta, order) pairs whose incoherent cumulant vanished
    flagged: tuple[tuple[float, int], ...]
    spread1: float
    spread2: float


def _spread(values: Sequence[float]) -> float:
    finite = [v for v in values if math.isfinite(v)]
    if not finite:
        return math.nan
    mean = abs(sum(finite) / len(finite))
    return (max(finite) - min(finite)) / mean if mean > 0 else math.inf


def coherence_ratio(p: EngineParams, etas: Sequence[float]) -> CoherenceRatio:
    """``K(i) = eta(i)/eta_o(i)`` per efficiency, with its relative spread.

    An incoherent cumulant counts as vanishing when it is below 1e-9 of the
    magnitude its hot and cold contributions would have separately; that
    entry is flagged and reported as NaN, the others are unaffected.
    """
    d = derived_quantities(p)
    inc = zero_field_expansion(p.incoherent())
    j1_o, j2_o = inc.family_cumulants(ParticleCold)
    K1, K2, flagged = [], [], []
    for eta in etas:
        e = efficiency_cumulants(p, eta)
        span = d.Q_h * abs(eta) + d.W
        scales = (abs(j1_o) * span, abs(j2_o) * span**2)
        ratios = []
        for order, (num, den, scale) in enumerate(
            ((e.eta1, e.eta1_o, scales[0]), (e.eta2, e.eta2_o, scales[1])), start=1
        ):
            if abs(den) <= VANISHING * scale:
                flagged.append((float(eta), order))
                ratios.append(math.nan)
            else:
                ratios.append(num / den)
        K1.append(ratios[0])
        K2.append(ratios[1])
    return CoherenceRatio(
        etas=tuple(float(e) for e in etas),
        K1=tuple(K1),
        K2=tuple(K2),
        flagged=tuple(flagged),
        spread1=_spread(K1),
        spread2=_spread(K2),
    )


@dataclass(frozen=True)
class NearEqForm:
    t1: float
    t2: float
    S1_slope: float

    @property
    def radicand(self) -> float:
        return self.t1 + math.sqrt(self.t2 + self.t1**2)


def _near_eq_terms(n_h: float, nt_h: float, nt_c: float, p_c: float, p_h: float) -> tuple[float, float]:
    t1 = -(nt_c**2) * (p_c**2 + 1.0) - n_h * nt_h * (p_h**2 + 1.0)
    t2 = 4.0 * nt_c**2 * n_h * nt_h * (p_c - p_h) ** 2
    return t1, t2


def near_equilibrium_s1(p: EngineParams, eta: float) -> NearEqForm:
    """Closed-form first-order eigenvalue slope of the linearised generator."""
    d = derived_quantities(p)
    t1, t2 = _near_eq_terms(d.n_h, d.nt_h, d.nt_c, p.p_c, p.p_h)
    radicand = max(t1 + math.sqrt(t2 + t1 * t1), 0.0)
    return NearEqForm(t1=t1, t2=t2, S1_slope=eta * d.Q_h * p.r * math.sqrt(radicand))
