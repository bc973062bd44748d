"""Constancy, cumulant-bound quantities and seeded random parameter sweeps."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterator, NamedTuple, Union

from .efficiency import current_ratio_efficiency, efficiency_cumulants
from .engine import PRESETS, EngineParams, derived_quantities
from .errors import DegenerateDenominator, PoleAtCarnot, QhefcsError
from .generator import ParticleCold, heat_family, work_family
from .spectral import zero_field_expansion

__all__ = [
    "SplitMix64",
    "SweepRanges",
    "SweepRecord",
    "WorkHeat",
    "RANGES",
    "CSV_FIELDS",
    "particle_cumulants_cold",
    "constancy",
    "work_heat_cumulants",
    "bound_record",
    "draw_params",
    "random_sweep",
]

POLE_TOL = 1e-12
DENOMINATOR_TOL = 1e-10
MASK64 = (1 << 64) - 1


class SplitMix64:
    """Single-stream SplitMix64; ``uniform`` takes the top 53 bits."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53


@dataclass(frozen=True)
class SweepRanges:
    """Closed sampling intervals. With ``T_h_relative`` the T_h interval is an
    offset added to the drawn T_c."""

    p_c: tuple[float, float] = (0.0, 1.0)
    p_h: tuple[float, float] = (0.0, 1.0)
    T_c: tuple[float, float] = (0.3, 0.7)
    T_h: tuple[float, float] = (0.2, 0.5)
    T_l: tuple[float, float] = (2.0, 7.0)
    T_h_relative: bool = True

    def check(self) -> None:
        for f in ("p_c", "p_h", "T_c", "T_h", "T_l"):
            lo, hi = getattr(self, f)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ValueError(f"range {f} = ({lo}, {hi}) is not well ordered")


_BOX_6_8 = SweepRanges()
RANGES: dict[str, SweepRanges] = {
    "fig5": SweepRanges(T_c=(0.3, 0.9), T_h=(0.9, 1.6), T_l=(2.0, 5.0), T_h_relative=False),
    "fig6": _BOX_6_8,
    "fig7": _BOX_6_8,
    "fig8": _BOX_6_8,
}

CSV_FIELDS = (
    "index", "p_c", "p_h", "T_c", "T_h", "T_l", "eta_C", "eta_e_eq10", "eta_star",
    "j1", "j2", "W1", "W2", "Qh1", "Qh2", "tilde1", "tilde2", "eta1", "eta2",
    "C_N", "bound19", "bound20", "diff21", "error",
)

nan = math.nan


@dataclass(frozen=True)
class SweepRecord:
    index: int
    p_c: float
    p_h: float
    T_c: float
    T_h: float
    T_l: float
    eta_C: float = nan
    eta_e_eq10: float = nan
    eta_star: float = nan
    j1: float = nan
    j2: float = nan
    W1: float = nan
    W2: float = nan
    Qh1: float = nan
    Qh2: float = nan
    tilde1: float = nan
    tilde2: float = nan
    eta1: float = nan
    eta2: float = nan
    C_N: float = nan
    bound19: float = nan
    bound20: float = nan
    diff21: float = nan
    error: str = ""
    # not part of the CSV schema
    eta: float = nan
    eta1_o: float = nan
    eta2_o: float = nan

    @property
    def K1(self) -> float:
        return self.eta1 / self.eta1_o if self.eta1_o != 0 else nan

    @property
    def K2(self) -> float:
        return self.eta2 / self.eta2_o if self.eta2_o != 0 else nan

    def row(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in CSV_FIELDS}


def particle_cumulants_cold(p: EngineParams) -> tuple[float, float]:
    """Mean and variance rate of photons emitted into the cold bath."""
    return zero_field_expansion(p).family_cumulants(ParticleCold)


def constancy(p: EngineParams, eta: float) -> float:
    """Normalised constancy ``(T_c j1/(j2 W)) * 2 eta/(eta_C - eta)``."""
    d = derived_quantities(p)
    if abs(d.eta_C - eta) < POLE_TOL:
        raise PoleAtCarnot(f"constancy has a pole at eta = eta_C = {d.eta_C:.17g}")
    j1, j2 = particle_cumulants_cold(p)
    return (p.T_c * j1 / (j2 * d.W)) * (2.0 * eta / (d.eta_C - eta))


class WorkHeat(NamedTuple):
    W1: float
    W2: float
    Qh1: float
    Qh2: float
    tilde1: float
    tilde2: float


def work_heat_cumulants(p: EngineParams) -> WorkHeat:
    """Work and hot-heat cumulants from the energy-conjugate single-field
    families, and their ratios. Raises :class:`DegenerateDenominator` (with
    ``.cumulants`` attached) when the heat current vanishes."""
    exp = zero_field_expansion(p)
    W1, W2 = exp.family_cumulants(work_family)
    Qh1, Qh2 = exp.family_cumulants(heat_family)
    if abs(Qh1) <= DENOMINATOR_TOL * abs(Qh2) or Qh2 == 0.0:
        err = DegenerateDenominator(f"heat cumulants vanish (Qh1 = {Qh1:.3e}, Qh2 = {Qh2:.3e})")
        err.cumulants = (W1, W2, Qh1, Qh2)
        raise err
    return WorkHeat(W1, W2, Qh1, Qh2, W1 / Qh1, W2 / Qh2)


EtaRule = Union[None, float, str]


def _resolve_eta(rule: EtaRule, eta_C: float, eta_star: float) -> float:
    if rule is None or rule == "eta_star":
        return eta_star
    if rule == "carnot":
        return eta_C
    if isinstance(rule, str):
        raise ValueError(f"unknown eta rule {rule!r}")
    return float(rule)


def _tag(err: Exception) -> str:
    return type(err).__name__


def bound_record(p: EngineParams, eta: EtaRule = None, index: int = 0) -> SweepRecord:
    """Every SweepRecord field for one parameter point.

    ``eta`` is a number, ``"carnot"`` or ``None``/``"eta_star"`` (the default,
    taken as the mean-current ratio). Failures never propagate: the affected
    fields stay NaN and ``error`` lists ``field:ErrorType`` entries.
    """
    vals: dict = dict(index=index, p_c=p.p_c, p_h=p.p_h, T_c=p.T_c, T_h=p.T_h, T_l=p.T_l)
    errors: list[str] = []
    try:
        d = derived_quantities(p)
    except QhefcsError as e:
        return SweepRecord(**vals, error=f"params:{_tag(e)}")
    vals.update(eta_C=d.eta_C, eta_e_eq10=d.eta_e)

    try:
        vals["eta_star"] = current_ratio_efficiency(p)
        j1, j2 = particle_cumulants_cold(p)
        vals.update(j1=j1, j2=j2)
    except QhefcsError as e:
        return SweepRecord(**vals, error=f"spectral:{_tag(e)}")

    try:
        wh = work_heat_cumulants(p)
        vals.update(wh._asdict())
        vals["bound19"] = wh.tilde2 - wh.tilde1**2
    except DegenerateDenominator as e:
        W1, W2, Qh1, Qh2 = e.cumulants
        vals.update(W1=W1, W2=W2, Qh1=Qh1, Qh2=Qh2)
        errors.append(f"tilde:{_tag(e)}")

    x = _resolve_eta(eta, d.eta_C, vals["eta_star"])
    vals["eta"] = x
    try:
        ec = efficiency_cumulants(p, x)
        vals.update(eta1=ec.eta1, eta2=ec.eta2, eta1_o=ec.eta1_o, eta2_o=ec.eta2_o)
        vals["bound20"] = ec.eta2 - ec.eta1**2
        vals["diff21"] = ec.eta2 - ec.eta1
    except QhefcsError as e:
        errors.append(f"eta:{_tag(e)}")

    try:
        vals["C_N"] = constancy(p, x)
    except QhefcsError as e:
        errors.append(f"C_N:{_tag(e)}")
    return SweepRecord(**vals, error=";".join(errors))


def draw_params(rng: SplitMix64, ranges: SweepRanges, template: EngineParams) -> EngineParams:
    """Five consecutive uniforms mapped to (p_c, p_h, T_c, T_h, T_l)."""
    u = [rng.uniform() for _ in range(5)]

    def scale(k: int, bounds: tuple[float, float]) -> float:
        lo, hi = bounds
        return lo + u[k] * (hi - lo)

    T_c = scale(2, ranges.T_c)
    T_h = scale(3, ranges.T_h) + (T_c if ranges.T_h_relative else 0.0)
    return template.replace(p_c=scale(0, ranges.p_c), p_h=scale(1, ranges.p_h), T_c=T_c, T_h=T_h, T_l=scale(4, ranges.T_l))


def _evaluate(job: tuple) -> SweepRecord:
    index, p, eta = job
    return bound_record(p, eta=eta, index=index)


def random_sweep(
    ranges: SweepRanges | None = None,
    N: int = 1,
    seed: int = 42,
    template: EngineParams | None = None,
    eta: EtaRule = None,
    workers: int | None = None,
) -> Iterator[SweepRecord]:
    """Seeded sweep yielding records in draw order.

    Draws are generated sequentially from one SplitMix64 stream; evaluation is
    spread over ``workers`` processes (default: CPU count, 1 for small N).
    Output does not depend on ``workers``.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    ranges = RANGES["fig7"] if ranges is None else ranges
    ranges.check()
    template = PRESETS["fig2"] if template is None else template
    rng = SplitMix64(seed)
    jobs = [(i, draw_params(rng, ranges, template), eta) for i in range(N)]
    if workers is None:
        workers = 1 if N < 200 else min(os.cpu_count() or 1, 8)
    if workers <= 1:
        yield from map(_evaluate, jobs)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(_evaluate, jobs, chunksize=max(1, N // (8 * workers)))
