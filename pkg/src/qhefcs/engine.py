"""Physical parameters of the four-level engine and the quantities derived from them.

Units are k_B = hbar = 1 everywhere: energies and temperatures share one unit,
rates are in inverse time of the same system.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import DomainError, InvalidParameters

__all__ = [
    "EngineParams",
    "DerivedQuantities",
    "ValidationReport",
    "PRESETS",
    "validate_params",
    "bose_occupation",
    "derived_quantities",
    "equilibrium_hot_temperature",
]


@dataclass(frozen=True)
class EngineParams:
    eps1: float
    eps2: float
    eps_a: float
    eps_b: float
    T_c: float
    T_h: float
    T_l: float
    g: float
    r: float
    p_c: float
    p_h: float

    def with_coherences(self, p_c: float, p_h: float) -> "EngineParams":
        return dataclasses.replace(self, p_c=p_c, p_h=p_h)

    def incoherent(self) -> "EngineParams":
        """Same engine with both coherence parameters switched off."""
        return self.with_coherences(0.0, 0.0)

    def replace(self, **changes) -> "EngineParams":
        return dataclasses.replace(self, **changes)

    def as_tuple(self) -> tuple:
        return dataclasses.astuple(self)

    def fingerprint(self) -> str:
        text = ",".join(f"{v:.17g}" for v in self.as_tuple())
        return hashlib.sha1(text.encode()).hexdigest()[:12]


# "fig1" is the reference engine; "fig2" lowers eps_b to 0.4 and is the
# default template elsewhere. fig2 reuses the fig1 temperatures, and both use
# coherence strengths (0.3, 0.7).
PRESETS: dict[str, EngineParams] = {
    "fig1": EngineParams(
        eps1=0.1, eps2=0.1, eps_a=1.5, eps_b=0.5,
        T_c=0.3, T_h=0.9, T_l=2.0, g=1.0, r=0.7, p_c=0.3, p_h=0.7,
    ),
    "fig2": EngineParams(
        eps1=0.1, eps2=0.1, eps_a=1.5, eps_b=0.4,
        T_c=0.3, T_h=0.9, T_l=2.0, g=1.0, r=0.7, p_c=0.3, p_h=0.7,
    ),
    # fig2 energies at the midpoint of the constancy-study temperature ranges
    "fig5": EngineParams(
        eps1=0.1, eps2=0.1, eps_a=1.5, eps_b=0.4,
        T_c=0.6, T_h=1.25, T_l=3.5, g=1.0, r=0.7, p_c=0.3, p_h=0.7,
    ),
}


@dataclass(frozen=True)
class ValidationReport:
    failures: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.ok

    def raise_if_failed(self) -> None:
        if self.failures:
            raise InvalidParameters(self.failures)


def validate_params(p: EngineParams) -> ValidationReport:
    """Check every invariant of ``p`` and report all violations at once."""
    failures = []
    values = p.as_tuple()
    if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in values):
        return ValidationReport(("finite values",))
    if not p.T_c > 0:
        failures.append("T_c > 0")
    if not p.T_h > p.T_c:
        failures.append("T_h > T_c")
    if not p.T_l > 0:
        failures.append("T_l > 0")
    if not p.g > 0:
        failures.append("g > 0")
    if not p.r > 0:
        failures.append("r > 0")
    if p.eps1 != p.eps2:
        failures.append("degeneracy")
    if not p.eps_a > p.eps_b:
        failures.append("eps_a > eps_b")
    if not p.eps_b > p.eps1:
        failures.append("eps_b > eps1")
    if not 0.0 <= p.p_c <= 1.0:
        failures.append("0 <= p_c <= 1")
    if not 0.0 <= p.p_h <= 1.0:
        failures.append("0 <= p_h <= 1")
    return ValidationReport(tuple(failures))


def bose_occupation(eps: float, T: float) -> float:
    """Thermal photon number 1/(exp(eps/T) - 1)."""
    if not eps > 0:
        raise DomainError(f"bose_occupation needs eps > 0, got {eps!r}")
    if not T > 0:
        raise DomainError(f"bose_occupation needs T > 0, got {T!r}")
    x = eps / T
    if x > 700.0:
        # expm1 overflows; exp(-x) is exact to double precision here
        return math.exp(-x)
    return 1.0 / math.expm1(x)


def _log_nt_over_n(n: float) -> float:
    # ln((1 + n)/n) without cancellation for small or large n
    return math.log1p(1.0 / n)


@dataclass(frozen=True)
class DerivedQuantities:
    n_h: float
    n_c: float
    n_l: float
    nt_h: float
    nt_c: float
    nt_l: float
    n_sum: float
    y: float
    Q_h: float
    Q_c: float
    W: float
    eta_C: float
    eta_e: float
    lnF: float
    params: EngineParams = field(repr=False, compare=False)


@lru_cache(maxsize=4096)
def _derive(p: EngineParams) -> DerivedQuantities:
    n_h = bose_occupation(p.eps_a - p.eps1, p.T_h)
    n_c = bose_occupation(p.eps_b - p.eps1, p.T_c)
    n_l = bose_occupation(p.eps_a - p.eps_b, p.T_l)
    Q_h = p.eps_a - p.eps1
    Q_c = p.eps_b - p.eps1
    log_l = _log_nt_over_n(n_l)
    W = (p.eps_a - p.eps_b) + p.T_c * log_l
    return DerivedQuantities(
        n_h=n_h,
        n_c=n_c,
        n_l=n_l,
        nt_h=1.0 + n_h,
        nt_c=1.0 + n_c,
        nt_l=1.0 + n_l,
        n_sum=n_c + n_h,
        y=n_c * p.p_c + n_h * p.p_h,
        Q_h=Q_h,
        Q_c=Q_c,
        W=W,
        eta_C=1.0 - p.T_c / p.T_h,
        eta_e=W / Q_h,
        lnF=Q_h / p.T_h - Q_c / p.T_c - log_l,
        params=p,
    )


def derived_quantities(p: EngineParams) -> DerivedQuantities:
    """Occupations, heats, useful work, efficiencies and affinity of ``p``.

    ``W`` is the useful work per emitted quantum,
    ``(eps_a - eps_b) + T_c ln(nt_l/n_l)``, and ``eta_e = W/Q_h``.
    Results are cached per parameter set; downstream code should pass the
    returned object around rather than recompute occupations.
    """
    validate_params(p).raise_if_failed()
    return _derive(p)


def equilibrium_hot_temperature(p: EngineParams) -> float:
    """Hot temperature at which the affinity ``lnF`` vanishes for ``p``."""
    Q_h = p.eps_a - p.eps1
    Q_c = p.eps_b - p.eps1
    return Q_h / (Q_c / p.T_c + (p.eps_a - p.eps_b) / p.T_l)
