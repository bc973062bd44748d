"""Twisted (counting-field dressed) generator of the engine.

State ordering is ``(rho_11, rho_22, rho_aa, rho_bb, Re rho_12)``. The hot
counting field ``lambda_q`` dresses every hot-bath transition and the cold
field ``lambda_w`` every cold-bath transition; cavity transitions carry no
field. A factor ``exp(+lambda)`` marks a photon emitted into the bath,
``exp(-lambda)`` one absorbed from it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, partial
from typing import Callable, Union

import numpy as np

from .engine import DerivedQuantities, EngineParams, derived_quantities

__all__ = [
    "RawFields",
    "EnergyConjugate",
    "EfficiencyTracking",
    "ParticleCold",
    "ParticleHot",
    "CountingMode",
    "Family",
    "efficiency_family",
    "heat_family",
    "work_family",
    "family_direction",
    "GeneratorTerms",
    "TiltedGenerator",
    "LinearizedGenerator",
    "generator_terms",
    "build_generator",
    "build_linearized",
]

DIM = 5
POPULATIONS = slice(0, 4)


@dataclass(frozen=True)
class RawFields:
    """Bare fields: ``exp(+-lambda_q)``, ``exp(+-lambda_w)`` with no energy scaling."""

    lambda_q: float
    lambda_w: float

    def exponents(self, d: DerivedQuantities) -> tuple[float, float]:
        return self.lambda_q, self.lambda_w


@dataclass(frozen=True)
class EnergyConjugate:
    """Fields conjugate to energy: hot exponents scaled by Q_h, cold by W."""

    lambda_q: float
    lambda_w: float

    def exponents(self, d: DerivedQuantities) -> tuple[float, float]:
        return d.Q_h * self.lambda_q, d.W * self.lambda_w


@dataclass(frozen=True)
class EfficiencyTracking:
    """EnergyConjugate with ``lambda_q = eta*lam`` and ``lambda_w = lam``."""

    lam: float
    eta: float

    def exponents(self, d: DerivedQuantities) -> tuple[float, float]:
        return d.Q_h * self.eta * self.lam, d.W * self.lam


@dataclass(frozen=True)
class ParticleCold:
    lam: float

    def exponents(self, d: DerivedQuantities) -> tuple[float, float]:
        return 0.0, self.lam


@dataclass(frozen=True)
class ParticleHot:
    lam: float

    def exponents(self, d: DerivedQuantities) -> tuple[float, float]:
        return self.lam, 0.0


CountingMode = Union[RawFields, EnergyConjugate, EfficiencyTracking, ParticleCold, ParticleHot]

# A one-parameter family of modes, linear in its argument, e.g. ``ParticleCold``
# itself or ``efficiency_family(0.3)``.
Family = Callable[[float], CountingMode]


def efficiency_family(eta: float) -> Family:
    return partial(EfficiencyTracking, eta=eta)


def heat_family(lam: float) -> EnergyConjugate:
    """Energy-conjugate hot-only family (heat exchanged with the hot bath)."""
    return EnergyConjugate(lam, 0.0)


def work_family(lam: float) -> EnergyConjugate:
    """Energy-conjugate cold-only family (useful work per cold emission)."""
    return EnergyConjugate(0.0, lam)


def family_direction(family: Family, d: DerivedQuantities) -> tuple[float, float]:
    """Raw exponent change ``(d x_q/d lam, d x_w/d lam)`` of a linear family."""
    x0 = family(0.0).exponents(d)
    if x0 != (0.0, 0.0):
        raise ValueError("counting family must vanish at lam = 0")
    return family(1.0).exponents(d)


@dataclass(frozen=True)
class GeneratorTerms:
    """Generator split as ``base + sum_k K_k exp(sq_k x_q + sw_k x_w)``.

    ``terms`` holds ``((sq, sw), K)`` pairs. The split makes field derivatives
    exact: along a direction ``(a, b)`` the n-th derivative of term k carries
    the factor ``(sq_k a + sw_k b)**n``.
    """

    base: np.ndarray
    terms: tuple[tuple[tuple[int, int], np.ndarray], ...]

    def matrix(self, x_q: float = 0.0, x_w: float = 0.0) -> np.ndarray:
        M = self.base.copy()
        for (sq, sw), K in self.terms:
            M += K * np.exp(sq * x_q + sw * x_w)
        return M

    def derivative(self, direction: tuple[float, float], order: int) -> np.ndarray:
        """n-th derivative along ``direction`` at zero fields."""
        a, b = direction
        D = np.zeros((DIM, DIM)) if order > 0 else self.base.copy()
        for (sq, sw), K in self.terms:
            D += K * (sq * a + sw * b) ** order
        return D


@lru_cache(maxsize=4096)
def generator_terms(d: DerivedQuantities, p: EngineParams, paper_literal: bool = False) -> GeneratorTerms:
    r, g2 = p.r, p.g * p.g
    n, y = d.n_sum, d.y
    # The uncorrected G~ uses nt_c, which leaves the rho_aa column with a nonzero
    # population sum 2r(nt_h - nt_c); nt_h restores trace preservation.
    G_tilde = g2 * d.nt_l + 2.0 * r * (d.nt_c if paper_literal else d.nt_h)
    G = g2 * d.n_l + 2.0 * r * d.nt_c

    base = np.zeros((DIM, DIM))
    base[0, 0] = base[1, 1] = -r * n
    base[0, 4] = base[1, 4] = -r * y
    base[2, 2] = -G_tilde
    base[2, 3] = g2 * d.n_l
    base[3, 2] = g2 * d.nt_l
    base[3, 3] = -G
    base[4, 0] = base[4, 1] = -r * y / 2.0
    base[4, 4] = -r * n

    hot_emit = np.zeros((DIM, DIM))
    hot_emit[0, 2] = hot_emit[1, 2] = r * d.nt_h
    hot_emit[4, 2] = r * p.p_h * d.nt_h

    hot_absorb = np.zeros((DIM, DIM))
    hot_absorb[2, 0] = hot_absorb[2, 1] = r * d.n_h
    hot_absorb[2, 4] = 2.0 * r * p.p_h * d.n_h

    cold_emit = np.zeros((DIM, DIM))
    cold_emit[0, 3] = cold_emit[1, 3] = r * d.nt_c
    cold_emit[4, 3] = r * p.p_c * d.nt_c

    cold_absorb = np.zeros((DIM, DIM))
    cold_absorb[3, 0] = cold_absorb[3, 1] = r * d.n_c
    cold_absorb[3, 4] = 2.0 * r * p.p_c * d.n_c

    terms = (
        ((1, 0), hot_emit),
        ((-1, 0), hot_absorb),
        ((0, 1), cold_emit),
        ((0, -1), cold_absorb),
    )
    for _, K in terms:
        K.flags.writeable = False
    base.flags.writeable = False
    return GeneratorTerms(base=base, terms=terms)


@dataclass(frozen=True)
class TiltedGenerator:
    M: np.ndarray
    mode: CountingMode
    params_hash: str
    paper_literal: bool = False


def build_generator(
    d: DerivedQuantities | None,
    p: EngineParams,
    mode: CountingMode,
    paper_literal: bool = False,
) -> TiltedGenerator:
    if d is None:
        d = derived_quantities(p)
    x_q, x_w = mode.exponents(d)
    M = generator_terms(d, p, paper_literal).matrix(x_q, x_w)
    M.flags.writeable = False
    return TiltedGenerator(M=M, mode=mode, params_hash=p.fingerprint(), paper_literal=paper_literal)


@dataclass(frozen=True)
class LinearizedGenerator:
    """``L(lam, eta*lam) ~ L0 + lam * L1_coeff`` near zero fields."""

    L0: np.ndarray
    L1_coeff: np.ndarray
    eta: float


def build_linearized(d: DerivedQuantities | None, p: EngineParams, eta: float) -> LinearizedGenerator:
    if d is None:
        d = derived_quantities(p)
    r = p.r
    a = d.Q_h * eta
    b = d.W
    L1 = np.zeros((DIM, DIM))
    L1[0, 2] = L1[1, 2] = d.nt_h * a
    L1[0, 3] = L1[1, 3] = d.nt_c * b
    L1[2, 0] = L1[2, 1] = -d.n_h * a
    L1[2, 4] = -2.0 * p.p_h * d.n_h * a
    L1[3, 0] = L1[3, 1] = -d.n_c * b
    L1[3, 4] = -2.0 * p.p_c * d.n_c * b
    L1[4, 2] = p.p_h * d.nt_h * a
    L1[4, 3] = p.p_c * d.nt_c * b
    L1 *= r
    L0 = build_generator(d, p, RawFields(0.0, 0.0)).M
    return LinearizedGenerator(L0=L0, L1_coeff=L1, eta=eta)
