import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qhefcs.engine import PRESETS, derived_quantities
from qhefcs.errors import DegenerateDominant, NoNullVector, NonRealDominant
from qhefcs.generator import (
    EfficiencyTracking,
    ParticleCold,
    ParticleHot,
    RawFields,
    build_generator,
    efficiency_family,
    heat_family,
    work_family,
)
from qhefcs.spectral import (
    cgf,
    cgf_cumulants,
    dominant_eigenvalue,
    propagate_cgf_oracle,
    spectral_solve,
    steady_state,
    verify_gc_symmetry,
    zero_field_expansion,
)

from conftest import random_param_list
from oracles import cold_particle_flux, hot_particle_flux, oracle_dominant, oracle_steady_state

FIG1, FIG2 = PRESETS["fig1"], PRESETS["fig2"]
SETS = [FIG1, FIG2] + random_param_list(10, 11)


@pytest.mark.parametrize("p", SETS, ids=lambda p: p.fingerprint())
def test_dominant_eigenvalue_matches_charpoly_oracle(p):
    for mode in (ParticleCold(0.4), ParticleHot(-0.7), RawFields(0.3, 0.2), EfficiencyTracking(1.0, 0.5)):
        M = build_generator(None, p, mode).M
        assert dominant_eigenvalue(M) == pytest.approx(oracle_dominant(M), abs=1e-11)


@pytest.mark.parametrize("p", SETS, ids=lambda p: p.fingerprint())
def test_steady_state_matches_gaussian_elimination(p):
    M0 = build_generator(None, p, RawFields(0.0, 0.0)).M
    rho = steady_state(p)
    assert np.abs(rho - oracle_steady_state(M0)).max() < 1e-12
    assert rho[:4].sum() == pytest.approx(1.0, abs=1e-14)
    assert np.all(rho[:4] > 0)


def test_spectral_solution_normalisation():
    sol = spectral_solve(build_generator(None, FIG2, ParticleCold(0.5)))
    assert sol.right[:4].sum() == pytest.approx(1.0)
    assert sol.left @ sol.right == pytest.approx(1.0)
    assert sol.residual < 1e-12 and sol.gap > 0


def test_degenerate_dark_state_refused():
    p = FIG2.with_coherences(1.0, 1.0)
    with pytest.raises(DegenerateDominant):
        spectral_solve(build_generator(None, p, RawFields(0.0, 0.0)))
    # the eigenvalue alone is still available
    assert abs(cgf(p, RawFields(0.0, 0.0))) < 1e-12


def test_non_real_dominant_refused():
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    with pytest.raises(NonRealDominant):
        dominant_eigenvalue(rot)


def test_paper_literal_has_no_null_vector():
    with pytest.raises(NoNullVector):
        steady_state(FIG2, paper_literal=True)


@pytest.mark.parametrize("p", SETS, ids=lambda p: p.fingerprint())
def test_first_cumulants_match_flux_oracle(p):
    rho = oracle_steady_state(build_generator(None, p, RawFields(0.0, 0.0)).M)
    exp = zero_field_expansion(p)
    assert exp.family_cumulants(ParticleCold)[0] == pytest.approx(cold_particle_flux(p, rho), abs=1e-13)
    assert exp.family_cumulants(ParticleHot)[0] == pytest.approx(hot_particle_flux(p, rho), abs=1e-13)
    d = derived_quantities(p)
    assert exp.family_cumulants(heat_family)[0] == pytest.approx(d.Q_h * hot_particle_flux(p, rho), abs=1e-13)
    assert exp.family_cumulants(work_family)[0] == pytest.approx(d.W * cold_particle_flux(p, rho), abs=1e-13)


def test_steady_state_conserves_particles():
    # every cycle moves one quantum through each bath
    for p in SETS:
        exp = zero_field_expansion(p)
        assert exp.family_cumulants(ParticleCold)[0] == pytest.approx(
            -exp.family_cumulants(ParticleHot)[0], abs=1e-14
        )


@pytest.mark.parametrize("p", SETS[:6], ids=lambda p: p.fingerprint())
def test_fd_and_perturbative_agree(p):
    for fam in (ParticleCold, heat_family, efficiency_family(0.3)):
        a = cgf_cumulants(p, fam, method="perturbative")
        b = cgf_cumulants(p, fam, method="fd")
        assert b.c1 == pytest.approx(a.c1, rel=1e-7)
        assert b.c2 == pytest.approx(a.c2, rel=1e-7)


def test_fd_third_and_fourth_order_are_consistent():
    fam = ParticleCold
    c = cgf_cumulants(FIG2, fam, method="fd", orders=4)
    # compare against a polynomial fit of S on a small grid
    lams = np.linspace(-0.05, 0.05, 21)
    S = [cgf(FIG2, fam(x)) for x in lams]
    coeffs = np.polynomial.polynomial.polyfit(lams, S, 6)
    assert c.c3 == pytest.approx(6 * coeffs[3], rel=1e-3)
    assert c.c4 == pytest.approx(24 * coeffs[4], rel=1e-2)


def test_cumulant_method_validation():
    with pytest.raises(ValueError):
        cgf_cumulants(FIG2, ParticleCold, method="magic")
    with pytest.raises(ValueError):
        cgf_cumulants(FIG2, ParticleCold, orders=3)


def test_variance_positive():
    for p in SETS:
        assert cgf_cumulants(p, ParticleCold).c2 > 0


def test_propagation_matches_eigenvalue():
    mode = ParticleCold(0.2)
    traj = propagate_cgf_oracle(FIG2, mode)
    assert traj[-1, 1] == pytest.approx(cgf(FIG2, mode), abs=1e-4)
    assert traj[-1, 0] == pytest.approx(200 / FIG2.r)


@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(0.0, 1.0))
@settings(max_examples=80, deadline=None)
def test_cgf_convex_along_lines(a, b, t):
    s = lambda x: cgf(FIG2, RawFields(x * a, x * b))
    mid = s(t * 1.0 + (1 - t) * -1.0)
    assert mid <= t * s(1.0) + (1 - t) * s(-1.0) + 1e-12


@pytest.mark.parametrize("p", [FIG1, FIG2] + random_param_list(4, 17), ids=lambda p: p.fingerprint())
def test_fluctuation_symmetry(p):
    rep = verify_gc_symmetry(p)
    assert rep.residual < 1e-8
    assert rep.affinity_empirical == pytest.approx(rep.affinity_printed, abs=1e-8)


def test_fluctuation_symmetry_at_equilibrium():
    from qhefcs.engine import equilibrium_hot_temperature

    p = FIG2.replace(T_h=equilibrium_hot_temperature(FIG2))
    rep = verify_gc_symmetry(p)
    assert rep.lambda0 == 0.0 and rep.residual < 1e-10
    assert math.isclose(rep.affinity_printed, 0.0, abs_tol=1e-12)
