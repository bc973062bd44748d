import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qhefcs.efficiency import (
    NearEqForm,
    _near_eq_terms,
    coherence_ratio,
    current_ratio_efficiency,
    efficiency_cumulants,
    efficiency_grid,
    golden_section,
    ldf,
    most_likely_efficiency,
    near_equilibrium_s1,
)
from qhefcs.engine import PRESETS, derived_quantities
from qhefcs.errors import NoBracket
from qhefcs.generator import ParticleCold
from qhefcs.spectral import zero_field_expansion

FIG1, FIG2 = PRESETS["fig1"], PRESETS["fig2"]


def test_golden_section_quadratic():
    x, fx = golden_section(lambda t: (t - 0.3) ** 2 + 1.0, -1.0, 2.0, tol=1e-12)
    assert x == pytest.approx(0.3, abs=1e-6) and fx == pytest.approx(1.0, abs=1e-12)


def test_golden_section_flat_floor_keeps_best_point():
    f = lambda t: max(abs(t - 0.2), 0.05)
    x, fx = golden_section(f, 0.0, 1.0)
    assert fx == pytest.approx(0.05) and 0.15 <= x <= 0.25


def test_ldf_nonnegative_and_zero_at_most_likely():
    d = derived_quantities(FIG2)
    assert ldf(FIG2, 0.3).I >= -1e-12
    assert ldf(FIG2, d.eta_e, with_incoherent=False).I == pytest.approx(0.0, abs=1e-10)


def test_ldf_incoherent_column():
    pt = ldf(FIG2, 0.5)
    assert pt.I0 == pytest.approx(ldf(FIG2.incoherent(), 0.5, with_incoherent=False).I, abs=1e-14)
    assert math.isnan(ldf(FIG2, 0.5, with_incoherent=False).I0)


def test_ldf_strict_window_raises_without_bracket():
    # a window far too small for the fig1 minimiser
    with pytest.raises(NoBracket):
        ldf(FIG1, 0.1, Lam=1e-3)
    assert ldf(FIG1, 0.1, Lam=1e-3, strict=False).I >= 0


def test_efficiency_grid_default():
    g = efficiency_grid(FIG1)
    assert len(g) == 201 and g[0] == 0 and g[-1] == pytest.approx(0.8)


def test_current_ratio_equals_work_over_heat():
    for p in (FIG1, FIG2):
        assert current_ratio_efficiency(p) == pytest.approx(derived_quantities(p).eta_e, rel=1e-12)


@pytest.mark.slow
def test_most_likely_efficiency_small_affinity():
    # fig2 has lnF ~ 5.6e-3: the bounded-window well is narrower than the grid
    ml = most_likely_efficiency(FIG2)
    assert ml.eta_star == pytest.approx(current_ratio_efficiency(FIG2), abs=1e-6)
    assert ml.eta_e_eq10 == derived_quantities(FIG2).eta_e


def test_efficiency_cumulants_identity_without_coherence():
    p = FIG2.incoherent()
    e = efficiency_cumulants(p, 0.4)
    assert (e.eta1, e.eta2) == (e.eta1_o, e.eta2_o)


def test_efficiency_cumulants_closed_form():
    # tight coupling: S(lam, eta lam) = S_cold(lam (W - Q_h eta))
    d = derived_quantities(FIG2)
    j1, j2 = zero_field_expansion(FIG2).family_cumulants(ParticleCold)
    for eta in (0.1, 0.5, d.eta_C):
        e = efficiency_cumulants(FIG2, eta)
        c = d.W - d.Q_h * eta
        assert e.eta1 == pytest.approx(j1 * c, rel=1e-9)
        assert e.eta2 == pytest.approx(j2 * c * c, rel=1e-9)


def test_fd_path_for_efficiency_cumulants():
    a = efficiency_cumulants(FIG2, 0.3)
    b = efficiency_cumulants(FIG2, 0.3, method="fd")
    assert np.allclose(a, b, rtol=1e-7)


def test_coherence_ratio_identity_and_flags():
    d = derived_quantities(FIG2)
    inc = coherence_ratio(FIG2.incoherent(), [0.25, 0.5, d.eta_C])
    assert inc.K1 == (1.0, 1.0, 1.0) and inc.K2 == (1.0, 1.0, 1.0)
    res = coherence_ratio(FIG2, [0.25, current_ratio_efficiency(FIG2), d.eta_C])
    assert {o for _, o in res.flagged} == {1, 2}
    assert math.isnan(res.K1[1]) and math.isfinite(res.K1[0])
    assert res.spread1 < 1e-6


def test_near_eq_frozen_example():
    t1, t2 = _near_eq_terms(n_h=1.0, nt_h=2.0, nt_c=2.0, p_c=1.0, p_h=0.0)
    assert (t1, t2) == (-10.0, 32.0)
    form = NearEqForm(t1, t2, 0.0)
    # sqrt(-10 + sqrt(132)) = 1.2202972150570767076...
    assert math.sqrt(form.radicand) == pytest.approx(1.2202972150570767, rel=1e-14)


def test_near_eq_equal_coherences_give_zero_slope():
    for p in (0.0, 0.4, 1.0):
        form = near_equilibrium_s1(FIG2.with_coherences(p, p), 0.3)
        assert form.t2 == 0.0 and form.S1_slope == 0.0


@given(
    st.floats(1e-6, 50), st.floats(1e-6, 50), st.floats(0, 1), st.floats(0, 1),
)
@settings(max_examples=300, deadline=None)
def test_radicand_nonnegative(n_h, n_c, p_c, p_h):
    t1, t2 = _near_eq_terms(n_h, 1 + n_h, 1 + n_c, p_c, p_h)
    assert NearEqForm(t1, t2, 0.0).radicand >= 0.0
