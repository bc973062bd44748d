from __future__ import annotations

import numpy as np
import pytest

from qhefcs.engine import EngineParams

# lines recorded by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def random_params(rng: np.random.Generator, coherent: bool = True) -> EngineParams:
    """A valid parameter set spread well beyond the preset values."""
    eps1 = rng.uniform(0.05, 0.2)
    eps_b = eps1 + rng.uniform(0.2, 0.6)
    eps_a = eps_b + rng.uniform(0.5, 1.5)
    T_c = rng.uniform(0.2, 0.8)
    T_h = T_c + rng.uniform(0.1, 1.0)
    p_c, p_h = (rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)) if coherent else (0.0, 0.0)
    return EngineParams(
        eps1=eps1, eps2=eps1, eps_a=eps_a, eps_b=eps_b,
        T_c=T_c, T_h=T_h, T_l=rng.uniform(1.0, 6.0),
        g=rng.uniform(0.5, 1.5), r=rng.uniform(0.3, 1.0),
        p_c=p_c, p_h=p_h,
    )


def random_param_list(n: int, seed: int, coherent: bool = True) -> list[EngineParams]:
    rng = np.random.default_rng(seed)
    return [random_params(rng, coherent) for _ in range(n)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
