# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
import numpy as np
import pytest

from stsource.lmi_design import load_solution
from stsource.pde_core import QuadratureRule, heat_rod
from stsource.reduction import build_slow_subsystem
from stsource.scenarios import PUBLISHED_GAINS, published_scenario, run_scenario
from stsource.spectral import dirichlet_eigenpairs, spectral_gap

ROD = (0.0, np.pi)


@pytest.fixture
def rod():
    return heat_rod()


@pytest.fixture
def rule():
    return QuadratureRule.from_domain(ROD, 201)


@pytest.fixture
def partition():
    return spectral_gap(dirichlet_eigenpairs(2.0, 6), 2)


@pytest.fixture
def slow_model(rod, partition, rule):
    return build_slow_subsystem(rod, partition, rule)


@pytest.fixture
def published_gains():
    return load_solution(PUBLISHED_GAINS)


@pytest.fixture(scope="session")
def abrupt_outcome():
    return run_scenario(published_scenario("abrupt"), write=False)
