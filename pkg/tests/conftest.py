"""Shared fixtures: the three-firm market study and a symmetric duopoly."""

from __future__ import annotations

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from deceptive_nes import (
    DeceptionTopology,
    NESTuning,
    OligopolyParams,
    build_quadratic_game,
    market_game,
)

# Three-firm study: R=[0.67, 0.36, 0.8], m=[20, 29, 30], S_d=100.
# Firm 1 deceives firm 3 with profit target 1200 (cost reference -1200).
THREE_FIRM_R = (0.67, 0.36, 0.8)
THREE_FIRM_M = (20.0, 29.0, 30.0)
THREE_FIRM_SD = 100.0
# The study tabulates firm 3's own-curvature as 2.17799…, i.e. firm 1's value
# (their derivation reused the wrong index); the bundled scenarios carry it
# as an explicit override so the tabulated equilibrium is reproducible.
PUBLISHED_Q33 = 2.1779947427713107


@pytest.fixture(scope="session")
def params3():
    return OligopolyParams(
        resistance=np.array(THREE_FIRM_R),
        marginal_cost=np.array(THREE_FIRM_M),
        total_demand=THREE_FIRM_SD,
    )


@pytest.fixture(scope="session")
def game3(params3):
    """Faithful quadratic game for the three-firm market."""
    return build_quadratic_game(params3)


@pytest.fixture(scope="session")
def game3_published(params3):
    """Three-firm game with the tabulated own-curvature override for firm 3."""
    return market_game(params3, own_curvature={2: PUBLISHED_Q33})


@pytest.fixture(scope="session")
def topology3():
    return DeceptionTopology(
        deceivers=(0,),
        victims=((2,),),
        eps=1e-4,
        eps_rates=(1.0,),
        cost_refs=(-1200.0,),
    )


@pytest.fixture(scope="session")
def tuning3():
    return NESTuning(
        amplitude=(0.04, 0.03, 0.05),
        gain=(0.02, 0.019, 0.22),
        omega=1.0,
        omega_ratio=(6346, 4089, 6115),
    )


@pytest.fixture(scope="session")
def duopoly():
    """Symmetric two-firm market with unit resistances: Q=[[1,-.5],[-.5,1]]."""
    params = OligopolyParams(
        resistance=np.array([1.0, 1.0]),
        marginal_cost=np.array([1.0, 1.0]),
        total_demand=1.0,
    )
    return params, build_quadratic_game(params)
