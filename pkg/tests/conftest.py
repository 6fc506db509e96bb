import numpy as np
import pytest

from rcialloc.model import Scenario
from rcialloc.scenario_io import ScenarioSpec, generate_scenario


def line_scenario(M=2, N=1, budgets=4, snr_factor=1.0, Q=None, b=None, spacing=300.0, wavelength=0.3):
    """Platforms on a line ``spacing`` apart, with ``gain * dP / N0 = snr_factor``
    for adjacent platforms, identity ``Q`` and unit ``b`` unless given."""
    P = np.c_[np.arange(M) * spacing, np.zeros(M)]
    T = np.c_[np.arange(N) * 50.0 + 25.0, np.full(N, 400.0)]
    gain = (wavelength / spacing) ** 2
    return Scenario(
        platform_positions=P,
        target_positions=T,
        wavelength=wavelength,
        per_antenna_power=1.0,
        noise_power=gain / snr_factor,
        budgets=np.broadcast_to(np.asarray(budgets), (M,)),
        radar_Q=np.stack([np.eye(M)] * N) if Q is None else Q,
        radar_b=np.ones((N, M)) if b is None else b,
        name=f"line{M}x{N}",
    )


@pytest.fixture
def scenario3():
    return generate_scenario(ScenarioSpec(seed=3))


@pytest.fixture
def tiny():
    return line_scenario(M=2, N=1, budgets=4)
