import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest


@pytest.fixture(scope="session")
def default_runs():
    """Default trajectories (N=6, g12=g23=1, t <= 20) for every charger kind."""
    from dicke_qb.model import CHARGER_KINDS, ModelParams
    from dicke_qb.runner.experiments import simulate

    return {k: simulate(ModelParams(charger_kind=k), keep_peak_state=True) for k in CHARGER_KINDS}
