"""
Shared planner solutions for integration tests
"""

import pytest
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from planning.mission import forward_flight_to_hover, hover_to_forward_flight
from planning.planner import SolverOptions, solve_min_time
from tests.fixtures.builders import default_vehicle


@pytest.fixture(scope='session')
def hff_solution():
    return solve_min_time(hover_to_forward_flight(), default_vehicle(), SolverOptions(nodes=40))


@pytest.fixture(scope='session')
def ffh_solution():
    return solve_min_time(forward_flight_to_hover(), default_vehicle(), SolverOptions(nodes=40))
