"""
Unit tests for mission definitions
"""

import pytest
import numpy as np
import sys
from pathlib import Path

# Add parent directory to path to import from planning
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from planning.mission import (
    MissionSpec,
    Obstacle,
    PlanarState,
    TerminalState,
    forward_flight_to_hover,
    hover_to_forward_flight,
)


class TestObstacle:
    """Test obstacle geometry."""

    def test_inflated_clearance(self):
        """Test clearance subtracts radius plus margin."""
        obstacle = Obstacle(x=0.0, z=0.0, radius=2.0, margin=0.5)
        assert obstacle.clearance(5.0, 0.0) == pytest.approx(2.5)

    def test_invalid_radius(self):
        """Test non-positive radii are rejected."""
        with pytest.raises(ValueError):
            Obstacle(x=0.0, z=0.0, radius=0.0)

    def test_negative_margin(self):
        """Test negative margins are rejected."""
        with pytest.raises(ValueError):
            Obstacle(x=0.0, z=0.0, radius=1.0, margin=-0.1)


class TestMissionSpec:
    """Test mission validation and helpers."""

    def test_altitude_equality(self):
        """Test the terminal altitude follows the initial one when tied."""
        mission = forward_flight_to_hover()
        assert mission.terminal_z == mission.initial.z

    def test_degenerate(self):
        """Test a mission starting at its fixed goal is degenerate."""
        mission = MissionSpec(
            name="stay",
            initial=PlanarState(0.0, 5.0, 1.0, 0.0),
            terminal=TerminalState(0.0, 5.0, 1.0, 0.0),
        )
        assert mission.is_degenerate()

    def test_free_terminal_not_degenerate(self):
        """Test free terminal components rule out degeneracy."""
        assert not forward_flight_to_hover().is_degenerate()

    def test_bad_bounds(self):
        """Test inverted path bounds are rejected."""
        with pytest.raises(ValueError):
            MissionSpec(
                name="bad",
                initial=PlanarState(0.0, 0.0, 1.0, 0.0),
                terminal=TerminalState(),
                x_bounds=(10.0, -10.0),
            )

    def test_bad_speed_bounds(self):
        """Test v_min must lie below v_max."""
        with pytest.raises(ValueError):
            MissionSpec(
                name="bad",
                initial=PlanarState(0.0, 0.0, 1.0, 0.0),
                terminal=TerminalState(),
                v_min=5.0, v_max=2.0,
            )

    def test_builtin_missions(self):
        """Test the built-in boundary states."""
        hff = hover_to_forward_flight()
        assert hff.initial.V_i == pytest.approx(1.54)
        assert hff.initial.gamma == pytest.approx(np.pi / 2)
        assert hff.terminal.V_i == pytest.approx(12.86)
        assert len(hff.obstacles) == 3
        ffh = forward_flight_to_hover()
        assert ffh.terminal.gamma == pytest.approx(np.pi / 2)
        assert ffh.terminal.x is None
