"""Deterministic microscopic simulator of a two-route highway junction.

Vehicles drive in one direction on a three-lane mainline.  At the junction
each vehicle either continues straight (route 0) or takes the right off-ramp
(route 1), descending on a smooth cubic path to the ramp level and then
continuing straight.  The simulator emits one position sample per vehicle per
time step, labeled with the vehicle's route choice.

All randomness comes from a single ``random.Random`` stream consumed in a
documented order, so a given ``ScenarioConfig`` always produces a
bit-identical trace on every platform.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "TrajectoryPoint",
    "Trace",
    "generate_trace",
    "vehicle_position",
]

LANE_COUNT = 3


class ConfigError(ValueError):
    """A scenario configuration violates an invariant.

    ``field`` names the offending configuration field.
    """

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class ScenarioConfig:
    """Geometry and sampling parameters for one simulation run.

    Distances are meters, speeds meters per step.  ``lane_y`` lists the three
    lane center ordinates from top (leftmost lane) down.  Route-1 vehicles
    leave the mainline at ``junction_x`` and reach ``ramp_end`` where the
    off-ramp levels out.  Vehicle ``i`` spawns at ``x = spawn_spacing * i`` so
    the fleet occupies a distinct stretch of road on both sides of the
    junction.
    """

    num_vehicles: int = 600
    num_steps: int = 100
    lane_y: tuple[float, float, float] = (0.0, -0.5, -1.0)
    junction_x: float = 200.0
    ramp_end: tuple[float, float] = (260.0, -2.0)
    speed_range: tuple[float, float] = (1.0, 3.0)
    route2_probability: float = 0.5
    spawn_spacing: float = 2.5
    lane_noise: float = 0.05
    rng_seed: int = 7

    def validate(self) -> None:
        """Raise :class:`ConfigError` naming the first field that is invalid."""
        if self.num_vehicles < 1:
            raise ConfigError("num_vehicles", "must be >= 1")
        if self.num_steps < 1:
            raise ConfigError("num_steps", "must be >= 1")
        if len(self.lane_y) != LANE_COUNT:
            raise ConfigError("lane_y", f"must list {LANE_COUNT} lane ordinates")
        if not all(a > b for a, b in zip(self.lane_y, self.lane_y[1:])):
            raise ConfigError("lane_y", "must be strictly decreasing")
        lo, hi = self.speed_range
        if not (0.0 < lo <= hi):
            raise ConfigError("speed_range", "needs 0 < low <= high")
        if self.ramp_end[1] >= min(self.lane_y):
            raise ConfigError("ramp_end", "ordinate must lie below the lowest lane")
        if self.ramp_end[0] <= self.junction_x:
            raise ConfigError("ramp_end", "abscissa must lie past the junction")
        if not (0.0 <= self.route2_probability <= 1.0):
            raise ConfigError("route2_probability", "must be in [0, 1]")
        if self.spawn_spacing <= 0.0:
            raise ConfigError("spawn_spacing", "must be > 0")
        if self.lane_noise < 0.0:
            raise ConfigError("lane_noise", "must be >= 0")
        if self.rng_seed < 0:
            raise ConfigError("rng_seed", "must be a nonnegative integer")


@dataclass(frozen=True)
class TrajectoryPoint:
    """One vehicle observation: position and speed at a time step."""

    vehicle_id: str
    step: int
    x: float
    y: float
    speed: float
    route_label: int  # 0 = straight mainline, 1 = off-ramp


@dataclass(frozen=True)
class Trace:
    """A full simulation run: points sorted by (step, vehicle_id).

    ``config`` is ``None`` for traces ingested from external files; it is
    carried for provenance and excluded from equality so that round-trips
    through formats that do not persist it still compare equal.
    """

    points: tuple[TrajectoryPoint, ...]
    config: ScenarioConfig | None = field(default=None, compare=False)

    def vehicle_ids(self) -> list[str]:
        """Distinct vehicle ids in sorted order."""
        return sorted({p.vehicle_id for p in self.points})


def _ramp_y(config: ScenarioConfig, lane_y: float, x: float) -> float:
    """Off-ramp ordinate at abscissa ``x``.

    Cubic Hermite blend from (junction_x, lane_y) to ramp_end with zero slope
    at both ends; flat at the ramp level beyond ramp_end.
    """
    x0 = config.junction_x
    x1, y1 = config.ramp_end
    if x <= x0:
        return lane_y
    if x >= x1:
        return y1
    s = (x - x0) / (x1 - x0)
    return lane_y + (y1 - lane_y) * (3.0 * s * s - 2.0 * s ** 3)


def vehicle_position(
    config: ScenarioConfig,
    route: int,
    lane_index: int,
    speed: float,
    step: int,
    spawn_x: float = 0.0,
) -> tuple[float, float]:
    """Noise-free position of a vehicle at ``step``.

    x advances by ``speed`` per step from ``spawn_x``.  Route 0 keeps the
    spawn lane ordinate forever; route 1 follows the lane until the junction,
    then the smooth ramp path down to the ramp level.  Pure function of its
    arguments.
    """
    x = spawn_x + speed * step
    lane_y = config.lane_y[lane_index]
    if route == 0:
        return x, lane_y
    return x, _ramp_y(config, lane_y, x)


def generate_trace(config: ScenarioConfig) -> Trace:
    """Simulate the configured scenario and return its labeled trace.

    Per vehicle, in id order, the seeded stream is consumed as: route draw,
    lane draw, speed draw, then one y-jitter draw per time step.  Identical
    configs (including seed) therefore yield bit-identical traces.

    Raises :class:`ConfigError` for configs violating invariants.
    """
    config.validate()
    rng = random.Random(config.rng_seed)
    lo, hi = config.speed_range
    noise = config.lane_noise
    points = []
    for i in range(config.num_vehicles):
        vehicle_id = f"v{i:04d}"
        route = 1 if rng.random() < config.route2_probability else 0
        lane_index = min(int(rng.random() * LANE_COUNT), LANE_COUNT - 1)
        speed = lo + (hi - lo) * rng.random()
        spawn_x = config.spawn_spacing * i
        for step in range(config.num_steps):
            x, y = vehicle_position(config, route, lane_index, speed, step, spawn_x)
            jitter = (2.0 * rng.random() - 1.0) * noise
            points.append(
                TrajectoryPoint(
                    vehicle_id=vehicle_id,
                    step=step,
                    x=x,
                    y=y + jitter,
                    speed=speed,
                    route_label=route,
                )
            )
    points.sort(key=lambda p: (p.step, p.vehicle_id))
    return Trace(points=tuple(points), config=config)
