"""Geometry, agent state, model parameters, and the seeded-stream contract.

Shared foundation for every simulator in the package: the flat periodic
square, unit-speed agents whose velocity is stored as an angle, the
three-state health label with absorbing R, and a (master seed, stream key)
scheme that hands out reproducible, statistically independent generators.
"""

import math
from dataclasses import dataclass, field, replace
from enum import IntEnum

import numpy as np

TWO_PI = 2.0 * math.pi

#: Rate of the velocity-randomizing clock carried by every agent.
VELOCITY_JUMP_RATE = 1.0


class Label(IntEnum):
    """Agent health state; allowed moves are S->I and I->R only."""

    S = 0
    I = 1
    R = 2


LABEL_NAMES = ("S", "I", "R")


def wrap(x, side):
    """Canonicalize coordinates into [0, side).

    Plain modulo can round a tiny negative input up to exactly ``side``;
    that value is folded back to 0 so downstream cell indexing stays valid.
    Idempotent bit-for-bit on already-canonical input.
    """
    r = np.mod(x, side)
    return np.where(r >= side, 0.0, r) if isinstance(r, np.ndarray) else (0.0 if r >= side else r)


@dataclass(frozen=True)
class TorusGeometry:
    """Flat 2-torus [0, side) x [0, side)."""

    side: float

    def __post_init__(self):
        if self.side <= 0:
            raise ValueError(f"torus side must be positive, got {self.side}")

    def wrap(self, x):
        return wrap(x, self.side)


def torus_distance(x1, x2, geom: TorusGeometry) -> float:
    """Shortest Euclidean distance between periodic images.

    Accepts single positions (shape ``(2,)``) or batches (``(..., 2)``);
    the result is bounded by side/sqrt(2).
    """
    d = np.abs(np.asarray(x1, dtype=float) - np.asarray(x2, dtype=float))
    d = np.minimum(d, geom.side - d)
    return np.sqrt((d * d).sum(axis=-1))


def in_range(x1, x2, r0: float, geom: TorusGeometry):
    """True iff the wrapped distance is strictly below r0."""
    d = np.abs(np.asarray(x1, dtype=float) - np.asarray(x2, dtype=float))
    d = np.minimum(d, geom.side - d)
    return (d * d).sum(axis=-1) < r0 * r0


def unit_vector(theta):
    """Heading angle -> unit velocity vector, stacked on the last axis."""
    t = np.asarray(theta, dtype=float)
    return np.stack([np.cos(t), np.sin(t)], axis=-1)


@dataclass
class AgentState:
    """One agent: position in the square, heading angle, health label."""

    x: np.ndarray
    theta: float
    label: Label

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if self.x.shape != (2,):
            raise ValueError("position must be a 2-vector")

    def canonical(self, geom: TorusGeometry) -> "AgentState":
        return AgentState(geom.wrap(self.x), self.theta % TWO_PI, self.label)


def advance_free(agent: AgentState, dt: float, geom: TorusGeometry) -> AgentState:
    """Free flight for dt: straight unit-speed motion with periodic wrap."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    x = geom.wrap(agent.x + unit_vector(agent.theta) * dt)
    return AgentState(x, agent.theta, agent.label)


def sample_velocity(rng: np.random.Generator) -> float:
    """Draw a heading uniformly on [0, 2*pi)."""
    return TWO_PI * rng.random()


@dataclass(frozen=True)
class ModelParams:
    """All rate and geometry parameters of the agent model.

    Velocity jumps run at the fixed rate ``VELOCITY_JUMP_RATE`` per agent;
    ``infection_rate`` and ``recovery_rate`` are the pair-interaction and
    decay rates, ``radius`` the interaction range on a torus of the given
    side.
    """

    n: int
    side: float
    radius: float
    infection_rate: float
    recovery_rate: float

    def __post_init__(self):
        problems = []
        if self.n < 1:
            problems.append(f"n must be >= 1, got {self.n}")
        if self.side <= 0:
            problems.append(f"side must be > 0, got {self.side}")
        if self.radius <= 0:
            problems.append(f"radius must be > 0, got {self.radius}")
        if self.infection_rate < 0:
            problems.append(f"infection_rate must be >= 0, got {self.infection_rate}")
        if self.recovery_rate < 0:
            problems.append(f"recovery_rate must be >= 0, got {self.recovery_rate}")
        if problems:
            raise ValueError("; ".join(problems))

    @property
    def geometry(self) -> TorusGeometry:
        return TorusGeometry(self.side)

    def with_n(self, n: int) -> "ModelParams":
        return replace(self, n=n)


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus a stream key.

    Equal (master, key) pairs produce bit-identical generators; distinct
    pairs produce statistically independent streams.  ``child`` extends the
    key, so one master seed fans out into per-replica and per-purpose
    streams without any shared mutable state.
    """

    master: int
    key: tuple = ()

    def child(self, *ids: int) -> "SeedSpec":
        return SeedSpec(self.master, self.key + tuple(int(i) for i in ids))

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.master, spawn_key=self.key))


class BlockDraws:
    """Pre-drawn random variates for an event loop, one block at a time.

    Each event consumes one slot from every array: a standard exponential
    (holding time), a uniform (event category), two integers in [0, n)
    (agent and partner), and two more uniforms (acceptance and new heading).
    Drawing in fixed-size blocks keeps the per-event cost small while the
    sequence stays a pure function of the generator, so trajectories are
    bit-reproducible no matter how the blocks are sized.
    """

    def __init__(self, rng: np.random.Generator, n: int, block: int = 4096):
        self.rng = rng
        self.n = int(n)
        self.block = max(64, int(block))
        self._refill()

    def _refill(self):
        b = self.block
        self.expo = self.rng.standard_exponential(b)
        self.cat = self.rng.random(b)
        self.agent = self.rng.integers(0, self.n, size=b)
        self.partner = self.rng.integers(0, self.n, size=b)
        self.accept = self.rng.random(b)
        self.angle = self.rng.random(b) * TWO_PI
        self.cursor = 0

    def next_event(self):
        """Return (expo, cat, agent, partner, accept, angle) for one event."""
        c = self.cursor
        if c >= self.block:
            self._refill()
            c = 0
        self.cursor = c + 1
        return (
            self.expo[c],
            self.cat[c],
            int(self.agent[c]),
            int(self.partner[c]),
            self.accept[c],
            self.angle[c],
        )


class CellIndex:
    """Uniform-grid neighbor index with cell size >= radius.

    ``candidates`` returns all agents in the 3x3 block of cells around a
    query point; every agent within ``radius`` is guaranteed to be among
    them, so an exact distance check on the candidates reproduces the
    brute-force in-range set agent for agent.
    """

    def __init__(self, positions: np.ndarray, radius: float, geom: TorusGeometry):
        self.geom = geom
        self.m = max(1, int(geom.side / radius))
        self.h = geom.side / self.m
        ij = np.floor(positions / self.h).astype(np.int64)
        np.clip(ij, 0, self.m - 1, out=ij)
        flat = ij[:, 0] * self.m + ij[:, 1]
        order = np.argsort(flat, kind="stable")
        self.sorted_agents = order
        self.cell_start = np.searchsorted(flat[order], np.arange(self.m * self.m + 1))

    def candidates(self, x) -> np.ndarray:
        cx = min(int(x[0] / self.h), self.m - 1)
        cy = min(int(x[1] / self.h), self.m - 1)
        out = []
        if self.m <= 3:
            return self.sorted_agents
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                c = ((cx + dx) % self.m) * self.m + (cy + dy) % self.m
                out.append(self.sorted_agents[self.cell_start[c]:self.cell_start[c + 1]])
        return np.concatenate(out)


def in_range_mask(positions: np.ndarray, x, r0: float, geom: TorusGeometry,
                  index: CellIndex | None = None) -> np.ndarray:
    """Boolean mask over agents strictly within r0 of the point x.

    With ``index`` the distance check runs only on the index candidates;
    the result is identical to the brute-force scan.
    """
    n = positions.shape[0]
    if index is None:
        return in_range(positions, x, r0, geom)
    mask = np.zeros(n, dtype=bool)
    cand = index.candidates(x)
    mask[cand] = in_range(positions[cand], x, r0, geom)
    return mask
