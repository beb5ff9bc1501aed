"""The one-particle process driven by the solved field, and independent
copies of it.

Each agent performs the same random flight and recovery as in the
interacting model, but infection proposals are accepted against the
interaction intensity of the grid solver's field instead of against other
agents.  Proposals fire at the constant majorant rate (the intensity never
exceeds 1), so acceptance with probability nf is exact thinning.  Agents
never read each other's state; an ensemble is just n independent copies
sharing one clock.
"""

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .core import (TWO_PI, AgentState, Label, ModelParams, SeedSpec,
                   VELOCITY_JUMP_RATE, sample_velocity, unit_vector, wrap)
from .initial import InitialCondition
from .kinetic import FieldTrajectory
from .particle import ConfigError, Counters, EnsembleState, Trajectory, check_sample_times


class OracleSpanError(ValueError):
    """A field lookup outside the time span covered by the snapshots."""


@dataclass
class FieldOracle:
    """Time-indexed intensity record with (bi)linear interpolation.

    ``times`` strictly increasing, ``grids`` of shape (len(times), m, m)
    holding the intensity on cell centers.  Lookups are bilinear in space,
    linear in time between bracketing records, and clamped to [0, 1].
    """

    times: np.ndarray
    grids: np.ndarray
    side: float

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.grids = np.asarray(self.grids, dtype=float)
        if self.times.ndim != 1 or self.grids.ndim != 3 or \
                self.grids.shape[0] != self.times.shape[0]:
            raise ValueError("need one (m, m) grid per record time")
        if self.times.size == 0:
            raise ValueError("oracle needs at least one record")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("record times must be strictly increasing")
        if self.grids.min() < -1e-9 or self.grids.max() > 1.0 + 1e-9:
            raise ValueError("intensity records must lie in [0, 1]")
        np.clip(self.grids, 0.0, 1.0, out=self.grids)

    @classmethod
    def from_trajectory(cls, traj: FieldTrajectory) -> "FieldOracle":
        return cls(traj.nf_times, traj.nf_values, traj.grid.side)

    @property
    def span(self):
        return float(self.times[0]), float(self.times[-1])

    def nf_at(self, x, t):
        """Intensity at position(s) x and time(s) t, in [0, 1].

        ``x`` has shape (..., 2); ``t`` is a scalar or matching batch.
        Raises OracleSpanError outside the recorded span (up to rounding
        slack of 1e-9).
        """
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        t0, t1 = self.times[0], self.times[-1]
        if np.any(t < t0 - 1e-9) or np.any(t > t1 + 1e-9):
            raise OracleSpanError(
                f"time {t} outside the oracle span [{t0}, {t1}]")
        if self.times.size == 1:
            w = np.zeros_like(t)
            lo = np.zeros(t.shape, dtype=np.int64)
        else:
            lo = np.clip(np.searchsorted(self.times, t, side="right") - 1,
                         0, self.times.size - 2)
            w = (t - self.times[lo]) / (self.times[lo + 1] - self.times[lo])
            w = np.clip(w, 0.0, 1.0)
        m = self.grids.shape[1]
        h = self.side / m
        g = x / h - 0.5
        i0 = np.floor(g).astype(np.int64)
        fx = g - i0
        ix0, iy0 = i0[..., 0] % m, i0[..., 1] % m
        ix1, iy1 = (ix0 + 1) % m, (iy0 + 1) % m
        wx, wy = fx[..., 0], fx[..., 1]

        def interp(k_idx):
            v00 = self.grids[k_idx, ix0, iy0]
            v10 = self.grids[k_idx, ix1, iy0]
            v01 = self.grids[k_idx, ix0, iy1]
            v11 = self.grids[k_idx, ix1, iy1]
            return ((1 - wx) * (1 - wy) * v00 + wx * (1 - wy) * v10
                    + (1 - wx) * wy * v01 + wx * wy * v11)

        if self.times.size == 1:
            val = interp(lo)
        else:
            v_lo = interp(lo)
            v_hi = interp(np.minimum(lo + 1, self.times.size - 1))
            val = (1.0 - w) * v_lo + w * v_hi
        return np.clip(val, 0.0, 1.0)

    def scalar_probe(self):
        """Closure for fast scalar lookups: probe(x, y, t) -> float.

        Same interpolation as ``nf_at`` without array plumbing; span
        checking is the caller's job.  Event loops issue one lookup per
        proposal, which makes this path worth having.
        """
        times = self.times
        grids = self.grids
        m = grids.shape[1]
        h = self.side / m
        n_t = times.size
        t_list = times.tolist()

        def probe(px: float, py: float, t: float) -> float:
            if n_t == 1:
                k0, w = 0, 0.0
            else:
                k0 = bisect.bisect_right(t_list, t) - 1
                k0 = 0 if k0 < 0 else (n_t - 2 if k0 > n_t - 2 else k0)
                w = (t - t_list[k0]) / (t_list[k0 + 1] - t_list[k0])
                w = 0.0 if w < 0.0 else (1.0 if w > 1.0 else w)
            gx = px / h - 0.5
            gy = py / h - 0.5
            fx = math.floor(gx)
            fy = math.floor(gy)
            wx = gx - fx
            wy = gy - fy
            ix0 = fx % m
            iy0 = fy % m
            ix1 = ix0 + 1 - m if ix0 + 1 >= m else ix0 + 1
            iy1 = iy0 + 1 - m if iy0 + 1 >= m else iy0 + 1
            g = grids[k0]
            v = ((1 - wx) * (1 - wy) * g[ix0, iy0] + wx * (1 - wy) * g[ix1, iy0]
                 + (1 - wx) * wy * g[ix0, iy1] + wx * wy * g[ix1, iy1])
            if w > 0.0:
                g = grids[k0 + 1]
                v1 = ((1 - wx) * (1 - wy) * g[ix0, iy0] + wx * (1 - wy) * g[ix1, iy0]
                      + (1 - wx) * wy * g[ix0, iy1] + wx * wy * g[ix1, iy1])
                v = (1.0 - w) * v + w * v1
            return 0.0 if v < 0.0 else (1.0 if v > 1.0 else float(v))

        return probe


def constant_oracle(side: float, value: float, t_max: float, m: int = 4) -> FieldOracle:
    """Spatially and temporally constant intensity, handy for law tests."""
    grids = np.full((2, m, m), float(value))
    return FieldOracle(np.array([0.0, t_max]), grids, side)


def nf_at(oracle: FieldOracle, x, t):
    return oracle.nf_at(x, t)


def step_agent(agent: AgentState, t: float, oracle: FieldOracle, params: ModelParams,
               rng: np.random.Generator):
    """Advance one agent through its next event; returns (agent, new time).

    Scalar reference path for the vectorized ensemble: free flight to the
    event, then a velocity jump, a recovery tick, or an infection proposal
    accepted with the local intensity.
    """
    mu = VELOCITY_JUMP_RATE + params.recovery_rate + params.infection_rate
    tau = rng.exponential(1.0 / mu)
    t_new = t + tau
    x = wrap(agent.x + unit_vector(agent.theta) * tau, params.side)
    theta, label = agent.theta, agent.label
    u = rng.random() * mu
    if u < VELOCITY_JUMP_RATE:
        theta = sample_velocity(rng)
    elif u < VELOCITY_JUMP_RATE + params.recovery_rate:
        if label == Label.I:
            label = Label.R
    else:
        q = float(oracle.nf_at(x, t_new))
        assert q <= 1.0
        if rng.random() < q and label == Label.S:
            label = Label.I
    return AgentState(x, theta, label), t_new


def run_ensemble(n: int, ic: InitialCondition, oracle: FieldOracle, params: ModelParams,
                 t_max: float, sample_times, seed: SeedSpec | np.random.Generator,
                 observer=None) -> Trajectory:
    """Simulate n independent copies of the one-particle process.

    Vectorized over agents: each round handles, for every agent whose next
    event falls inside the current observation segment, exactly that
    agent's own next event.  Independence is structural; no update ever
    reads another agent's row.
    """
    if t_max < 0:
        raise ConfigError("t_max must be nonnegative")
    st = check_sample_times(sample_times, t_max)
    lo, hi = oracle.span
    if lo > 1e-9 or hi < t_max - 1e-9:
        raise OracleSpanError(f"oracle span [{lo}, {hi}] does not cover [0, {t_max}]")
    if isinstance(seed, SeedSpec):
        rng_init = seed.child(0).rng()
        rng_dyn = seed.child(1).rng()
    else:
        rng_init = rng_dyn = seed
    x, theta, labels = ic.sample(n, rng_init)
    x = wrap(x, params.side)
    cs, sn = np.cos(theta), np.sin(theta)
    mu = VELOCITY_JUMP_RATE + params.recovery_rate + params.infection_rate
    t_cur = np.zeros(n)
    t_next = rng_dyn.exponential(1.0 / mu, size=n)
    cnt = Counters()

    times, rows, extras = [], [], []
    boundaries = np.unique(np.concatenate([st, [t_max]]))

    def record(t_s):
        c = np.bincount(labels, minlength=3)
        times.append(t_s)
        rows.append((int(c[0]), int(c[1]), int(c[2])))
        if observer is not None:
            state = EnsembleState(x.copy(), theta.copy(), labels.copy(), t_s, cnt.copy())
            extras.append(observer(state))

    sample_set = set(np.round(st, 12).tolist())
    if 0.0 in sample_set:
        record(0.0)

    t_seg = 0.0
    for t_end in boundaries:
        while True:
            active = t_next < t_end
            if not active.any():
                break
            idx = np.flatnonzero(active)
            tn = t_next[idx]
            dt = tn - t_cur[idx]
            x[idx, 0] = wrap(x[idx, 0] + cs[idx] * dt, params.side)
            x[idx, 1] = wrap(x[idx, 1] + sn[idx] * dt, params.side)
            t_cur[idx] = tn
            u = rng_dyn.random(idx.size) * mu
            vel = u < VELOCITY_JUMP_RATE
            rec = (~vel) & (u < VELOCITY_JUMP_RATE + params.recovery_rate)
            prop = ~(vel | rec)
            vi = idx[vel]
            if vi.size:
                ang = rng_dyn.random(vi.size) * TWO_PI
                theta[vi] = ang
                cs[vi] = np.cos(ang)
                sn[vi] = np.sin(ang)
                cnt.velocity_jumps += int(vi.size)
            ri = idx[rec]
            if ri.size:
                hit = ri[labels[ri] == Label.I]
                labels[hit] = Label.R
                cnt.recoveries += int(hit.size)
            pi = idx[prop]
            if pi.size:
                q = oracle.nf_at(x[pi], t_cur[pi])
                assert np.all(q <= 1.0)
                acc = rng_dyn.random(pi.size) < q
                flip = pi[acc & (labels[pi] == Label.S)]
                labels[flip] = Label.I
                cnt.infection_proposals += int(pi.size)
                cnt.infections += int(flip.size)
            t_next[idx] = tn + rng_dyn.exponential(1.0 / mu, size=idx.size)
        dt = t_end - t_cur
        x[:, 0] = wrap(x[:, 0] + cs * dt, params.side)
        x[:, 1] = wrap(x[:, 1] + sn * dt, params.side)
        t_cur[:] = t_end
        if round(float(t_end), 12) in sample_set and t_end > t_seg:
            record(float(t_end))
        t_seg = t_end

    final = EnsembleState(x, theta, labels, t_max, cnt)
    return Trajectory(np.asarray(times), np.asarray(rows, dtype=np.int64).reshape(-1, 3),
                      extras, final)
