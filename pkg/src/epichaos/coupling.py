"""Paired simulation of the interacting system and the field-driven system
on one probability space.

Every agent carries one position and heading but two labels: the a-label
evolves under the empirical pair interaction, the b-label under the solved
field's intensity.  Motion and recovery clocks are shared outright.  Each
infection proposal draws one partner and one uniform and resolves both
label systems from them through a marginal-preserving maximal coupling:
the a-attempt fires exactly when the partner is a-infected and in range,
and the b-attempt is arranged to fire with total probability equal to the
field intensity while overlapping the a-attempt as much as the marginals
allow.  Projecting on either label keeps the exact law of the respective
standalone process; the mismatch fraction between the two label vectors is
the quantity the bound and scaling experiments measure.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (TWO_PI, BlockDraws, Label, ModelParams, SeedSpec,
                   CellIndex, TorusGeometry, in_range_mask, wrap)
from .initial import InitialCondition
from .meanfield import FieldOracle, OracleSpanError
from .particle import ConfigError, Counters, check_sample_times


@dataclass
class CoupledEnsemble:
    """Shared positions and headings with the two label vectors."""

    x: np.ndarray
    theta: np.ndarray
    a: np.ndarray
    b: np.ndarray
    t: float = 0.0
    counters: Counters = field(default_factory=Counters)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.theta = np.asarray(self.theta, dtype=float)
        self.a = np.asarray(self.a, dtype=np.int8)
        self.b = np.asarray(self.b, dtype=np.int8)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def counts_a(self):
        c = np.bincount(self.a, minlength=3)
        return int(c[0]), int(c[1]), int(c[2])

    def counts_b(self):
        c = np.bincount(self.b, minlength=3)
        return int(c[0]), int(c[1]), int(c[2])

    def copy(self) -> "CoupledEnsemble":
        return CoupledEnsemble(self.x.copy(), self.theta.copy(), self.a.copy(),
                               self.b.copy(), self.t, self.counters.copy())


@dataclass(frozen=True)
class CouplingRates:
    """Per-agent interaction intensities of the coupled jump channels.

    ``shared``: partner infected in both label systems and in range;
    ``a_only`` / ``b_shared``: partner infected in exactly one system;
    ``residual``: field intensity minus the empirical b-intensity, which
    may take either sign.  shared + a_only is the a-system empirical
    intensity; shared + b_shared + residual is the field intensity.
    """

    shared: float
    a_only: float
    b_shared: float
    residual: float

    @property
    def emp_a(self) -> float:
        return self.shared + self.a_only

    @property
    def emp_b(self) -> float:
        return self.shared + self.b_shared

    @property
    def field_intensity(self) -> float:
        return self.shared + self.b_shared + self.residual


def compute_rates(state: CoupledEnsemble, oracle: FieldOracle, i: int,
                  params: ModelParams, index: CellIndex | None = None) -> CouplingRates:
    """Evaluate the channel intensities for agent i at the current time."""
    geom = TorusGeometry(params.side)
    within = in_range_mask(state.x, state.x[i], params.radius, geom, index)
    within[i] = False
    ai = within & (state.a == Label.I)
    bi = within & (state.b == Label.I)
    n = state.n
    shared = int(np.sum(ai & bi)) / n
    a_only = int(np.sum(ai & ~bi)) / n
    b_shared = int(np.sum(~ai & bi)) / n
    nf = float(oracle.nf_at(state.x[i], state.t))
    return CouplingRates(shared, a_only, b_shared, nf - shared - b_shared)


def coupled_recovery(state: CoupledEnsemble, i: int) -> CoupledEnsemble:
    """One shared recovery tick: both labels apply I -> R simultaneously."""
    flipped = False
    if state.a[i] == Label.I:
        state.a[i] = Label.R
        flipped = True
    if state.b[i] == Label.I:
        state.b[i] = Label.R
        flipped = True
    if flipped:
        state.counters.recoveries += 1
    return state


def coupled_infection_event(state: CoupledEnsemble, params: ModelParams,
                            oracle: FieldOracle, i: int, partner: int,
                            u: float) -> CoupledEnsemble:
    """Resolve one infection proposal for agent i on both label systems.

    The a-attempt fires iff the partner is a-infected and in range, which
    realizes the empirical interaction intensity exactly.  With q the field
    intensity and p the empirical b-intensity, the b-attempt reuses the
    partner check and the uniform u: for q >= p it fires on the partner
    check or, failing that, with the residual probability (q - p)/(1 - p);
    for q < p the partner check is thinned by q/p.  Either way the
    b-attempt probability is exactly q, and shared attempts are kept
    maximal.  Attempts flip S to I on their own label only.
    """
    state.counters.infection_proposals += 1
    n = state.n
    geom = TorusGeometry(params.side)
    within = in_range_mask(state.x, state.x[i], params.radius, geom)
    b_in = within & (state.b == Label.I)
    b_in_i = bool(b_in[i])
    b_in[i] = False
    p = int(np.sum(b_in)) / n
    q = float(oracle.nf_at(state.x[i], state.t))

    a_attempt = partner != i and within[partner] and state.a[partner] == Label.I
    partner_b = b_in[partner] or (partner == i and b_in_i)
    if q >= p:
        b_attempt = partner_b or ((not partner_b) and u < (q - p) / (1.0 - p))
    else:
        b_attempt = partner_b and u < q / p

    if a_attempt and state.a[i] == Label.S:
        state.a[i] = Label.I
        state.counters.infections += 1
    if b_attempt and state.b[i] == Label.S:
        state.b[i] = Label.I
    return state


def mismatch_fraction(state: CoupledEnsemble) -> float:
    """Fraction of agents whose two labels disagree."""
    return float(np.mean(state.a != state.b))


def mismatch_bound(t: float, infection_rate: float, n: int) -> float:
    """A priori bound (t * rate / n) * exp(2 * rate * t) on the expected
    mismatch fraction at time t for large n."""
    return t * infection_rate / n * math.exp(2.0 * infection_rate * t)


@dataclass
class CoupledTrajectory:
    """Sampled mismatch fractions and both systems' label counts."""

    times: np.ndarray
    mismatch: np.ndarray
    counts_a: np.ndarray
    counts_b: np.ndarray
    extras: list
    final: CoupledEnsemble


def sample_coupled_initial(ic: InitialCondition, n: int,
                           rng: np.random.Generator) -> CoupledEnsemble:
    """i.i.d. draws from the initial density with equal label vectors."""
    x, theta, labels = ic.sample(n, rng)
    return CoupledEnsemble(wrap(x, ic.side), theta, labels, labels.copy())


def run_coupled(initial: CoupledEnsemble, params: ModelParams, oracle: FieldOracle,
                t_max: float, sample_times, seed: SeedSpec | np.random.Generator,
                observer=None, use_index: bool = False) -> CoupledTrajectory:
    """Event-driven run of the paired process.

    Shared clocks: velocity jumps at rate 1 and recoveries at the recovery
    rate, per agent; infection proposals at the majorant rate per agent,
    dispatched to the maximal-coupling resolution.  Positions advance
    synchronously, so the in-range scan per proposal is a single vectorized
    pass (or an equivalent cell-index query when ``use_index`` is set).
    """
    if t_max < 0:
        raise ConfigError("t_max must be nonnegative")
    st = check_sample_times(sample_times, t_max)
    lo, hi = oracle.span
    if lo > 1e-9 or hi < t_max - 1e-9:
        raise OracleSpanError(f"oracle span [{lo}, {hi}] does not cover [0, {t_max}]")
    rng = seed.rng() if isinstance(seed, SeedSpec) else seed
    state = initial.copy()
    n = state.n
    side = params.side
    r2 = params.radius * params.radius
    lam = params.infection_rate
    rate = n * (1.0 + params.recovery_rate + lam)
    thr_vel = n * 1.0
    thr_rec = thr_vel + n * params.recovery_rate

    x, theta, a, b = state.x, state.theta, state.a, state.b
    x0, x1 = x[:, 0].copy(), x[:, 1].copy()
    cs, sn = np.cos(theta), np.sin(theta)
    buf = np.empty(n)
    cnt = state.counters
    geom = TorusGeometry(side)
    lab_s, lab_i = int(Label.S), int(Label.I)
    probe = oracle.scalar_probe()

    expected = rate * max(t_max - state.t, 0.0)
    draws = BlockDraws(rng, n, block=int(expected + 6.0 * math.sqrt(expected + 1.0)) + 64)

    times, mism, rows_a, rows_b, extras = [], [], [], [], []

    def advance_all(t_to):
        # canonical up to the harmless x == side rounding edge; record() and
        # the final state apply the strict fold
        dt = t_to - state.t
        if dt > 0.0:
            np.multiply(cs, dt, out=buf)
            np.add(x0, buf, out=x0)
            np.mod(x0, side, out=x0)
            np.multiply(sn, dt, out=buf)
            np.add(x1, buf, out=x1)
            np.mod(x1, side, out=x1)
        state.t = t_to

    def record(t_s):
        advance_all(t_s)
        x[:, 0] = wrap(x0, side)
        x[:, 1] = wrap(x1, side)
        times.append(t_s)
        mism.append(float(np.mean(a != b)))
        rows_a.append(state.counts_a())
        rows_b.append(state.counts_b())
        if observer is not None:
            extras.append(observer(state))

    k = 0
    t = state.t
    while True:
        e, cat, i, partner, acc, ang = draws.next_event()
        t_next = t + e / rate
        while k < len(st) and st[k] <= min(t_next, t_max):
            record(st[k])
            k += 1
        if t_next >= t_max:
            break
        advance_all(t_next)
        t = t_next
        u = cat * rate
        if u < thr_vel:
            theta[i] = ang
            cs[i] = math.cos(ang)
            sn[i] = math.sin(ang)
            cnt.velocity_jumps += 1
        elif u < thr_rec:
            ai_inf = a[i] == lab_i
            bi_inf = b[i] == lab_i
            if ai_inf:
                a[i] = Label.R
            if bi_inf:
                b[i] = Label.R
            if ai_inf or bi_inf:
                cnt.recoveries += 1
        else:
            cnt.infection_proposals += 1
            xi0, xi1 = x0[i], x1[i]
            if use_index:
                x[:, 0] = x0
                x[:, 1] = x1
                within = in_range_mask(x, (xi0, xi1), params.radius, geom,
                                       CellIndex(x, params.radius, geom))
            else:
                dx = np.abs(x0 - xi0)
                np.minimum(dx, side - dx, out=dx)
                dy = np.abs(x1 - xi1)
                np.minimum(dy, side - dy, out=dy)
                dx *= dx
                dy *= dy
                dx += dy
                within = dx < r2
            b_in = within & (b == lab_i)
            partner_b = bool(b_in[partner])
            b_in[i] = False
            p = np.count_nonzero(b_in) / n
            q = probe(xi0, xi1, t)
            if q >= p:
                b_attempt = partner_b or acc < (q - p) / (1.0 - p)
            else:
                b_attempt = partner_b and acc < q / p
            if partner != i and within[partner] and a[partner] == lab_i \
                    and a[i] == lab_s:
                a[i] = Label.I
                cnt.infections += 1
            if b_attempt and b[i] == lab_s:
                b[i] = Label.I

    advance_all(t_max)
    x[:, 0] = wrap(x0, side)
    x[:, 1] = wrap(x1, side)
    return CoupledTrajectory(np.asarray(times), np.asarray(mism),
                             np.asarray(rows_a, dtype=np.int64).reshape(-1, 3),
                             np.asarray(rows_b, dtype=np.int64).reshape(-1, 3),
                             extras, state)
