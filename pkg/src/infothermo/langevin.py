"""Overdamped Langevin dynamics of a Brownian particle in a double well.

The quartic family V(x) = a x^4 - b x^2 + c x realizes a one-bit memory:
left basin = outcome 0 (standard), right basin = outcome 1, with the linear
tilt c controlling the basin-weight asymmetry.  Erasure is a time-dependent
protocol (equalize, drop the barrier, push left, restore) integrated with
Euler-Maruyama; work is accumulated at parameter updates only.

Units: k_B = 1, friction gamma and temperature default to 1; all works are
reported in units of T.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

BARRIER_MIN_FACTOR = 8.0  # minimal barrier in units of T at protocol endpoints


class SingleWellError(ValueError):
    """Potential has no interior maximum: not a two-state memory."""


class UnstableTimestepError(ValueError):
    """dt exceeds the overdamped stability budget for this potential."""


@dataclass(frozen=True)
class PotentialSpec:
    """Quartic double well a x^4 - b x^2 + c x on a clamped domain."""

    coefficients: tuple[float, float, float]
    x_min: float = -2.85
    x_max: float = 2.85

    def __post_init__(self):
        a, b, c = (float(v) for v in self.coefficients)
        if not a > 0:
            raise ValueError(f"quartic coefficient must be positive, got {a}")
        if not self.x_min < self.x_max:
            raise ValueError("empty domain")
        object.__setattr__(self, "coefficients", (a, b, c))

    def value(self, x, coefficients=None):
        a, b, c = self.coefficients if coefficients is None else coefficients
        x = np.asarray(x, dtype=float)
        x2 = x * x
        return a * x2 * x2 - b * x2 + c * x

    def gradient(self, x, coefficients=None):
        a, b, c = self.coefficients if coefficients is None else coefficients
        x = np.asarray(x, dtype=float)
        return 4.0 * a * x * x * x - 2.0 * b * x + c

    def curvature_bound(self, coefficients=None) -> float:
        """max |V''| over the clamped domain."""
        a, b, _ = self.coefficients if coefficients is None else coefficients
        edge = max(self.x_min * self.x_min, self.x_max * self.x_max)
        return max(abs(12.0 * a * edge - 2.0 * b), abs(2.0 * b))

    def critical_points(self, coefficients=None) -> np.ndarray:
        a, b, c = self.coefficients if coefficients is None else coefficients
        roots = np.roots([4.0 * a, 0.0, -2.0 * b, c])
        real = roots[np.abs(roots.imag) < 1e-9].real
        inside = real[(real > self.x_min) & (real < self.x_max)]
        return np.sort(inside)

    def barrier_top(self, coefficients=None) -> float:
        """Position of the interior maximum separating the two basins."""
        a, b, c = self.coefficients if coefficients is None else coefficients
        points = self.critical_points((a, b, c))
        curv = 12.0 * a * points * points - 2.0 * b
        tops = points[curv < 0]
        if tops.size != 1:
            raise SingleWellError(
                f"potential {(a, b, c)} has no unique interior maximum")
        return float(tops[0])

    def barrier_height(self, coefficients=None) -> float:
        """min over basins of V(top) - V(basin minimum)."""
        coeffs = self.coefficients if coefficients is None else coefficients
        top = self.barrier_top(coeffs)
        points = self.critical_points(coeffs)
        minima = points[points != top]
        v_top = self.value(top, coeffs)
        depths = v_top - self.value(minima, coeffs)
        return float(depths.min())


def symmetric_double_well(a: float = 1.0, b: float = 6.5) -> PotentialSpec:
    return PotentialSpec((a, b, 0.0))


def require_barrier(pot: PotentialSpec, temperature: float,
                    coefficients=None, factor: float = BARRIER_MIN_FACTOR):
    height = pot.barrier_height(coefficients)
    if height < factor * temperature:
        raise ValueError(
            f"barrier {height:.3f} below the required {factor:.1f} * T "
            f"= {factor * temperature:.3f}")


@dataclass(frozen=True)
class BasinFreeEnergies:
    """Quadrature free energies of the two basins and the derived asymmetry."""

    f_left: float
    f_right: float
    p_eq_left: float
    delta_f: float
    barrier_top: float


def basin_free_energies(pot: PotentialSpec, temperature: float = 1.0,
                        barrier_factor: float = BARRIER_MIN_FACTOR) -> BasinFreeEnergies:
    """Z_k = integral of e^{-V/T} over each basin by adaptive quadrature.

    delta_f is the outcome-averaged free-energy change for equal outcome
    weights with the left basin as the standard state.
    """
    require_barrier(pot, temperature, factor=barrier_factor)
    top = pot.barrier_top()

    def density(x):
        return np.exp(-pot.value(x) / temperature)

    z_left, err_l = integrate.quad(density, pot.x_min, top, epsrel=1e-10, limit=200)
    z_right, err_r = integrate.quad(density, top, pot.x_max, epsrel=1e-10, limit=200)
    for z, err in ((z_left, err_l), (z_right, err_r)):
        if err > 1e-8 * z:
            raise ArithmeticError("basin quadrature did not reach relative error 1e-8")
    f_left = -temperature * np.log(z_left)
    f_right = -temperature * np.log(z_right)
    delta_f = 0.5 * (f_left + f_right) - f_left
    return BasinFreeEnergies(
        f_left=float(f_left),
        f_right=float(f_right),
        p_eq_left=float(z_left / (z_left + z_right)),
        delta_f=float(delta_f),
        barrier_top=top,
    )


def reset_free_energy(pot: PotentialSpec, temperature: float = 1.0) -> float:
    """Free-energy cost -T ln p_eq_left of confining equilibrium to the left basin.

    For an equilibrium-weighted ensemble driven through a completed reset
    protocol (success ~ 1), the exponential work average converges to this
    constrained free-energy change; the unconstrained endpoint difference is
    recovered only through exponentially rare trapped trajectories.
    """
    eq = basin_free_energies(pot, temperature)
    return float(-temperature * np.log(eq.p_eq_left))


def harmonic_basin_free_energy(pot: PotentialSpec, temperature: float,
                               basin: str) -> float:
    """Gaussian (deep-well) approximation -T ln sqrt(2 pi T / V'') + V(x_min)."""
    top = pot.barrier_top()
    points = pot.critical_points()
    minima = points[points != top]
    x0 = minima[minima < top][0] if basin == "left" else minima[minima > top][-1]
    curv = 12.0 * pot.coefficients[0] * x0 * x0 - 2.0 * pot.coefficients[1]
    return float(pot.value(x0) - temperature * np.log(np.sqrt(2.0 * np.pi * temperature / curv)))


def tune_tilt_for_ratio(a: float, b: float, ratio: float,
                        temperature: float = 1.0,
                        domain: tuple[float, float] = (-2.85, 2.85)) -> PotentialSpec:
    """Find the tilt c giving basin weights Z_left : Z_right = ratio : 1."""

    def log_ratio(c):
        pot = PotentialSpec((a, b, c), *domain)
        r = basin_free_energies(pot, temperature, barrier_factor=0.0)
        return np.log(r.p_eq_left / (1.0 - r.p_eq_left)) - np.log(ratio)

    c_star = optimize.brentq(log_ratio, -2.0, 2.0, xtol=1e-12)
    return PotentialSpec((a, b, float(c_star)), *domain)


@dataclass(frozen=True)
class ProtocolSchedule:
    """Piecewise-linear coefficient path lambda(t) through knot values."""

    duration: float
    times: np.ndarray
    knots: np.ndarray  # (n_knots, 3)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        knots = np.asarray(self.knots, dtype=float)
        if times.ndim != 1 or knots.shape != (times.size, 3):
            raise ValueError("times and knots are inconsistent")
        if times[0] != 0.0 or abs(times[-1] - self.duration) > 1e-12:
            raise ValueError("knot times must start at 0 and end at the duration")
        if np.any(np.diff(times) <= 0):
            raise ValueError("knot times must be strictly increasing")
        times.setflags(write=False)
        knots.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "knots", knots)

    def coefficients_at(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty((t.size, 3))
        for j in range(3):
            out[:, j] = np.interp(t, self.times, self.knots[:, j])
        return out

    def is_frozen(self) -> bool:
        return bool(np.all(self.knots == self.knots[0]))

    def to_json(self) -> dict:
        return {
            "duration": self.duration,
            "knots": [
                {"time": float(t), "coefficients": [float(v) for v in row]}
                for t, row in zip(self.times, self.knots)
            ],
        }


def schedule_from_json(payload: dict) -> ProtocolSchedule:
    try:
        duration = float(payload["duration"])
        entries = sorted(payload["knots"], key=lambda e: float(e["time"]))
        times = np.array([float(e["time"]) for e in entries])
        knots = np.array([[float(v) for v in e["coefficients"]] for e in entries])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed schedule payload: {exc}") from exc
    return ProtocolSchedule(duration=duration, times=times, knots=knots)


def load_schedule(path) -> ProtocolSchedule:
    with open(path) as fh:
        return schedule_from_json(json.load(fh))


def frozen_schedule(pot: PotentialSpec, duration: float) -> ProtocolSchedule:
    lam = np.array(pot.coefficients)
    return ProtocolSchedule(duration, np.array([0.0, duration]),
                            np.vstack([lam, lam]))


def erasure_protocol_schedule(pot: PotentialSpec, duration: float,
                              push_tilt: float = None,
                              fractions: tuple[float, float, float, float] = (0.04, 0.46, 0.88, 0.95)
                              ) -> ProtocolSchedule:
    """Default reset-to-left protocol.

    Equalize the basins (tilt to zero) while the barrier holds, drop the
    barrier at zero tilt (the balanced weights stay in equilibrium, so no
    dissipative flow starts), push left in the ergodic single-well regime,
    then restore the barrier along the line c = c_push (1 - b/b0), which
    keeps the left minimum exactly fixed while the barrier rises, ending at
    the initial coefficients.  The default push 4 a |x_well|^3 places the
    single-well minimum at the original left-well position, minimizing the
    transported distance (overdamped drag sets the dissipation).
    """
    a, b, c0 = pot.coefficients
    if push_tilt is None:
        push_tilt = 4.0 * a * (b / (2.0 * a)) ** 1.5
    f1, f2, f3, f4 = fractions
    times = [0.0, f1]
    knots = [[a, b, c0], [a, b, 0.0]]
    # barrier drop graded as b ~ (1-u)^2 so the well positions (at +-sqrt(b/2a))
    # travel at constant speed instead of collapsing singularly at the merge
    grade = np.linspace(0.0, 1.0, 9)[1:]
    for u in grade:
        times.append(f1 + (f2 - f1) * u)
        knots.append([a, b * (1.0 - u) ** 2, 0.0])
    # tilt graded as c ~ u^3 so the single-well minimum (at -(c/4a)^(1/3))
    # departs at constant speed
    for u in grade:
        times.append(f2 + (f3 - f2) * u)
        knots.append([a, 0.0, push_tilt * u ** 3])
    # barrier restore along c = push (1 - b/b0): the left minimum stays fixed
    times.extend([f4, 1.0])
    knots.extend([[a, b, 0.0], [a, b, c0]])
    return ProtocolSchedule(duration, np.array(times) * duration, np.array(knots))


@dataclass(frozen=True)
class EnsembleParams:
    """Simulation controls; initial_weights are the basin occupation odds."""

    n_traj: int
    seed: int
    dt: float = 1e-3
    gamma: float = 1.0
    temperature: float = 1.0
    initial_weights: tuple[float, float] = (0.5, 0.5)

    def __post_init__(self):
        if self.n_traj < 1:
            raise ValueError("n_traj must be >= 1")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        w = self.initial_weights
        if len(w) != 2 or abs(w[0] + w[1] - 1.0) > 1e-12 or min(w) < 0:
            raise ValueError("initial_weights must be a two-entry distribution")


@dataclass(frozen=True)
class TrajectoryEnsemble:
    """Per-trajectory works and final basins with ensemble summaries."""

    params: EnsembleParams
    works: np.ndarray
    final_positions: np.ndarray
    final_basins: np.ndarray       # 0 = left (standard), 1 = right
    trajectory_seeds: np.ndarray
    barrier_top_final: float

    @property
    def mean_work(self) -> float:
        return float(self.works.mean())

    @property
    def stderr(self) -> float:
        if self.works.size < 2:
            return 0.0
        return float(self.works.std(ddof=1) / np.sqrt(self.works.size))

    @property
    def success_fraction(self) -> float:
        return float((self.final_basins == 0).mean())

    @property
    def jarzynski_estimator(self) -> float:
        """-T ln <e^{-W/T}> over the sampled works."""
        t = self.params.temperature
        return float(-t * _log_mean_exp(-self.works / t))

    def summary(self) -> dict:
        return {
            "n_traj": int(self.params.n_traj),
            "seed": int(self.params.seed),
            "dt": self.params.dt,
            "mean_work": self.mean_work,
            "stderr": self.stderr,
            "jarzynski_estimator": self.jarzynski_estimator,
            "success_fraction": self.success_fraction,
        }


_NOISE_BLOCK = 1024
_FILL_THREADS = 4


def _fill_noise(noise: np.ndarray, generators, count: int, pool=None):
    """Fill noise[:count, i] from each trajectory's own stream.

    Streams are independent, threads write disjoint columns, so the result
    is bit-identical regardless of scheduling.  float32 noise is statistically
    indistinguishable here and halves the generation cost.
    """
    n = len(generators)

    def fill_range(bounds):
        lo, hi = bounds
        for i in range(lo, hi):
            noise[:count, i] = generators[i].standard_normal(count, dtype=np.float32)

    if pool is None or n < 2 * _FILL_THREADS:
        fill_range((0, n))
        return
    edges = np.linspace(0, n, _FILL_THREADS + 1).astype(int)
    list(pool.map(fill_range, zip(edges[:-1], edges[1:])))


def _sample_initial_positions(pot: PotentialSpec, temperature: float,
                              weights, generators) -> np.ndarray:
    """Basin mixture, canonical within each basin, by rejection sampling."""
    top = pot.barrier_top()
    spans = ((pot.x_min, top), (top, pot.x_max))
    floors = []
    for lo, hi in spans:
        grid = np.linspace(lo, hi, 512)
        floors.append(pot.value(grid).min())
    out = np.empty(len(generators))
    for i, gen in enumerate(generators):
        basin = 0 if gen.random() < weights[0] else 1
        lo, hi = spans[basin]
        floor = floors[basin]
        while True:
            x = gen.uniform(lo, hi)
            if gen.random() < np.exp(-(pot.value(x) - floor) / temperature):
                out[i] = x
                break
    return out


def check_timestep(pot: PotentialSpec, schedule: ProtocolSchedule,
                   dt: float, gamma: float):
    """Reject dt above a tenth of the stiffest relaxation time on the path."""
    curv = max(pot.curvature_bound(tuple(row)) for row in schedule.knots)
    limit = 0.1 * gamma / curv
    if dt > limit:
        raise UnstableTimestepError(
            f"dt = {dt:.2e} exceeds the stability budget {limit:.2e} "
            f"(max |V''| = {curv:.1f})")


def simulate_erasure(pot: PotentialSpec, schedule: ProtocolSchedule,
                     params: EnsembleParams) -> TrajectoryEnsemble:
    """Integrate the ensemble through the protocol and account the work.

    Euler-Maruyama: x <- x - (1/gamma) V'(x) dt + sqrt(2 T dt / gamma) xi.
    Work is charged at parameter updates only, so a frozen protocol yields
    exactly zero work on every trajectory.
    """
    t_bath = params.temperature
    require_barrier(pot, t_bath, tuple(schedule.knots[0]))
    require_barrier(pot, t_bath, tuple(schedule.knots[-1]))
    check_timestep(pot, schedule, params.dt, params.gamma)

    n_steps = int(round(schedule.duration / params.dt))
    grid = np.arange(n_steps + 1) * params.dt
    lam = schedule.coefficients_at(grid)          # (n_steps + 1, 3)
    dlam = np.diff(lam, axis=0)

    seqs = np.random.SeedSequence(params.seed).spawn(params.n_traj)
    generators = [np.random.Generator(np.random.SFC64(s)) for s in seqs]
    traj_seeds = np.array([s.generate_state(1, np.uint64)[0] for s in seqs],
                          dtype=np.uint64)

    x = _sample_initial_positions(pot, t_bath, params.initial_weights, generators)
    works = np.zeros(params.n_traj)
    drift = params.dt / params.gamma
    kick = np.sqrt(2.0 * t_bath * params.dt / params.gamma)
    noise = np.empty((_NOISE_BLOCK, params.n_traj), dtype=np.float32)
    x2 = np.empty_like(x)
    tmp = np.empty_like(x)
    pool = ThreadPoolExecutor(_FILL_THREADS) if params.n_traj >= 2 * _FILL_THREADS else None

    for j in range(n_steps):
        offset = j % _NOISE_BLOCK
        if offset == 0:
            _fill_noise(noise, generators, min(_NOISE_BLOCK, n_steps - j), pool)
            if np.isnan(x).any():
                bad = int(np.flatnonzero(np.isnan(x))[0])
                raise FloatingPointError(
                    f"trajectory {bad} (seed {traj_seeds[bad]}) diverged")
        a, b, c = lam[j]
        np.multiply(x, x, out=x2)
        np.multiply(x2, x, out=tmp)
        tmp *= -4.0 * a * drift            # -dt/gamma * 4a x^3
        x *= 1.0 + 2.0 * b * drift         # x + dt/gamma * 2b x
        x += tmp
        if c != 0.0:
            x -= c * drift
        np.multiply(noise[offset], kick, out=tmp)
        x += tmp
        np.clip(x, pot.x_min, pot.x_max, out=x)
        da, db, dc = dlam[j]
        if da != 0.0 or db != 0.0 or dc != 0.0:
            np.multiply(x, x, out=x2)
            if da != 0.0:
                np.multiply(x2, x2, out=tmp)
                tmp *= da
                works += tmp
            if db != 0.0:
                np.multiply(x2, -db, out=tmp)
                works += tmp
            if dc != 0.0:
                np.multiply(x, dc, out=tmp)
                works += tmp

    if pool is not None:
        pool.shutdown()
    if np.isnan(x).any():
        bad = int(np.flatnonzero(np.isnan(x))[0])
        raise FloatingPointError(f"trajectory {bad} (seed {traj_seeds[bad]}) diverged")

    top_final = pot.barrier_top(tuple(lam[-1]))
    basins = (x >= top_final).astype(int)
    return TrajectoryEnsemble(
        params=params,
        works=works,
        final_positions=x,
        final_basins=basins,
        trajectory_seeds=traj_seeds,
        barrier_top_final=top_final,
    )


@dataclass(frozen=True)
class JarzynskiReport:
    """Exponential-average free-energy estimate vs an independent expectation."""

    estimator: float
    expected: float
    stderr: float
    z_score: float
    effective_sample_size: float
    flagged: bool            # |z| > 3
    low_ess_warning: bool    # effective sample size < 10

    def to_json(self) -> dict:
        return {
            "estimator": self.estimator,
            "expected": self.expected,
            "stderr": self.stderr,
            "z_score": self.z_score,
            "effective_sample_size": self.effective_sample_size,
            "flagged": self.flagged,
            "low_ess_warning": self.low_ess_warning,
        }


def _log_mean_exp(values: np.ndarray) -> float:
    m = values.max()
    return float(m + np.log(np.mean(np.exp(values - m))))


def jarzynski_check(ensemble: TrajectoryEnsemble, delta_f: float,
                    temperature: float = None, n_bootstrap: int = 200
                    ) -> JarzynskiReport:
    """Compare -T ln <e^{-W/T}> against an independently computed delta_f.

    The expectation presumes an equilibrium initial ensemble; the z-score is
    measured against a seeded bootstrap standard error of the estimator.
    """
    t = ensemble.params.temperature if temperature is None else temperature
    w = ensemble.works
    scaled = -w / t
    estimator = -t * _log_mean_exp(scaled)

    rng = np.random.default_rng([ensemble.params.seed, 74])
    n = w.size
    boots = np.empty(n_bootstrap)
    for i in range(n_bootstrap):
        idx = rng.integers(0, n, size=n)
        boots[i] = -t * _log_mean_exp(scaled[idx])
    stderr = float(boots.std(ddof=1)) if n_bootstrap > 1 else 0.0

    weights = np.exp(scaled - scaled.max())
    ess = float(weights.sum() ** 2 / np.sum(weights ** 2))
    z = (estimator - delta_f) / stderr if stderr > 0 else 0.0
    return JarzynskiReport(
        estimator=float(estimator),
        expected=float(delta_f),
        stderr=stderr,
        z_score=float(z),
        effective_sample_size=ess,
        flagged=bool(abs(z) > 3.0),
        low_ess_warning=bool(ess < 10.0),
    )


def equilibrium_positions(pot: PotentialSpec, temperature: float, n_traj: int,
                          seed: int, duration: float = 5.0,
                          dt: float = 1e-3) -> np.ndarray:
    """Independent equilibrium samples: frozen protocol, one sample per trajectory."""
    eq = basin_free_energies(pot, temperature)
    params = EnsembleParams(
        n_traj=n_traj, seed=seed, dt=dt, temperature=temperature,
        initial_weights=(eq.p_eq_left, 1.0 - eq.p_eq_left))
    ensemble = simulate_erasure(pot, frozen_schedule(pot, duration), params)
    return ensemble.final_positions
