"""Quench-and-thermalize protocol engine with work/heat accounting.

Measurement and erasure processes on a multi-branch memory are realized as
discrete sequences of two step kinds:

* Quench: level energies change instantaneously; the work ledger receives
  sum_s p(s) [E_new(s) - E_old(s)] and the distribution is untouched.
* Thermalize: the distribution relaxes to the canonical one, either within
  each branch (barrier in place) or across all branches (barrier removed);
  the heat ledger receives sum_s [p_new(s) - p_old(s)] E(s).

Level energies are capped at E_CAP_FACTOR * T during raise schedules; the
population beyond the cap is below e^-50 and is accounted for as the erasure
residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .measurement import MeasurementModel, qc_mutual_information, shannon_entropy
from .memory import (
    ERASURE_BOUND,
    MEASUREMENT_BOUND,
    RECONCILIATION_BOUND,
    SUM_BOUND,
    BoundReport,
    MemoryLayout,
    bound_report,
    free_energies,
    random_layout,
    twobox_layout,
)
from .numerics import POLICY
from .operators import DensityOperator, temperature_value

E_CAP_FACTOR = 50.0

WITHIN = "within"
ACROSS = "across"


class NotAnErasureError(ValueError):
    """Schedule left more than the allowed residual outside the standard branch."""


class InvalidScheduleError(ValueError):
    """Conditional schedule does not realize the requested branch state."""


@dataclass(frozen=True)
class Quench:
    """Instantaneous change of all level energies (branch-major vector)."""

    energies: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float).copy()
        e.setflags(write=False)
        object.__setattr__(self, "energies", e)


@dataclass(frozen=True)
class Thermalize:
    """Canonical relaxation; scope is "within" (per branch) or "across"."""

    scope: str = WITHIN

    def __post_init__(self):
        if self.scope not in (WITHIN, ACROSS):
            raise ValueError(f"unknown thermalize scope {self.scope!r}")


Step = Quench | Thermalize


@dataclass(frozen=True)
class ProtocolRecord:
    """Executed protocol with its energy bookkeeping.

    The first law holds exactly: final_energy - initial_energy = work + heat
    up to float accumulation.  Aggregated (outcome-averaged) records keep the
    per-outcome runs in ``components``.
    """

    layout: MemoryLayout
    temperature: float
    steps: tuple[Step, ...]
    work: float
    heat: float
    initial_energy: float
    final_energy: float
    initial_distribution: np.ndarray
    final_distribution: np.ndarray
    components: tuple["ProtocolRecord", ...] = field(default=())

    def first_law_residual(self) -> float:
        return (self.final_energy - self.initial_energy) - (self.work + self.heat)

    def branch_weights(self, which: str = "final") -> np.ndarray:
        dist = self.final_distribution if which == "final" else self.initial_distribution
        return np.array([dist[s].sum() for s in self.layout.branch_slices()])

    def to_json(self) -> dict:
        return {
            "temperature": self.temperature,
            "n_steps": len(self.steps),
            "work": self.work,
            "heat": self.heat,
            "initial_energy": self.initial_energy,
            "final_energy": self.final_energy,
            "first_law_residual": self.first_law_residual(),
            "initial_branch_weights": self.branch_weights("initial").tolist(),
            "final_branch_weights": self.branch_weights("final").tolist(),
        }


def _gibbs(energies: np.ndarray, t: float) -> np.ndarray:
    w = np.exp(-(energies - energies.min()) / t)
    return w / w.sum()


def branch_canonical_distribution(layout: MemoryLayout, temperature,
                                  branch_weights) -> np.ndarray:
    """Level populations: canonical within each branch, given branch weights."""
    t = temperature_value(temperature)
    p = np.asarray(branch_weights, dtype=float)
    if p.size != layout.outcome_count:
        raise ValueError("branch weight vector length must match the outcome count")
    dist = np.empty(layout.total_dim)
    for k, s in enumerate(layout.branch_slices()):
        dist[s] = p[k] * _gibbs(layout.energies[k], t)
    return dist


def run_schedule(layout: MemoryLayout, temperature, initial_distribution,
                 steps) -> ProtocolRecord:
    """Execute a step sequence and return the full work/heat record."""
    t = temperature_value(temperature)
    dist = np.asarray(initial_distribution, dtype=float).copy()
    if dist.size != layout.total_dim:
        raise ValueError("distribution length must match the layout dimension")
    energies = layout.level_energies().copy()
    slices = layout.branch_slices()

    initial_energy = float(dist @ energies)
    work = 0.0
    heat = 0.0
    executed = []
    for step in steps:
        if isinstance(step, Quench):
            new_e = step.energies
            if new_e.size != energies.size:
                raise ValueError("quench energy vector has wrong length")
            work += float(dist @ (new_e - energies))
            energies = new_e.copy()
        elif isinstance(step, Thermalize):
            if step.scope == ACROSS:
                new_dist = _gibbs(energies, t)
            else:
                new_dist = np.empty_like(dist)
                for s in slices:
                    mass = dist[s].sum()
                    new_dist[s] = mass * _gibbs(energies[s], t)
            heat += float((new_dist - dist) @ energies)
            dist = new_dist
        else:
            raise TypeError(f"unknown step {step!r}")
        executed.append(step)
    final_energy = float(dist @ energies)
    return ProtocolRecord(
        layout=layout,
        temperature=t,
        steps=tuple(executed),
        work=work,
        heat=heat,
        initial_energy=initial_energy,
        final_energy=final_energy,
        initial_distribution=np.asarray(initial_distribution, dtype=float).copy(),
        final_distribution=dist,
    )


def _ramp_fractions(n_steps: int) -> np.ndarray:
    """Geometric energy ramp: fine steps at low energy, coarse near the cap."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    j = np.arange(1, n_steps + 1) / n_steps
    ratio = E_CAP_FACTOR  # cap expressed in units of T
    return (np.power(1.0 + ratio, j) - 1.0) / ratio


def _alignment_shifts(layout: MemoryLayout, t: float, p: np.ndarray,
                      e_max: float) -> np.ndarray:
    """Per-branch uniform shifts making the global Gibbs weights equal p.

    Branch 0 is the reference (shift 0).  Empty branches are parked at the
    cap directly.
    """
    z = np.array([np.sum(np.exp(-e / t)) for e in layout.energies])
    f = -t * np.log(z)
    shifts = np.zeros(layout.outcome_count)
    for k in range(1, layout.outcome_count):
        if p[k] <= 1e-15:
            shifts[k] = e_max - layout.energies[k].min()
        else:
            shifts[k] = t * np.log(p[0] / p[k]) - f[k] + f[0]
    return shifts


def erasure_schedule(layout: MemoryLayout, temperature, branch_weights,
                     n_steps: int, e_max: float = None) -> list[Step]:
    """Standard reset-to-branch-0 schedule saturating the erasure bound as n grows.

    Align the non-standard branches so the barrier can come out reversibly,
    raise them to the cap under across-branch thermalization, re-insert the
    barrier, and restore the original energies.
    """
    t = temperature_value(temperature)
    p = np.asarray(branch_weights, dtype=float)
    e_max = E_CAP_FACTOR * t if e_max is None else e_max
    base = layout.level_energies()
    branch = layout.branch_of_level()
    shifts = _alignment_shifts(layout, t, p, e_max)

    steps: list[Step] = []
    aligned = base + shifts[branch]
    steps.append(Quench(aligned))
    steps.append(Thermalize(ACROSS))
    raised_mask = branch != 0
    target = np.where(raised_mask, e_max, aligned)
    for frac in _ramp_fractions(n_steps):
        steps.append(Quench(aligned * (1.0 - frac) + target * frac))
        steps.append(Thermalize(ACROSS))
    steps.append(Thermalize(WITHIN))  # barrier back in
    steps.append(Quench(base))        # restore the memory Hamiltonian
    steps.append(Thermalize(WITHIN))
    return steps


def run_erasure_protocol(layout: MemoryLayout, temperature, branch_weights,
                         schedule, eps_residual: float = 1e-6
                         ) -> tuple[ProtocolRecord, BoundReport]:
    """Run an erasure schedule and verify the work against T H(p) - dF.

    The initial state is canonical within each branch with the supplied
    branch weights.  A schedule leaving more than eps_residual outside the
    standard branch is rejected.
    """
    t = temperature_value(temperature)
    p = np.asarray(branch_weights, dtype=float)
    initial = branch_canonical_distribution(layout, t, p)
    record = run_schedule(layout, t, initial, schedule)

    final_energies = layout.level_energies()
    executed = [s for s in record.steps if isinstance(s, Quench)]
    if executed and np.max(np.abs(executed[-1].energies - final_energies)) > POLICY.validation:
        raise InvalidScheduleError("schedule must restore the original level energies")
    residual = 1.0 - record.branch_weights("final")[0]
    if residual > eps_residual:
        raise NotAnErasureError(
            f"residual probability {residual:.3e} outside the standard branch "
            f"exceeds {eps_residual:.1e}")

    rhs = t * shannon_entropy(p) - free_energies(layout, t, p).delta_f
    return record, bound_report(ERASURE_BOUND, record.work, rhs)


def measurement_transport_schedule(layout: MemoryLayout, temperature, outcome: int,
                                   n_steps: int, e_max: float = None) -> list[Step]:
    """Conditional schedule moving the memory from branch 0 to ``outcome``.

    Two ramps of n_steps each: the target branch descends from the cap to its
    levels (steps refined near the populated low-energy end), then the
    standard branch rises to the cap; both keep the population flow in the
    finely-stepped regime, so the dissipation stays O(1/n).
    """
    t = temperature_value(temperature)
    e_max = E_CAP_FACTOR * t if e_max is None else e_max
    if outcome == 0:
        return []
    base = layout.level_energies()
    branch = layout.branch_of_level()
    up = _ramp_fractions(n_steps)
    down = 1.0 - np.concatenate(([0.0], up))[-2::-1]  # fine increments at the end

    steps: list[Step] = []
    parked = np.where(branch == 0, base, e_max)
    steps.append(Quench(parked))       # empty branches parked at the cap
    steps.append(Thermalize(ACROSS))
    descended = np.where(branch == outcome, base, parked)
    for frac in down:
        steps.append(Quench(parked * (1.0 - frac) + descended * frac))
        steps.append(Thermalize(ACROSS))
    raised = np.where(branch == 0, e_max, descended)
    for frac in up:
        steps.append(Quench(descended * (1.0 - frac) + raised * frac))
        steps.append(Thermalize(ACROSS))
    steps.append(Thermalize(WITHIN))
    steps.append(Quench(base))
    steps.append(Thermalize(WITHIN))
    return steps


def run_measurement_process(layout: MemoryLayout, temperature,
                            model: MeasurementModel, rho_s: DensityOperator,
                            schedules=None, n_steps: int = 10_000,
                            eps_residual: float = 1e-6
                            ) -> tuple[ProtocolRecord, BoundReport]:
    """Outcome-averaged work of storing a measurement result in the memory.

    The memory starts canonical in the standard branch; for each outcome k a
    conditional schedule transports it to branch k.  System-memory energy
    flows are charged to work, so the averaged ledger work is compared
    against -T (H - I) + dF.
    """
    t = temperature_value(temperature)
    if model.outcome_count != layout.outcome_count:
        raise ValueError("measurement outcomes must match the memory branches")
    if not rho_s.is_diagonal():
        raise ValueError("classical mode requires a diagonal system state")
    probs = np.array([np.trace(e @ rho_s.entries).real for e in model.effects])
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()

    if schedules is None:
        schedules = [measurement_transport_schedule(layout, t, k, n_steps)
                     for k in range(layout.outcome_count)]
    if len(schedules) != layout.outcome_count:
        raise InvalidScheduleError("one conditional schedule per outcome required")

    start = branch_canonical_distribution(
        layout, t, np.eye(layout.outcome_count)[0])
    components = []
    for k, sched in enumerate(schedules):
        rec = run_schedule(layout, t, start, sched)
        if probs[k] > 1e-15:
            landed = rec.branch_weights("final")[k]
            if 1.0 - landed > eps_residual:
                raise InvalidScheduleError(
                    f"conditional schedule {k} leaves weight {1.0 - landed:.3e} "
                    f"outside branch {k}")
        components.append(rec)

    work = float(sum(p * r.work for p, r in zip(probs, components)))
    heat = float(sum(p * r.heat for p, r in zip(probs, components)))
    record = ProtocolRecord(
        layout=layout,
        temperature=t,
        steps=(),
        work=work,
        heat=heat,
        initial_energy=float(sum(p * r.initial_energy for p, r in zip(probs, components))),
        final_energy=float(sum(p * r.final_energy for p, r in zip(probs, components))),
        initial_distribution=start,
        final_distribution=sum(p * r.final_distribution for p, r in zip(probs, components)),
        components=tuple(components),
    )

    h = shannon_entropy(probs)
    info = qc_mutual_information(rho_s, model)
    rhs = -t * (h - info) + free_energies(layout, t, probs).delta_f
    return record, bound_report(MEASUREMENT_BOUND, record.work, rhs)


def verify_sum_bound(meas: ProtocolRecord, eras: ProtocolRecord, info: float,
                     temperature) -> BoundReport:
    """Combined bound: W_meas + W_eras >= T * I for a consistent record pair."""
    t = temperature_value(temperature)
    if abs(meas.temperature - t) > POLICY.validation or abs(eras.temperature - t) > POLICY.validation:
        raise ValueError("records were not computed at the requested temperature")
    if meas.layout.branch_dims != eras.layout.branch_dims or any(
        np.max(np.abs(a - b)) > POLICY.validation
        for a, b in zip(meas.layout.energies, eras.layout.energies)
    ):
        raise ValueError("records use different memory layouts")
    p_meas = meas.branch_weights("final")
    p_eras = eras.branch_weights("initial")
    if np.max(np.abs(p_meas - p_eras)) > 1e-6:
        raise ValueError("erasure initial weights differ from measurement outcome weights")
    return bound_report(SUM_BOUND, meas.work + eras.work, t * info)


def reconcile_demon(w_extracted: float, delta_f_system: float,
                    meas: ProtocolRecord, eras: ProtocolRecord) -> BoundReport:
    """Second-law consistency of the full engine + memory cycle.

    lhs = W_ext^S - W_meas - W_eras must not exceed rhs = -dF^S.
    """
    lhs = w_extracted - meas.work - eras.work
    return bound_report(RECONCILIATION_BOUND, lhs, -delta_f_system)


# ---------------------------------------------------------------------------
# Convergence diagnostics and randomized verification suites

def erasure_convergence(layout: MemoryLayout, temperature, branch_weights,
                        step_grid) -> list[dict]:
    """Rows (n_steps, W, bound, margin) for quasi-static convergence plots."""
    rows = []
    for n in step_grid:
        sched = erasure_schedule(layout, temperature, branch_weights, int(n))
        record, report = run_erasure_protocol(layout, temperature, branch_weights, sched)
        rows.append({
            "n_steps": int(n),
            "W": record.work,
            "bound": report.rhs,
            "margin": report.margin,
        })
    return rows


def _random_weights(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.dirichlet(np.ones(n))


def fuzzed_erasure_schedule(rng: np.random.Generator, layout: MemoryLayout,
                            temperature, branch_weights) -> list[Step]:
    """Random but valid erasure: arbitrary detours, then a terminal reset push."""
    t = temperature_value(temperature)
    base = layout.level_energies()
    steps: list[Step] = []
    for _ in range(int(rng.integers(0, 6))):
        detour = base + rng.uniform(-1.0, 3.0, size=base.size) * t
        steps.append(Quench(detour))
        steps.append(Thermalize(ACROSS if rng.random() < 0.5 else WITHIN))
    steps.append(Quench(base))  # rejoin the nominal path before the reset tail
    steps.append(Thermalize(WITHIN))
    steps.extend(erasure_schedule(layout, t, branch_weights,
                                  n_steps=int(rng.integers(2, 60))))
    return steps


def erasure_bound_suite(seed: int, n_instances: int, n_steps: int = None,
                        fuzz: bool = False, temperature: float = 1.0) -> list[dict]:
    """Randomized erasure-bound margins; each instance replayable by (seed, index)."""
    results = []
    for i in range(n_instances):
        rng = np.random.default_rng([seed, i])
        layout = random_layout(rng)
        p = _random_weights(rng, layout.outcome_count)
        if fuzz:
            sched = fuzzed_erasure_schedule(rng, layout, temperature, p)
        else:
            n = int(rng.choice([2, 10, 100])) if n_steps is None else n_steps
            sched = erasure_schedule(layout, temperature, p, n)
        record, report = run_erasure_protocol(layout, temperature, p, sched)
        results.append({
            "index": i,
            "seed": seed,
            "margin": report.margin,
            "work": record.work,
            "bound": report.rhs,
            "satisfied": report.satisfied,
        })
    return results


def measurement_bound_suite(seed: int, n_instances: int, n_steps: int = None,
                            temperature: float = 1.0) -> list[dict]:
    """Randomized classical measurement-bound margins (and the paired sum bound)."""
    from .measurement import random_classical_model

    results = []
    for i in range(n_instances):
        rng = np.random.default_rng([seed, i])
        layout = random_layout(rng)
        dim_s = int(rng.integers(2, 5))
        model = random_classical_model(rng, dim_s, layout.outcome_count)
        rho_s = DensityOperator(np.diag(_random_weights(rng, dim_s)).astype(complex))
        n = int(rng.choice([2, 10, 100])) if n_steps is None else n_steps
        meas_record, meas_report = run_measurement_process(
            layout, temperature, model, rho_s, n_steps=n)
        p = meas_record.branch_weights("final")
        eras_sched = erasure_schedule(layout, temperature, p, n)
        eras_record, eras_report = run_erasure_protocol(layout, temperature, p, eras_sched)
        info = qc_mutual_information(rho_s, model)
        sum_report = verify_sum_bound(meas_record, eras_record, info, temperature)
        results.append({
            "index": i,
            "seed": seed,
            "measurement_margin": meas_report.margin,
            "erasure_margin": eras_report.margin,
            "sum_margin": sum_report.margin,
            "w_meas": meas_record.work,
            "w_eras": eras_record.work,
            "information": info,
        })
    return results


def szilard_reconciliation(t: float, temperature: float = 1.0,
                           n_steps: int = 10_000) -> BoundReport:
    """Second-law check for a one-bit feedback engine backed by a two-box memory.

    The engine extracts T ln 2 per cycle at zero system free-energy change;
    the memory runs its error-free measurement and erasure protocols at
    asymmetry t.
    """
    temp = temperature_value(temperature)
    layout = twobox_layout(t, temp)
    model = MeasurementModel((
        (np.diag([1.0, 0.0]).astype(complex),),
        (np.diag([0.0, 1.0]).astype(complex),),
    ))
    rho_s = DensityOperator(np.diag([0.5, 0.5]).astype(complex))
    meas_record, _ = run_measurement_process(layout, temp, model, rho_s, n_steps=n_steps)
    p = meas_record.branch_weights("final")
    eras_record, _ = run_erasure_protocol(
        layout, temp, p, erasure_schedule(layout, temp, p, n_steps))
    w_extracted = temp * np.log(2.0)
    return reconcile_demon(w_extracted, 0.0, meas_record, eras_record)
