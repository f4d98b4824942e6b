"""Quantum measurement statistics and information measures.

POVM measurement models grouped by outcome, Shannon entropy of the outcome
distribution, the quantum-classical mutual information of a measurement, and
the construction of measurement operators from a classical (permutation)
system-memory interaction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import POLICY
from .operators import (
    DensityOperator,
    entropy_of_matrix,
    matrix_from_json,
    matrix_to_json,
    von_neumann_entropy,
)


class InvalidMeasurementError(ValueError):
    """Measurement operators do not form a valid POVM."""


class ReconstructionError(ValueError):
    """Classical decomposition failed to reproduce the post-measurement state."""


def shannon_entropy(probabilities) -> float:
    """-sum(p ln p) in nats over a probability vector, 0 ln 0 = 0."""
    p = np.asarray(probabilities, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("expected a 1-d probability vector")
    if p.min() < -POLICY.support:
        raise ValueError(f"negative probability {p.min():.3e}")
    total = p.sum()
    if abs(total - 1.0) > POLICY.povm:
        raise ValueError(f"probabilities sum to {total!r}, not 1")
    pos = p[p > POLICY.eig_clamp]
    return max(float(-np.sum(pos * np.log(pos))), 0.0)


def _hermitian_sqrt(effect: np.ndarray) -> np.ndarray:
    """Square root of a PSD Hermitian matrix; negative roundoff clamped to 0."""
    vals, vecs = np.linalg.eigh(effect)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


@dataclass(frozen=True)
class MeasurementModel:
    """Measurement operators grouped by outcome, with derived effects.

    ``operators[k]`` is the tuple of operators whose adjoint products sum to
    the effect of outcome k; an outcome may carry an empty tuple (zero
    effect).  The effects must be positive semidefinite and sum to the
    identity.
    """

    operators: tuple[tuple[np.ndarray, ...], ...]
    effects: tuple[np.ndarray, ...] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.operators:
            raise InvalidMeasurementError("measurement model has no outcomes")
        dim = None
        groups = []
        for group in self.operators:
            ops = []
            for op in group:
                m = np.asarray(op, dtype=complex)
                if m.ndim != 2 or m.shape[0] != m.shape[1]:
                    raise InvalidMeasurementError(f"operator has shape {m.shape}")
                if dim is None:
                    dim = m.shape[0]
                elif m.shape[0] != dim:
                    raise InvalidMeasurementError("operators have mixed dimensions")
                m.setflags(write=False)
                ops.append(m)
            groups.append(tuple(ops))
        if dim is None:
            raise InvalidMeasurementError("measurement model has no operators")
        effects = []
        for ops in groups:
            e = np.zeros((dim, dim), dtype=complex)
            for m in ops:
                e += m.conj().T @ m
            if np.linalg.eigvalsh(e).min() < -POLICY.validation:
                raise InvalidMeasurementError("effect has a negative eigenvalue")
            e.setflags(write=False)
            effects.append(e)
        total = sum(effects)
        dev = np.max(np.abs(total - np.eye(dim)))
        if dev > POLICY.povm:
            raise InvalidMeasurementError(
                f"effects do not sum to identity: max deviation {dev:.3e}")
        object.__setattr__(self, "operators", tuple(groups))
        object.__setattr__(self, "effects", tuple(effects))

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    @property
    def outcome_count(self) -> int:
        return len(self.operators)

    def is_diagonal(self, tol: float = None) -> bool:
        tol = POLICY.validation if tol is None else tol
        return all(
            np.max(np.abs(e - np.diag(np.diag(e)))) <= tol for e in self.effects
        )


def projective_model(dim: int) -> MeasurementModel:
    """Rank-1 projective measurement in the computational basis."""
    eye = np.eye(dim, dtype=complex)
    return MeasurementModel(tuple((np.outer(eye[k], eye[k]),) for k in range(dim)))


def trivial_model(weights, dim: int) -> MeasurementModel:
    """Outcome-independent POVM E_k = q_k * identity (no information gained)."""
    q = np.asarray(weights, dtype=float)
    if abs(q.sum() - 1.0) > POLICY.povm or q.min() < 0:
        raise InvalidMeasurementError("weights must form a probability vector")
    eye = np.eye(dim, dtype=complex)
    return MeasurementModel(tuple((np.sqrt(qk) * eye,) for qk in q))


def model_from_effects(effects) -> MeasurementModel:
    """One-operator-per-outcome model M_k = sqrt(E_k)."""
    return MeasurementModel(tuple((_hermitian_sqrt(np.asarray(e, dtype=complex)),)
                                  for e in effects))


def random_model(rng: np.random.Generator, dim: int, n_outcomes: int,
                 ops_per_outcome: int = 1) -> MeasurementModel:
    """Random POVM, optionally split into several operators per outcome."""
    raw = []
    for _ in range(n_outcomes):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        raw.append(g @ g.conj().T)
    total = sum(raw)
    vals, vecs = np.linalg.eigh(total)
    inv_sqrt = (vecs / np.sqrt(vals)) @ vecs.conj().T
    groups = []
    for a in raw:
        effect = inv_sqrt @ a @ inv_sqrt
        root = _hermitian_sqrt(effect)
        if ops_per_outcome == 1:
            groups.append((root,))
            continue
        shares = rng.dirichlet(np.ones(ops_per_outcome))
        ops = []
        for c in shares:
            g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            q, r = np.linalg.qr(g)
            u = q * (np.diag(r) / np.abs(np.diag(r)))
            ops.append(np.sqrt(c) * u @ root)
        groups.append(tuple(ops))
    return MeasurementModel(tuple(groups))


def random_classical_model(rng: np.random.Generator, dim: int,
                           n_outcomes: int) -> MeasurementModel:
    """Random diagonal POVM: per basis state, a random response distribution."""
    response = rng.dirichlet(np.ones(n_outcomes), size=dim)  # (dim, n_outcomes)
    groups = tuple((np.diag(np.sqrt(response[:, k])).astype(complex),)
                   for k in range(n_outcomes))
    return MeasurementModel(groups)


@dataclass(frozen=True)
class OutcomeStatistics:
    """Outcome probabilities and unnormalized conditional states of a measurement.

    sigma[k] = sqrt(E_k) rho sqrt(E_k) carries trace p_k; sub_probabilities[k][i]
    is the probability routed through operator i of outcome k.
    """

    probabilities: np.ndarray
    sub_probabilities: tuple[np.ndarray, ...]
    sigma: tuple[np.ndarray, ...]

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if abs(p.sum() - 1.0) > POLICY.povm:
            raise ValueError(f"outcome probabilities sum to {p.sum()!r}")
        for k, (pk, sub) in enumerate(zip(p, self.sub_probabilities)):
            if abs(pk - sub.sum()) > POLICY.validation:
                raise ValueError(f"outcome {k}: sub-probabilities sum {sub.sum()!r} != {pk!r}")
            tr = np.trace(self.sigma[k]).real
            if abs(tr - pk) > POLICY.povm:
                raise ValueError(f"outcome {k}: tr(sigma) {tr!r} != p {pk!r}")


def outcome_statistics(rho: DensityOperator, model: MeasurementModel) -> OutcomeStatistics:
    """Probabilities p_k, per-operator p_ki and conditional sigma_k for rho."""
    if rho.dim != model.dim:
        raise ValueError("state and measurement dimensions differ")
    probs = []
    subs = []
    sigmas = []
    for ops, effect in zip(model.operators, model.effects):
        root = _hermitian_sqrt(effect)
        sigma = root @ rho.entries @ root
        sub = np.array([np.trace(m.conj().T @ m @ rho.entries).real for m in ops])
        pk = np.trace(effect @ rho.entries).real
        probs.append(max(pk, 0.0))
        subs.append(np.clip(sub, 0.0, None))
        sigmas.append(sigma)
    return OutcomeStatistics(np.array(probs), tuple(subs), tuple(sigmas))


def qc_mutual_information(rho: DensityOperator, model: MeasurementModel) -> float:
    """Information gained about rho by the measurement, in nats.

    Computed from the defining expression
        S(rho) + H(p) + sum_k tr[sigma_k ln sigma_k],  sigma_k = sqrt(E_k) rho sqrt(E_k),
    and cross-checked against the equivalent conditional-entropy form
        S(rho) - sum_k p_k S(sigma_k / p_k).
    The two routes use independent matrix-function paths; disagreement beyond
    tolerance raises, catching matrix-function bugs.
    """
    stats = outcome_statistics(rho, model)
    s_rho = von_neumann_entropy(rho)
    h = shannon_entropy(stats.probabilities)
    sigma_entropy = sum(entropy_of_matrix(s) for s in stats.sigma)
    info = s_rho + h - sigma_entropy

    conditional = 0.0
    for pk, sigma in zip(stats.probabilities, stats.sigma):
        if pk > POLICY.eig_clamp:
            conditional += pk * entropy_of_matrix(sigma / pk)
    alt = s_rho - conditional
    if abs(info - alt) > POLICY.identity:
        raise ArithmeticError(
            f"mutual-information routes disagree: {info!r} vs {alt!r}")
    return info


# ---------------------------------------------------------------------------
# Classical decomposition of a permutation interaction

def _permutation_map(unitary: np.ndarray) -> np.ndarray:
    """dest[j] for a 0/1 permutation matrix U with U[dest, src] = 1."""
    u = np.asarray(unitary)
    dim = u.shape[0]
    if u.shape != (dim, dim):
        raise ValueError("interaction must be a square matrix")
    if np.max(np.abs(u - np.rint(u.real))) > POLICY.validation or np.max(np.abs(u.imag)) > POLICY.validation:
        raise ValueError("interaction is not a permutation matrix (non 0/1 entries)")
    b = np.rint(u.real).astype(int)
    if not ((b.sum(axis=0) == 1).all() and (b.sum(axis=1) == 1).all() and ((b == 0) | (b == 1)).all()):
        raise ValueError("interaction is not a permutation matrix")
    return b.argmax(axis=0)


def _require_diagonal(state: DensityOperator, name: str) -> np.ndarray:
    if not state.is_diagonal():
        raise ValueError(f"{name} must be diagonal in the computational basis")
    return state.diagonal()


@dataclass(frozen=True)
class ClassicalDecomposition:
    """Result of decomposing a permutation interaction into measurement operators."""

    model: MeasurementModel
    mb_destinations: tuple[int, ...]  # MB basis label each operator writes to
    reconstruction: np.ndarray        # assembled SMB state
    target: np.ndarray                # post-projection state P_k U rho U+ P_k
    max_deviation: float


def post_measurement_state(unitary: np.ndarray, rho_s: DensityOperator,
                           rho_mb: DensityOperator) -> np.ndarray:
    """Brute-force post-projection SMB state for diagonal classical inputs.

    For diagonal rho_S (x) rho_MB and a permutation interaction the projected
    state is the permuted joint diagonal itself.
    """
    q = _require_diagonal(rho_s, "rho_s")
    r = _require_diagonal(rho_mb, "rho_mb")
    joint = np.kron(q, r)
    dest = _permutation_map(unitary)
    out = np.zeros_like(joint)
    out[dest] = joint
    return np.diag(out).astype(complex)


def classical_decompose(unitary: np.ndarray, rho_s: DensityOperator,
                        rho_mb: DensityOperator, branch_of_mb,
                        return_details: bool = False):
    """Measurement operators realizing a classical memory-system interaction.

    Parameters
    ----------
    unitary:
        Permutation matrix on the joint S (x) MB space (S-major ordering).
    rho_s, rho_mb:
        Diagonal initial states of the system and of memory+bath.
    branch_of_mb:
        Integer array mapping each MB basis index to its outcome branch
        (memory subspace label); defines the outcome grouping.
    return_details:
        When true, also return the reconstruction diagnostics.

    One operator is emitted per (occupied MB source, MB destination) pair;
    each is a scaled partial permutation on S, so the assembled state
    reproduces the post-projection state exactly.  The reconstruction check
    is always on and raises ReconstructionError with the max deviation if it
    fails.
    """
    q = _require_diagonal(rho_s, "rho_s")
    r = _require_diagonal(rho_mb, "rho_mb")
    branch = np.asarray(branch_of_mb, dtype=int)
    dim_s = rho_s.dim
    dim_mb = rho_mb.dim
    if branch.shape != (dim_mb,):
        raise ValueError("branch map length must match the MB dimension")
    dest = _permutation_map(unitary)
    if dest.size != dim_s * dim_mb:
        raise ValueError("interaction dimension must equal dim_S * dim_MB")
    n_outcomes = int(branch.max()) + 1

    # operators keyed by (MB destination, MB source); entries sqrt(r_source)
    ops: dict[tuple[int, int], np.ndarray] = {}
    for src_s in range(dim_s):
        for src_mb in range(dim_mb):
            if r[src_mb] <= POLICY.eig_clamp:
                continue
            d = dest[src_s * dim_mb + src_mb]
            dst_s, dst_mb = divmod(d, dim_mb)
            key = (dst_mb, src_mb)
            if key not in ops:
                ops[key] = np.zeros((dim_s, dim_s), dtype=complex)
            ops[key][dst_s, src_s] = np.sqrt(r[src_mb])

    groups: list[list[np.ndarray]] = [[] for _ in range(n_outcomes)]
    labels: list[list[int]] = [[] for _ in range(n_outcomes)]
    for (dst_mb, _src_mb), m in sorted(ops.items()):
        k = branch[dst_mb]
        groups[k].append(m)
        labels[k].append(dst_mb)
    model = MeasurementModel(tuple(tuple(g) for g in groups))

    # always-on verification against the brute-force post-projection state
    target = post_measurement_state(unitary, rho_s, rho_mb)
    recon = np.zeros_like(target)
    flat_labels = []
    for k in range(n_outcomes):
        for m, dst_mb in zip(model.operators[k], labels[k]):
            block = m @ np.diag(q).astype(complex) @ m.conj().T
            marker = np.zeros(dim_mb)
            marker[dst_mb] = 1.0
            recon += np.kron(block, np.diag(marker).astype(complex))
            flat_labels.append(dst_mb)
    deviation = float(np.max(np.abs(recon - target)))
    if deviation > POLICY.povm:
        raise ReconstructionError(
            f"post-measurement reconstruction failed: max deviation {deviation:.3e}")
    if not return_details:
        return model
    return model, ClassicalDecomposition(
        model=model,
        mb_destinations=tuple(flat_labels),
        reconstruction=recon,
        target=target,
        max_deviation=deviation,
    )


def product_form_deviation(unitary: np.ndarray, rho_s: DensityOperator,
                           rho_mb: DensityOperator, branch_of_mb,
                           operators, mb_states) -> float:
    """Max deviation of a proposed product-form decomposition from the truth.

    Checks whether sum_i M_i rho_S M_i+ (x) tau_i reproduces the
    post-projection state sum_k (1 (x) P_k) U (rho_S (x) rho_MB) U+ (1 (x) P_k)
    for an arbitrary (not necessarily classical) interaction unitary.  The
    caller supplies the candidate operator/MB-state pairs; whether a given
    quantum instance admits such a form is not characterized here, only
    measured.
    """
    branch = np.asarray(branch_of_mb, dtype=int)
    dim_s, dim_mb = rho_s.dim, rho_mb.dim
    u = np.asarray(unitary, dtype=complex)
    if u.shape != (dim_s * dim_mb, dim_s * dim_mb):
        raise ValueError("interaction dimension must equal dim_S * dim_MB")
    joint = np.kron(rho_s.entries, rho_mb.entries)
    evolved = u @ joint @ u.conj().T
    target = np.zeros_like(evolved)
    for k in range(int(branch.max()) + 1):
        proj = np.kron(np.eye(dim_s), np.diag((branch == k).astype(float)))
        target += proj @ evolved @ proj
    recon = np.zeros_like(evolved)
    for m, tau in zip(operators, mb_states, strict=True):
        recon += np.kron(np.asarray(m, dtype=complex) @ rho_s.entries
                         @ np.asarray(m, dtype=complex).conj().T,
                         np.asarray(tau, dtype=complex))
    return float(np.max(np.abs(recon - target)))


def classical_mutual_information(rho: DensityOperator, model: MeasurementModel) -> float:
    """Mutual information of the joint (outcome, basis-state) distribution.

    Meaningful for diagonal states and diagonal effects, where it must agree
    with qc_mutual_information.
    """
    q = rho.diagonal()
    joint = np.array([np.diag(e).real * q for e in model.effects])  # (k, s)
    joint = np.clip(joint, 0.0, None)
    pk = joint.sum(axis=1)
    ps = joint.sum(axis=0)
    total = 0.0
    for k in range(joint.shape[0]):
        for s in range(joint.shape[1]):
            pks = joint[k, s]
            if pks > POLICY.eig_clamp:
                total += pks * np.log(pks / (pk[k] * ps[s]))
    return float(total)


# ---------------------------------------------------------------------------
# JSON wire format: {"outcomes": [{"k": 0, "operators": [matrix, ...]}, ...]}

def model_to_json(model: MeasurementModel) -> dict:
    return {
        "outcomes": [
            {"k": k, "operators": [matrix_to_json(m) for m in ops]}
            for k, ops in enumerate(model.operators)
        ]
    }


def model_from_json(payload: dict) -> MeasurementModel:
    try:
        outcomes = payload["outcomes"]
        entries = sorted(outcomes, key=lambda item: int(item["k"]))
        groups = tuple(
            tuple(matrix_from_json(m) for m in item["operators"]) for item in entries
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed measurement-model payload: {exc}") from exc
    return MeasurementModel(groups)
