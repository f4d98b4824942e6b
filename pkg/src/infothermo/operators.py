"""Finite-dimensional Hermitian operator algebra.

Hermitian and density operators with validated invariants, von Neumann and
relative entropies, canonical (thermal) states, tensor products and partial
traces, and seeded random instances.  All entropies are in nats, energies in
units of k_B*T unless an explicit temperature is supplied, and k_B = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import POLICY


class SupportViolationError(ValueError):
    """Relative entropy is infinite: support(rho) is not inside support(sigma)."""


@dataclass(frozen=True)
class Temperature:
    """Bath temperature in energy units (k_B = 1); must be positive."""

    value: float

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError(f"temperature must be positive, got {self.value}")


def temperature_value(temperature) -> float:
    """Accept a Temperature or a bare positive float and return the float."""
    if isinstance(temperature, Temperature):
        return temperature.value
    t = float(temperature)
    if not t > 0:
        raise ValueError(f"temperature must be positive, got {t}")
    return t


def _as_square_complex(entries) -> np.ndarray:
    m = np.asarray(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class HermitianOperator:
    """A dim x dim complex Hermitian matrix (observable or Hamiltonian)."""

    entries: np.ndarray

    def __post_init__(self):
        m = _as_square_complex(self.entries)
        dev = np.max(np.abs(m - m.conj().T))
        if dev > POLICY.validation:
            raise ValueError(f"matrix is not Hermitian: max deviation {dev:.3e}")
        m = (m + m.conj().T) / 2
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


@dataclass(frozen=True)
class DensityOperator:
    """A valid quantum state: Hermitian, positive semidefinite, unit trace."""

    entries: np.ndarray
    _spectrum: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        m = _as_square_complex(self.entries)
        dev = np.max(np.abs(m - m.conj().T))
        if dev > POLICY.validation:
            raise ValueError(f"state is not Hermitian: max deviation {dev:.3e}")
        m = (m + m.conj().T) / 2
        tr = np.trace(m).real
        if abs(tr - 1.0) > POLICY.validation:
            raise ValueError(f"state trace {tr!r} differs from 1 beyond tolerance")
        vals, vecs = np.linalg.eigh(m)
        if vals.min() < -POLICY.validation:
            raise ValueError(f"state has negative eigenvalue {vals.min():.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "_spectrum", (vals, vecs))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (ascending) and eigenvectors, cached at validation."""
        return self._spectrum

    def diagonal(self) -> np.ndarray:
        return np.diag(self.entries).real.copy()

    def is_diagonal(self, tol: float = None) -> bool:
        tol = POLICY.validation if tol is None else tol
        off = self.entries - np.diag(np.diag(self.entries))
        return np.max(np.abs(off)) <= tol


def diagonal_state(populations) -> DensityOperator:
    """Build a classical (diagonal) state from level populations."""
    p = np.asarray(populations, dtype=float)
    return DensityOperator(np.diag(p).astype(complex))


def _entropy_from_eigenvalues(vals: np.ndarray) -> float:
    lam = vals[vals > POLICY.eig_clamp]
    # exact-zero clamp: pure states may land at -1e-16 from roundoff
    return max(float(-np.sum(lam * np.log(lam))), 0.0)


def von_neumann_entropy(rho: DensityOperator) -> float:
    """-tr(rho ln rho) in nats, with 0 ln 0 = 0; lies in [0, ln dim]."""
    vals, _ = rho.spectrum()
    return _entropy_from_eigenvalues(vals)


def entropy_of_matrix(sigma: np.ndarray) -> float:
    """Entropy -sum(lam ln lam) of an (unnormalized) PSD Hermitian matrix."""
    vals = np.linalg.eigvalsh(sigma)
    lam = vals[vals > POLICY.eig_clamp]
    if lam.size == 0:
        return 0.0
    return float(-np.sum(lam * np.log(lam)))


def canonical_state(hamiltonian: HermitianOperator, temperature) -> tuple[DensityOperator, float]:
    """Thermal state exp(-H/T)/Z and the Helmholtz free energy -T ln Z.

    The minimum eigenvalue is subtracted before exponentiating (overflow
    guard) and restored inside the returned free energy.
    """
    t = temperature_value(temperature)
    vals, vecs = np.linalg.eigh(hamiltonian.entries)
    shift = vals.min()
    weights = np.exp(-(vals - shift) / t)
    z_shifted = weights.sum()
    populations = weights / z_shifted
    state = (vecs * populations) @ vecs.conj().T
    free_energy = shift - t * np.log(z_shifted)
    return DensityOperator(state), float(free_energy)


def relative_entropy(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Quantum relative entropy tr rho (ln rho - ln sigma), nonnegative.

    Raises SupportViolationError when rho has weight outside the support of
    sigma (the divergence is then infinite).
    """
    if rho.dim != sigma.dim:
        raise ValueError("dimension mismatch")
    svals, svecs = sigma.spectrum()
    on_support = svals > POLICY.support
    null_vecs = svecs[:, ~on_support]
    if null_vecs.shape[1]:
        leak = np.max(np.real(np.einsum("ij,jk,ki->i", null_vecs.conj().T,
                                        rho.entries, null_vecs)))
        if leak > POLICY.support:
            raise SupportViolationError(
                f"support violation: weight {leak:.3e} outside support of sigma")
    rvals, rvecs = rho.spectrum()
    rpos = rvals > POLICY.eig_clamp
    term_rho = float(np.sum(rvals[rpos] * np.log(rvals[rpos])))
    # tr(rho ln sigma) summed over sigma's supported eigenvectors only
    overlap = np.real(np.einsum("ij,jk,ki->i", svecs.conj().T, rho.entries, svecs))
    term_sigma = float(np.sum(overlap[on_support] * np.log(svals[on_support])))
    return term_rho - term_sigma


def tensor(rho: DensityOperator, sigma: DensityOperator) -> DensityOperator:
    """Kronecker product of two states."""
    return DensityOperator(np.kron(rho.entries, sigma.entries))


def partial_trace(rho_ab: DensityOperator, trace_out: int, dims: tuple[int, int]) -> DensityOperator:
    """Trace out one tensor factor of a bipartite state.

    Parameters
    ----------
    trace_out:
        Which factor to remove: 0 for the first, 1 for the second.
    dims:
        (dim_first, dim_second); their product must equal the state dimension.
    """
    da, db = dims
    if da * db != rho_ab.dim:
        raise ValueError(f"dims {dims} inconsistent with total dimension {rho_ab.dim}")
    blocks = rho_ab.entries.reshape(da, db, da, db)
    if trace_out == 1:
        reduced = np.einsum("ijkj->ik", blocks)
    elif trace_out == 0:
        reduced = np.einsum("ijil->jl", blocks)
    else:
        raise ValueError("trace_out must be 0 or 1")
    return DensityOperator(reduced)


def random_instance(seed: int, dim: int, kind: str):
    """Deterministic random operator; kind selects the ensemble.

    kind = "state": full-rank density operator (normalized Ginibre G G+).
    kind = "hermitian": GUE-style Hermitian matrix.
    kind = "unitary": Haar-distributed unitary (ndarray).
    kind = "permutation": 0/1 permutation matrix (ndarray).
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    return _random_from_rng(rng, dim, kind)


def _random_from_rng(rng: np.random.Generator, dim: int, kind: str):
    if kind == "state":
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        m = g @ g.conj().T
        return DensityOperator(m / np.trace(m).real)
    if kind == "hermitian":
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        return HermitianOperator((g + g.conj().T) / 2)
    if kind == "unitary":
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        q, r = np.linalg.qr(g)
        phases = np.diag(r) / np.abs(np.diag(r))
        return q * phases
    if kind == "permutation":
        perm = rng.permutation(dim)
        m = np.zeros((dim, dim))
        m[perm, np.arange(dim)] = 1.0
        return m
    raise ValueError(f"unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# JSON wire format for matrices: {"dim": n, "re": [[...]], "im": [[...]]}

def matrix_to_json(matrix: np.ndarray) -> dict:
    m = np.asarray(matrix, dtype=complex)
    return {
        "dim": int(m.shape[0]),
        "re": m.real.tolist(),
        "im": m.imag.tolist(),
    }


def matrix_from_json(payload: dict) -> np.ndarray:
    """Parse the matrix wire format, validating shape consistency."""
    try:
        dim = int(payload["dim"])
        re = np.asarray(payload["re"], dtype=float)
        im = np.asarray(payload["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix payload: {exc}") from exc
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise ValueError(
            f"matrix payload shape mismatch: dim={dim}, re {re.shape}, im {im.shape}")
    return re + 1j * im
