"""Shared helpers for the test suite."""

import numpy as np

from oqwalk.channel import WalkModel
from oqwalk.linalg import Subspace


def random_density(rng, dim: int) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    s = g @ g.conj().T
    return s / np.trace(s).real


def random_densities(seed: int, dim: int, count: int) -> list:
    rng = np.random.default_rng(seed)
    return [random_density(rng, dim) for _ in range(count)]


def basis_subspace(ambient: int, indices) -> Subspace:
    return Subspace(ambient, np.eye(ambient, dtype=complex)[:, list(indices)])


def random_walk_model(rng, local_dim: int, lattice_dim: int = 1) -> WalkModel:
    """Random trace-preserving walk from a Haar-ish isometry split into blocks."""
    if lattice_dim == 1:
        shifts = np.array([[-1], [1]])
    else:
        eye = np.eye(lattice_dim, dtype=int)
        shifts = np.vstack([eye, -eye])
    v = shifts.shape[0]
    g = rng.standard_normal((v * local_dim, local_dim)) + 1j * rng.standard_normal(
        (v * local_dim, local_dim)
    )
    q, _ = np.linalg.qr(g)
    kraus = np.array([q[i * local_dim : (i + 1) * local_dim, :] for i in range(v)])
    return WalkModel(shifts=shifts, kraus=kraus)


def random_irreducible_model(seed: int, local_dim: int, lattice_dim: int = 1) -> WalkModel:
    """Random walk model whose local channel has a one-dimensional fixed space."""
    from oqwalk.asymptotics import fixed_space_dim

    rng = np.random.default_rng(seed)
    for _ in range(50):
        model = random_walk_model(rng, local_dim, lattice_dim)
        if fixed_space_dim(model, Subspace.full(local_dim)) == 1:
            return model
    raise RuntimeError("could not draw an irreducible model")


def subspace_angle(a: Subspace, b: Subspace) -> float:
    """Operator-norm distance between projectors (sine of largest principal angle)."""
    return float(np.linalg.norm(a.projector() - b.projector(), ord=2))


def bernoulli_rate(x: float, p_right: float) -> float:
    """Cramer rate for a +/-1 step with right probability p_right, |x| < 1."""
    q_plus = (1.0 + x) / 2.0
    q_minus = (1.0 - x) / 2.0
    acc = 0.0
    if q_plus > 0:
        acc += q_plus * np.log(q_plus / p_right)
    if q_minus > 0:
        acc += q_minus * np.log(q_minus / (1.0 - p_right))
    return float(acc)
