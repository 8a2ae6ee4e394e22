"""Asymptotic law of the position process: CLT parameters and rate functions.

The drift of a minimal enclosure is the shift average in its invariant state;
the diffusion matrix comes from the second derivative of the deformed
spectral radius, evaluated in closed form through the zero-trace solution of
a Poisson-type equation. Rate functions are Legendre transforms of the log
spectral radius of the deformed channel compressed to the relevant subspace.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelView, WalkModel, perron, to_matrix, unvec, vec
from .errors import NoConvergenceError, NotIrreducibleError, SplitIdentityError
from .linalg import (
    Subspace,
    hermitian_part,
    orthonormal_complement,
    project_subspace,
    solve_linear,
    subspace_intersection,
)
from .structure import (
    DiagonalState,
    SpaceDecomposition,
    absorption,
    reachable_space,
    recurrent_space,
    weights,
)

U_MAX = 20.0
NONSMOOTH_CAVEAT = (
    "lower bound holds on exposed points of the rate function only, when the "
    "deformed log spectral radius fails to be smooth"
)


@dataclass(frozen=True)
class GaussianComponent:
    """Mean growth rate and covariance of one limit Gaussian."""

    mean_rate: np.ndarray  # (d,)
    covariance: np.ndarray  # (d, d) symmetric PSD

    def __post_init__(self):
        m = np.atleast_1d(np.asarray(self.mean_rate, dtype=float))
        c = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        if np.linalg.norm(c - c.T) > 1e-10:
            raise ValueError("covariance must be symmetric")
        if float(np.min(np.linalg.eigvalsh(0.5 * (c + c.T)))) < -1e-9:
            raise ValueError("covariance must be positive semidefinite")
        object.__setattr__(self, "mean_rate", m)
        object.__setattr__(self, "covariance", 0.5 * (c + c.T))


@dataclass(frozen=True)
class MixtureModel:
    """Predicted law of the rescaled displacement at a finite horizon.

    Component (a, g) contributes weight a of a Gaussian with mean
    sqrt(horizon) * g.mean_rate and covariance g.covariance.
    """

    components: list  # [(weight, GaussianComponent)]
    horizon: int

    def __post_init__(self):
        total = sum(w for w, _ in self.components)
        if self.components and abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {total}, not 1")
        if any(w < -1e-12 for w, _ in self.components):
            raise ValueError("weights must be nonnegative")


@dataclass(frozen=True)
class RateEvaluation:
    """One evaluation of a large-deviation rate function."""

    point: np.ndarray
    value: float
    maximizer: np.ndarray
    per_block: list = field(default_factory=list)  # (id, value, maximizer)
    label: str = ""
    note: str = ""
    upper_value: float | None = None
    lower_value: float | None = None


def drift(model: WalkModel, tau: np.ndarray) -> np.ndarray:
    """Shift average sum_i Tr(L_i tau L_i*) s_i for an invariant state tau."""
    probs = np.array(
        [float(np.trace(l @ tau @ l.conj().T).real) for l in model.kraus]
    )
    return probs @ model.shifts.astype(float)


def _shift_weighted_apply(view: ChannelView, weights_per_term: np.ndarray, sigma):
    out = np.zeros((view.dim, view.dim), dtype=complex)
    for w, kr in zip(weights_per_term, view.compressed_kraus):
        out += w * (kr @ sigma @ kr.conj().T)
    return out


def fixed_space_dim(model: WalkModel, subspace: Subspace) -> int:
    vals = np.linalg.eigvals(to_matrix(ChannelView(model, subspace)))
    return int(np.sum(np.abs(vals - 1.0) <= 1e-9))


def poisson_solve(model: WalkModel, enclosure: Subspace, u) -> np.ndarray:
    """Zero-trace eta with (Id - channel)(eta) = shift-weighted drift residue.

    Concretely, with the channel restricted to the enclosure and
    L'(sigma) = sum_i (u.s_i) K_i sigma K_i*, solves
    (Id - channel)(eta) = L'(tau) - Tr(L'(tau)) tau, Tr(eta) = 0,
    which is uniquely solvable exactly when the restricted channel has a
    one-dimensional fixed space.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    view = ChannelView(model, enclosure)
    k = view.dim
    if k == 0:
        raise NotIrreducibleError("empty enclosure")
    if fixed_space_dim(model, enclosure) != 1:
        raise NotIrreducibleError("restricted channel has a degenerate fixed space")
    if k == 1:
        return np.zeros((1, 1), dtype=complex)

    tau = perron(view).state
    us = model.shifts.astype(float) @ u
    lp_tau = _shift_weighted_apply(view, us, tau)
    rhs = lp_tau - np.trace(lp_tau) * tau

    s = to_matrix(view)
    eye = np.eye(k * k)
    # bordered system: add tau * Tr(.) to pin the zero-trace solution
    bord = eye - s + np.outer(vec(tau), vec(np.eye(k, dtype=complex)).conj())
    eta = unvec(solve_linear(bord, vec(rhs)))
    eta = hermitian_part(eta)
    if abs(np.trace(eta)) > 1e-10:
        raise NoConvergenceError(f"trace of Poisson solution {np.trace(eta):.2e}")
    return eta


def lambda_derivatives(model: WalkModel, enclosure: Subspace, u) -> tuple[float, float]:
    """First and second derivative at t=0 of the deformed spectral radius
    along t -> t*u, computed in closed form from the invariant state and the
    Poisson solution."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    view = ChannelView(model, enclosure)
    tau = perron(view).state
    us = model.shifts.astype(float) @ u
    lp_tau = _shift_weighted_apply(view, us, tau)
    first = float(np.trace(lp_tau).real)
    eta = poisson_solve(model, enclosure, u)
    lpp_tau = _shift_weighted_apply(view, us**2, tau)
    lp_eta = _shift_weighted_apply(view, us, eta)
    second = float(np.trace(lpp_tau).real) + 2.0 * float(np.trace(lp_eta).real)
    return first, second


def diffusion(model: WalkModel, enclosure: Subspace) -> np.ndarray:
    """Covariance matrix from the quadratic form u -> lambda'' - lambda'^2,
    recovered by polarization over coordinate directions."""
    d = model.lattice_dim

    def quad(u):
        l1, l2 = lambda_derivatives(model, enclosure, u)
        return l2 - l1 * l1

    cov = np.zeros((d, d))
    diag = np.zeros(d)
    for i in range(d):
        diag[i] = quad(np.eye(d)[i])
        cov[i, i] = diag[i]
    for i in range(d):
        for j in range(i + 1, d):
            q = quad(np.eye(d)[i] + np.eye(d)[j])
            cov[i, j] = cov[j, i] = 0.5 * (q - diag[i] - diag[j])
    return cov


def clt_mixture(
    model: WalkModel,
    decomposition: SpaceDecomposition,
    rho: DiagonalState,
    horizon: int,
    weight_floor: float = 1e-12,
) -> MixtureModel:
    """Gaussian-mixture prediction for the rescaled displacement at a horizon."""
    block_weights, _ = weights(model, decomposition, rho)
    components = []
    for w, block in zip(block_weights, decomposition.blocks):
        if w <= weight_floor:
            continue
        m = drift(model, block.invariant_state)
        cov = diffusion(model, block.minimal_enclosures[0])
        components.append((w, GaussianComponent(m, cov)))
    # renormalize away the dropped mass (at most len(blocks) * weight_floor)
    total = sum(w for w, _ in components)
    components = [(w / total, g) for w, g in components]
    return MixtureModel(components=components, horizon=horizon)


def empirical_mean_limit(mixture: MixtureModel) -> list:
    """Limit law of displacement/steps: point masses at the component drifts."""
    return [(w, g.mean_rate.copy()) for w, g in mixture.components]


def log_lambda(model: WalkModel, subspace: Subspace, u) -> float:
    """Log spectral radius of the deformed channel compressed to a subspace."""
    if subspace.dim == 0:
        return float("-inf")
    m = to_matrix(ChannelView(model, subspace, u))
    radius = float(np.max(np.abs(np.linalg.eigvals(m))))
    return float(np.log(radius))


def _log_lambda_grad(model: WalkModel, subspace: Subspace, u) -> np.ndarray:
    """Gradient of u -> log lambda_u; analytic via the Perron pair, falling
    back to central differences when the dominant eigenpair is unusable."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    d = u.size
    try:
        pd = perron(ChannelView(model, subspace, u))
        denom = float(np.trace(pd.dual_weight @ pd.state).real)
        if denom <= 1e-10:
            raise NoConvergenceError("left/right eigenvector pairing degenerate")
        view = ChannelView(model, subspace, u)
        shifts = model.shifts.astype(float)
        base = view.weights
        grad = np.zeros(d)
        for j in range(d):
            lp = _shift_weighted_apply(view, shifts[:, j] * base, pd.state)
            grad[j] = float(np.trace(pd.dual_weight @ lp).real) / (pd.value * denom)
        return grad
    except NoConvergenceError:
        step = 1e-6
        grad = np.zeros(d)
        for j in range(d):
            e = np.zeros(d)
            e[j] = step
            grad[j] = (
                log_lambda(model, subspace, u + e) - log_lambda(model, subspace, u - e)
            ) / (2 * step)
        return grad


def _log_lambda_hessian(model, subspace, u, step=1e-4) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    d = u.size
    f0 = log_lambda(model, subspace, u)
    h = np.zeros((d, d))
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = step
        h[i, i] = (
            log_lambda(model, subspace, u + ei)
            - 2 * f0
            + log_lambda(model, subspace, u - ei)
        ) / step**2
    for i in range(d):
        for j in range(i + 1, d):
            ei = np.zeros(d)
            ei[i] = step
            ej = np.zeros(d)
            ej[j] = step
            val = (
                log_lambda(model, subspace, u + ei + ej)
                - log_lambda(model, subspace, u + ei - ej)
                - log_lambda(model, subspace, u - ei + ej)
                + log_lambda(model, subspace, u - ei - ej)
            ) / (4 * step**2)
            h[i, j] = h[j, i] = val
    return h


def _clip_to_ball(u: np.ndarray, radius: float) -> np.ndarray:
    norm = float(np.linalg.norm(u))
    if norm <= radius:
        return u
    return u * (radius / norm)


def legendre(
    model: WalkModel, subspace: Subspace, x, u_max: float = U_MAX
) -> RateEvaluation:
    """sup over ||u|| <= u_max of x.u - log lambda_u by multi-start damped
    Newton (finite-difference Hessian, analytic gradient where available).

    A maximizer pinned to the search boundary with the objective still
    increasing signals a point outside the closure of the gradient range;
    the value is then reported as +inf.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = x.size

    def f(u):
        return float(x @ u) - log_lambda(model, subspace, u)

    def grad_f(u):
        return x - _log_lambda_grad(model, subspace, u)

    starts = [np.zeros(d)]
    for r in (2.0, 8.0, 16.0):
        for j in range(d):
            e = np.zeros(d)
            e[j] = r
            starts.extend([e.copy(), -e])
    if d > 1:
        rng = np.random.default_rng(0)
        for r in (4.0, 12.0):
            for _ in range(4):
                v = rng.standard_normal(d)
                starts.append(_clip_to_ball(v / np.linalg.norm(v) * r, u_max))

    best_u, best_val = np.zeros(d), f(np.zeros(d))
    for start in starts:
        u = _clip_to_ball(start, u_max)
        val = f(u)
        for _ in range(60):
            g = grad_f(u)
            if np.linalg.norm(g) <= 1e-11:
                break
            h = _log_lambda_hessian(model, subspace, u)
            ph = 0.5 * (h + h.T)
            mu = 1e-12
            while True:
                try:
                    step = np.linalg.solve(ph + mu * np.eye(d), g)
                    break
                except np.linalg.LinAlgError:
                    mu = max(mu * 10, 1e-10)
            if not np.all(np.isfinite(step)) or float(step @ g) <= 0:
                step = g  # fall back to plain ascent
            t = 1.0
            improved = False
            while t > 2.0**-40:
                trial = _clip_to_ball(u + t * step, u_max)
                tval = f(trial)
                if tval > val + 1e-4 * t * float(g @ step):
                    u, val = trial, tval
                    improved = True
                    break
                t *= 0.5
            if not improved:
                break
        if val > best_val:
            best_u, best_val = u, val

    note = ""
    value = max(best_val, 0.0)
    if np.linalg.norm(best_u) >= u_max - 1e-6:
        slope = float(grad_f(best_u) @ (best_u / np.linalg.norm(best_u)))
        if slope > 1e-7:
            value = float("inf")
            note = "objective unbounded on the search region; rate possibly infinite"
        else:
            note = "maximizer on the search boundary; rate possibly infinite"
    return RateEvaluation(point=x, value=value, maximizer=best_u, note=note)


def rate_function(
    model: WalkModel,
    decomposition: SpaceDecomposition,
    rho: DiagonalState,
    x,
) -> RateEvaluation:
    """Rate of exponential decay for the displacement-per-step law at x.

    Fully recurrent models admit an exact large-deviation principle: the rate
    is the minimum of the block rates over blocks carrying weight. With a
    nontrivial transient space only upper and lower bounds are available,
    computed on the absorption-support compressions of the reachable space,
    and the result is labeled accordingly.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    block_weights, enclosure_weights = weights(model, decomposition, rho)

    per_block = []
    if decomposition.is_recurrent:
        for bid, w, block in zip(
            decomposition.block_ids(), block_weights, decomposition.blocks
        ):
            if w <= 1e-12:
                continue
            # block and minimal enclosure share the deformed spectral radius
            ev = legendre(model, block.minimal_enclosures[0], x)
            per_block.append((bid, ev.value, ev.maximizer))
        best = min(per_block, key=lambda item: item[1])
        return RateEvaluation(
            point=x,
            value=best[1],
            maximizer=best[2],
            per_block=per_block,
            label="exact-LDP",
        )

    reachable = reachable_space(model, rho)
    for bid, row, block in zip(
        decomposition.block_ids(), enclosure_weights, decomposition.blocks
    ):
        for j, (w, sub) in enumerate(zip(row, block.minimal_enclosures)):
            if w <= 1e-12:
                continue
            p_tilde = absorption(model, sub).support().projector()
            q = project_subspace(p_tilde, reachable)
            ev = legendre(model, q, x)
            per_block.append((f"{bid}/min-{j}", ev.value, ev.maximizer))
    best = min(per_block, key=lambda item: item[1])
    return RateEvaluation(
        point=x,
        value=best[1],
        maximizer=best[2],
        per_block=per_block,
        label="bounds-only",
        note=NONSMOOTH_CAVEAT,
        upper_value=best[1],
        lower_value=best[1],
    )


def lambda_split_check(
    model: WalkModel, enclosure: Subspace, rho: DiagonalState, u
) -> tuple[float, float, float]:
    """Deformed spectral radius on the reachable compression versus its
    recurrent and transient contributions; checks the max identity."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    tra = orthonormal_complement(recurrent_space(model))
    p_tilde = absorption(model, enclosure).support().projector()
    reachable = reachable_space(model, rho)
    q = project_subspace(p_tilde, reachable)
    w_space = subspace_intersection(q, tra)

    lam_q = float(np.exp(log_lambda(model, q, u)))
    lam_v = float(np.exp(log_lambda(model, enclosure, u)))
    lam_w = float(np.exp(log_lambda(model, w_space, u))) if w_space.dim else 0.0

    expected = max(lam_v, lam_w)
    if abs(lam_q - expected) > 1e-8 * max(1.0, lam_q):
        raise SplitIdentityError(
            f"spectral radius {lam_q} differs from max{{{lam_v}, {lam_w}}}"
        )
    return lam_q, lam_v, lam_w
