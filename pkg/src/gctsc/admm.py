"""Alternating-direction solver for the joint representation model.

Minimizes, over the auxiliary data Xtilde, dictionary D and codes Z,

    L_G(graph(Xtilde), G0) + lambda0 ||Xtilde - D Z||_F^2
        + lambda1 ||Z||_F^2 + lambda2 tr(Z L_T Z^T)
    s.t.  Z >= 0,  D >= 0,  ||d_i||_2 <= 1,

by splitting (Y, U, V) off (Xtilde, D, Z) and alternating closed-form
updates: a Sylvester solve for V, a positive-definite solve for U,
nonnegative projections for Z and D, a damped average for Y, projected
gradient descent for Xtilde, and dual ascent on the multipliers.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import (
    FeatureSequence,
    IterationStats,
    SolverConfig,
    SolverMode,
    SolverState,
    seeded_rng,
)
from .graph import AffinityGraph, ZERO_COLUMN_EPS, build_affinity, graph_loss, graph_loss_grad


class NumericalError(RuntimeError):
    """Raised when a linear-algebra kernel fails or iterates degenerate."""


@dataclass
class TemporalLaplacian:
    """Banded graph Laplacian over the time axis with its eigendecomposition.

    Neighbors within the half-window s are connected with unit weight;
    the quadratic form tr(Z L_T Z^T) penalizes code differences between
    nearby frames.
    """

    LT: np.ndarray
    eigvals: np.ndarray
    eigvecs: np.ndarray
    s: int


@dataclass
class FitResult:
    """Solver output: final matrices, diagnostics trace and convergence flag."""

    Z: np.ndarray
    D: np.ndarray
    Xtilde: np.ndarray
    diagnostics: list[IterationStats] = field(default_factory=list)
    converged: bool = False
    iterations_run: int = 0


def build_temporal_laplacian(N: int, s: int) -> TemporalLaplacian:
    """Construct L_T = D_T - W_T for the band graph 0 < |i-j| <= s."""
    if N < 2:
        raise ValueError("need at least two time steps")
    if not 1 <= s < N:
        raise ValueError(f"temporal window s={s} must satisfy 1 <= s < N={N}")
    idx = np.arange(N)
    gap = np.abs(idx[:, None] - idx[None, :])
    W = ((gap > 0) & (gap <= s)).astype(np.float64)
    LT = np.diag(W.sum(axis=1)) - W
    eigvals, eigvecs = np.linalg.eigh(LT)
    eigvals = np.maximum(eigvals, 0.0)  # clamp eigh round-off; L_T is PSD
    return TemporalLaplacian(LT=LT, eigvals=eigvals, eigvecs=eigvecs, s=s)


def update_V(state: SolverState, config: SolverConfig, lap: TemporalLaplacian) -> np.ndarray:
    """Solve the Sylvester system M V + lambda2 V L_T = C for the code pre-image.

    M = 2 lambda0 U^T U + (lambda1 + rho) I and
    C = 2 lambda0 U^T Y - Lambda_V + rho Z.  With L_T = Q diag(w) Q^T and
    M = P diag(mu) P^T the solution is elementwise in the rotated basis:
    V = P [ (P^T C Q) / (mu_i + lambda2 w_j) ] Q^T.
    """
    U, Y = state.U, state.Y
    r = U.shape[1]
    M = 2.0 * config.lambda0 * (U.T @ U) + (config.lambda1 + config.rho) * np.eye(r)
    C = 2.0 * config.lambda0 * (U.T @ Y) - state.LambdaV + config.rho * state.Z
    try:
        mu, P = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed in the V update: {exc}") from exc
    denom = mu[:, None] + config.lambda2 * lap.eigvals[None, :]
    if np.any(denom <= 0):
        raise NumericalError("singular shifted system in the Sylvester solve")
    Ct = P.T @ C @ lap.eigvecs
    return P @ (Ct / denom) @ lap.eigvecs.T


def sylvester_residual(
    V: np.ndarray,
    state: SolverState,
    config: SolverConfig,
    lap: TemporalLaplacian,
) -> float:
    """Relative residual ||M V + lambda2 V L_T - C||_F / ||C||_F."""
    U, Y = state.U, state.Y
    r = U.shape[1]
    M = 2.0 * config.lambda0 * (U.T @ U) + (config.lambda1 + config.rho) * np.eye(r)
    C = 2.0 * config.lambda0 * (U.T @ Y) - state.LambdaV + config.rho * state.Z
    R = M @ V + config.lambda2 * (V @ lap.LT) - C
    nc = np.linalg.norm(C)
    return float(np.linalg.norm(R) / nc) if nc > 0 else float(np.linalg.norm(R))


def update_U(state: SolverState, config: SolverConfig) -> np.ndarray:
    """Closed-form dictionary pre-image:
    U = (2 lambda0 Y V^T - Lambda_U + rho D)(2 lambda0 V V^T + rho I)^{-1},
    realized as a symmetric positive-definite solve."""
    V, Y = state.V, state.Y
    r = V.shape[0]
    S = 2.0 * config.lambda0 * (V @ V.T) + config.rho * np.eye(r)
    RHS = 2.0 * config.lambda0 * (Y @ V.T) - state.LambdaU + config.rho * state.D
    try:
        factor = scipy.linalg.cho_factor(S)
        return scipy.linalg.cho_solve(factor, RHS.T).T
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"positive-definite solve failed in the U update: {exc}") from exc


def update_Z(state: SolverState, config: SolverConfig) -> np.ndarray:
    """Nonnegative projection of V + Lambda_V / rho."""
    return np.maximum(state.V + state.LambdaV / config.rho, 0.0)


def update_D(state: SolverState, config: SolverConfig) -> np.ndarray:
    """Nonnegative projection of U + Lambda_U / rho followed by projection
    of each column onto the unit Euclidean ball."""
    D = np.maximum(state.U + state.LambdaU / config.rho, 0.0)
    norms = np.linalg.norm(D, axis=0)
    over = norms > 1.0
    if np.any(over):
        D[:, over] /= norms[over]
    return D


def update_Y(state: SolverState, config: SolverConfig) -> np.ndarray:
    """Damped average Y = (2 lambda0 U V - Lambda_X + rho Xtilde)/(2 lambda0 + rho),
    clipped into [0, 1]."""
    Y = (
        2.0 * config.lambda0 * (state.U @ state.V)
        - state.LambdaXtilde
        + config.rho * state.Xtilde
    ) / (2.0 * config.lambda0 + config.rho)
    return np.clip(Y, 0.0, 1.0)


def _refloor_zero_columns(X: np.ndarray) -> np.ndarray:
    """Replace all-zero columns with a tiny uniform column in place."""
    dead = np.flatnonzero(~X.any(axis=0))
    if dead.size:
        X[:, dead] = ZERO_COLUMN_EPS
    return X


def update_Xtilde(
    state: SolverState, config: SolverConfig, g0: AffinityGraph
) -> tuple[np.ndarray, bool]:
    """Projected gradient descent on the auxiliary-data subproblem.

    Minimizes ``graph_loss + <Lambda_X, Y - Xtilde> + rho/2 ||Y - Xtilde||^2``
    over the [0, 1] box.  The step is capped at 1/rho so the quadratic
    term cannot destabilize a fixed step; on an objective increase the
    step is halved up to 10 times, and if no decrease is found the
    current iterate is returned with a warning flag.
    """
    Y, Lam = state.Y, state.LambdaXtilde
    rho, h = config.rho, config.h

    def objective(X: np.ndarray) -> float:
        gap = Y - X
        return (
            graph_loss(g0, X, h)
            + float(np.vdot(Lam, gap))
            + 0.5 * rho * float(np.vdot(gap, gap))
        )

    X = state.Xtilde.copy()
    f = objective(X)
    step = min(config.inner_gd_step, 1.0 / rho)
    for _ in range(config.inner_gd_iters):
        grad = graph_loss_grad(g0, X, h) - Lam - rho * (Y - X)
        accepted = False
        trial = step
        for _ in range(11):  # initial step plus up to 10 halvings
            cand = np.clip(X - trial * grad, 0.0, 1.0)
            _refloor_zero_columns(cand)
            fc = objective(cand)
            if fc <= f:
                X, f, step = cand, fc, trial
                accepted = True
                break
            trial *= 0.5
        if not accepted:
            return X, True
    return X, False


def update_multipliers(
    state: SolverState, config: SolverConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dual ascent: Lambda += rho * (primal residual) for all three splits."""
    LU = state.LambdaU + config.rho * (state.U - state.D)
    LV = state.LambdaV + config.rho * (state.V - state.Z)
    LX = state.LambdaXtilde + config.rho * (state.Y - state.Xtilde)
    return LU, LV, LX


def _objective(
    state: SolverState,
    config: SolverConfig,
    lap: TemporalLaplacian,
    g0: AffinityGraph | None,
) -> tuple[float, float]:
    """Model objective at (Z, D, Xtilde) and the graph-loss part alone."""
    gl = 0.0
    if g0 is not None:
        gl = graph_loss(g0, state.Xtilde, config.h)
    resid = state.Xtilde - state.D @ state.Z
    obj = (
        gl
        + config.lambda0 * float(np.vdot(resid, resid))
        + config.lambda1 * float(np.vdot(state.Z, state.Z))
        + config.lambda2 * float(((state.Z @ lap.LT) * state.Z).sum())
    )
    return obj, gl


def _validate_input(X: np.ndarray, config: SolverConfig) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] < 2:
        raise ValueError("need a 2-D feature matrix with at least two frames")
    if not np.all(np.isfinite(X)):
        raise ValueError("feature matrix contains non-finite entries")
    if X.min() < 0.0 or X.max() > 1.0:
        raise ValueError("feature matrix must be normalized to [0, 1]")
    if config.mode is SolverMode.FULL and not X.any(axis=0).all():
        bad = int(np.flatnonzero(~X.any(axis=0))[0])
        raise ValueError(f"frame {bad} is all zero; its graph direction is undefined")
    return X


def fit(
    X: FeatureSequence | np.ndarray,
    config: SolverConfig,
    on_iteration=None,
) -> FitResult:
    """Run the alternating solver to completion.

    Parameters
    ----------
    X : FeatureSequence or (n, N) array, entries in [0, 1].
    config : SolverConfig.
    on_iteration : optional callable receiving the SolverState after every
        outer iteration (inspection hook; must not mutate the state).

    Iterates V -> U -> Z -> D -> Y -> Xtilde -> multipliers until the
    max norm of Y - Xtilde falls below ``config.tol`` (in ablation mode,
    the max norm of the U-D and V-Z residuals) or ``max_outer_iters`` is
    reached.  Deterministic for a fixed seed.
    """
    if isinstance(X, FeatureSequence):
        X = X.features
    X = _validate_input(X, config)
    n, N = X.shape
    ablation = config.mode is SolverMode.TSC_ABLATION

    rng = seeded_rng(config.seed)
    D = rng.uniform(0.0, 1.0, size=(n, config.r))
    D /= np.linalg.norm(D, axis=0)
    U = rng.uniform(0.0, 1.0, size=(n, config.r))
    U /= np.linalg.norm(U, axis=0)
    V = rng.uniform(0.0, 1e-2, size=(config.r, N))

    state = SolverState(
        Xtilde=X.copy(),
        Y=X.copy(),
        U=U,
        V=V,
        D=D,
        Z=V.copy(),
        LambdaXtilde=np.zeros((n, N)),
        LambdaU=np.zeros((n, config.r)),
        LambdaV=np.zeros((config.r, N)),
    )

    lap = build_temporal_laplacian(N, config.s)
    g0 = None if ablation else build_affinity(X, config.h)

    converged = False
    iterations = 0
    for it in range(1, config.max_outer_iters + 1):
        state.V = update_V(state, config, lap)
        syl_res = sylvester_residual(state.V, state, config, lap)
        state.U = update_U(state, config)
        state.Z = update_Z(state, config)
        state.D = update_D(state, config)
        warned = False
        if not ablation:
            state.Y = update_Y(state, config)
            state.Xtilde, warned = update_Xtilde(state, config, g0)
            if warned:
                warnings.warn(
                    f"auxiliary-data descent found no decrease at iteration {it}",
                    RuntimeWarning,
                    stacklevel=2,
                )
        LU, LV, LX = update_multipliers(state, config)
        state.LambdaU, state.LambdaV = LU, LV
        if not ablation:
            state.LambdaXtilde = LX

        gap = state.Y - state.Xtilde
        gap_inf = float(np.abs(gap).max())
        dict_gap = state.U - state.D
        code_gap = state.V - state.Z
        obj, gl = _objective(state, config, lap, g0)
        state.iteration = it
        state.diagnostics.append(
            IterationStats(
                iteration=it,
                objective=obj,
                graph_loss=gl,
                gap_fro=float(np.linalg.norm(gap)),
                gap_inf=gap_inf,
                dict_gap_fro=float(np.linalg.norm(dict_gap)),
                code_gap_fro=float(np.linalg.norm(code_gap)),
                sylvester_residual=syl_res,
                step_warning=warned,
            )
        )
        iterations = it
        if on_iteration is not None:
            on_iteration(state)

        if ablation:
            resid = max(float(np.abs(dict_gap).max()), float(np.abs(code_gap).max()))
        else:
            resid = gap_inf
        if resid < config.tol:
            converged = True
            break

    if not np.all(np.isfinite(state.Z)) or not np.all(np.isfinite(state.D)):
        raise NumericalError("solver produced non-finite iterates")

    return FitResult(
        Z=state.Z.copy(),
        D=state.D.copy(),
        Xtilde=state.Xtilde.copy(),
        diagnostics=state.diagnostics,
        converged=converged,
        iterations_run=iterations,
    )
