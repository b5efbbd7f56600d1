"""Ground states of -Delta u + lambda u = a (I_2 * u^2) u + nu u^(q-1).

The potential v = I_2 * u^2 is eliminated exactly at every evaluation through
the Newton-theorem sweep, so the nonlinear map F acts on u alone and its
Jacobian is self-adjoint in the r^2-weighted inner product.  newton_solve runs
a deterministic spectral-renormalization warm start (amplitude-stabilized
Picard iteration; plain damped Newton from generic bumps measurably stalls on
a near-singular Jacobian ridge between the trivial and ground branches),
then damped Newton with the step equation solved by a preconditioned
conjugate-residual iteration, preconditioned by the banded local part of the
Jacobian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp

from . import operators
from .errors import (ContinuationStuck, InvalidExponent, NegativeStateDetected,
                     NonConvergence, TrivialCollapse, WrongParams)
from .grid import EVEN, RadialField, RadialGrid, make_grid
from .hartree import coulomb_apply, hartree_potential

TRIVIAL_SUP = 1e-8


@dataclass(frozen=True)
class ModelParams:
    """One member of the family -Delta u + lam u = a (I_2*u^2) u + nu u^(q-1).

    The Kwong profile W is (lam=1, a=0, nu=1, q); the Choquard profile U is
    (lam=1, a=1, nu=0, q arbitrary); the symmetric convention used by the
    sector analysis doubles a.
    """
    lam: float
    a: float
    nu: float
    q: float

    def __post_init__(self):
        if not (2.0 < self.q < 6.0) or self.q == 3.0:
            raise InvalidExponent(f"q = {self.q} outside (2,3) u (3,6)")
        if self.a < 0 or self.nu < 0:
            raise ValueError("a and nu must be nonnegative")
        if self.a == 0 and self.nu == 0:
            raise ValueError("at least one of a, nu must be positive")
        if self.lam <= 0:
            raise ValueError("lam must be positive")

    def label(self):
        return f"(lam={self.lam:g}, a={self.a:g}, nu={self.nu:g}, q={self.q:g})"


@dataclass
class SolverOptions:
    tol: float = 1e-10           # relative residual in the r^2-weighted norm
    max_iter: int = 60
    damping: int = 20            # max step halvings per Newton iteration
    warm_iters: int = 60         # spectral-renormalization warm-start sweeps
    krylov_rtol: float = 1e-13
    krylov_maxiter: int = 400


@dataclass
class GroundState:
    params: ModelParams
    u: RadialField
    v: RadialField
    residual_norm: float
    iterations: int
    grid: RadialGrid
    diagnostics: Optional[object] = field(default=None, repr=False)

    def sup_u(self) -> float:
        return float(np.max(np.abs(self.u.values)))

    def sup_v(self) -> float:
        return float(np.max(np.abs(self.v.values)))


def auto_rmax(lam: float) -> float:
    """Domain size with e^(-sqrt(lam) r_max) < 1e-12 and the decay length
    resolved: 28 / sqrt(lam)."""
    return 28.0 / math.sqrt(lam)


def default_guess(params: ModelParams, grid: RadialGrid) -> RadialField:
    """Gaussian bump at the lambda decay scale; the warm start fixes amplitude."""
    r = grid.nodes
    vals = np.exp(-math.sqrt(params.lam) * r**2 / 4.0)
    vals[-2:] = 0.0
    return RadialField(grid=grid, values=vals, parity=EVEN)


def _power(u: np.ndarray, p: float) -> np.ndarray:
    """u^p, sign-safe: integer powers exactly, fractional ones clamped at 0."""
    if abs(p - round(p)) < 1e-14 and round(p) >= 1:
        return u ** int(round(p))
    return np.maximum(u, 0.0) ** p


def _dpower(u: np.ndarray, p: float) -> np.ndarray:
    """d/du of _power(u, p) = p u^(p-1)."""
    if abs(p - round(p)) < 1e-14 and round(p) >= 1:
        k = int(round(p))
        return float(k) * u ** (k - 1)
    return p * np.maximum(u, 0.0) ** (p - 1.0)


def _residual_values(u: np.ndarray, params: ModelParams, grid: RadialGrid,
                     A: sp.csr_matrix):
    v = coulomb_apply(grid, u * u) if params.a != 0.0 else np.zeros(grid.n)
    F = A @ u + params.lam * u - params.a * v * u - params.nu * _power(u, params.q - 1.0)
    F[-2] = u[-2]
    F[-1] = u[-1]
    return F, v


def residual(u: RadialField, params: ModelParams) -> RadialField:
    """F(u) = -Delta_r u + lam u - a v(u) u - nu u^(q-1); boundary rows carry
    the origin limit (row 0) and the Dirichlet pad values."""
    A = operators.radial_laplacian(u.grid)
    F, _ = _residual_values(u.values, params, u.grid, A)
    return RadialField(grid=u.grid, values=F, parity=EVEN)


def apply_jacobian(u: RadialField, delta: RadialField, params: ModelParams) -> RadialField:
    """Matrix-free J(u) delta, with the nonlocal screening term
    -a u (I_2 * (2 u delta)) from the same two-sweep as the potential."""
    if delta.grid != u.grid:
        raise WrongParams("direction lives on a different grid")
    grid = u.grid
    A = operators.radial_laplacian(grid)
    v = coulomb_apply(grid, u.values**2) if params.a != 0.0 else np.zeros(grid.n)
    y = _jacobian_matvec(u.values, v, params, grid, A, delta.values)
    return RadialField(grid=grid, values=y, parity=EVEN)


def _local_potential(u: np.ndarray, v: np.ndarray, params: ModelParams,
                     grid: RadialGrid) -> np.ndarray:
    pot = params.lam - params.a * v - params.nu * _dpower(u, params.q - 1.0)
    pot[-2:] = 0.0   # keep the Dirichlet pad rows as pure identities
    return pot


def _jacobian_matvec(u, v, params, grid, A, d):
    pot = _local_potential(u, v, params, grid)
    y = A @ d + pot * d
    if params.a != 0.0:
        screen = params.a * u * coulomb_apply(grid, 2.0 * u * d)
        screen[-2:] = 0.0
        y -= screen
    return y


def _wnorm(grid: RadialGrid, x: np.ndarray) -> float:
    return math.sqrt(float(np.dot(grid.weights_r2dr, x * x)))


def _warm_start(u, params, grid, A, sweeps):
    """Amplitude-stabilized Picard iteration (spectral renormalization).

    u <- S^gamma (A + lam)^(-1) N(u) with S the Rayleigh ratio of the linear
    and nonlinear pairings; gamma from the dominant homogeneity of N.
    """
    if sweeps <= 0:
        return u
    W = grid.weights_r2dr
    lu = operators.banded_lu(A + params.lam * _identity_masked(grid))
    gamma = 1.5 if params.a > 0 else (params.q - 1.0) / (params.q - 2.0)
    for _ in range(sweeps):
        if np.max(np.abs(u)) < TRIVIAL_SUP:
            break
        v = coulomb_apply(grid, u * u) if params.a != 0.0 else 0.0
        N = params.a * v * u + params.nu * _power(u, params.q - 1.0)
        num = float(np.dot(W * u, A @ u + params.lam * u))
        den = float(np.dot(W * u, N))
        if den <= 0.0 or not np.isfinite(den) or num <= 0.0:
            break
        w = lu.solve(N)
        w[-2:] = 0.0
        u = (num / den) ** gamma * w
    return u


def _identity_masked(grid: RadialGrid) -> sp.csr_matrix:
    """Identity with zeros at the two Dirichlet pad rows (already identities
    inside the Laplacian)."""
    d = np.ones(grid.n)
    d[-2:] = 0.0
    return sp.diags(d).tocsr()


def newton_solve(guess: RadialField, params: ModelParams,
                 opts: SolverOptions | None = None) -> GroundState:
    """Damped Newton with a deterministic warm start; see module docstring.

    Raises TrivialCollapse / NonConvergence / NegativeStateDetected.
    """
    opts = opts or SolverOptions()
    grid = guess.grid
    A = operators.radial_laplacian(grid)
    u = guess.values.astype(float).copy()
    u[-2:] = 0.0
    if np.max(np.abs(u)) < TRIVIAL_SUP:
        raise TrivialCollapse("initial guess is numerically zero")
    # the residual evaluation floor is eps/h^2 * ||u||; on the lambda-scaled
    # grids (h ~ 1/sqrt(lam)) that floor grows with lambda, so the stopping
    # tolerance carries the same factor (backward-error scaling)
    tol_eff = opts.tol * max(1.0, params.lam)

    u = _warm_start(u, params, grid, A, opts.warm_iters)

    nu_norm = _wnorm(grid, u)
    it = 0
    F, v = _residual_values(u, params, grid, A)
    nF = _wnorm(grid, F)
    for it in range(1, opts.max_iter + 1):
        sup = np.max(np.abs(u))
        if sup < TRIVIAL_SUP:
            raise TrivialCollapse(f"iterate collapsed (sup {sup:.2e})")
        nu_norm = _wnorm(grid, u)
        if nF <= tol_eff * nu_norm:
            break

        pot = _local_potential(u, v, params, grid)
        Jloc = A + sp.diags(pot)
        try:
            lu = operators.banded_lu(Jloc)
            precond = lu.solve
        except operators.FactorizationFailure:
            precond = None

        def matvec(d, u=u, v=v):
            return _jacobian_matvec(u, v, params, grid, A, d)

        d, relres, _ = operators.gcr_solve(matvec, -F, precond=precond,
                                           rtol=opts.krylov_rtol,
                                           maxiter=opts.krylov_maxiter)
        if relres > 1e-6:
            import scipy.sparse.linalg as spla
            op = spla.LinearOperator((grid.n, grid.n), matvec=matvec)
            M = (spla.LinearOperator((grid.n, grid.n), matvec=precond)
                 if precond is not None else None)
            d, _ = spla.lgmres(op, -F, M=M, rtol=opts.krylov_rtol, atol=0.0,
                               maxiter=opts.krylov_maxiter)

        t, accepted = 1.0, False
        for _ in range(opts.damping + 1):
            F_try, v_try = _residual_values(u + t * d, params, grid, A)
            if _wnorm(grid, F_try) < nF:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            raise NonConvergence(
                f"line search stalled at |F| = {nF:.3e} for {params.label()}",
                residual_norm=nF / max(nu_norm, 1e-300), iterations=it)
        u = u + t * d
        F, v = F_try, v_try
        nF = _wnorm(grid, F)
    else:
        nu_norm = _wnorm(grid, u)
        if not nF <= tol_eff * nu_norm:   # the last update may have converged
            raise NonConvergence(
                f"no convergence in {opts.max_iter} iterations for {params.label()}",
                residual_norm=nF / max(nu_norm, 1e-300), iterations=opts.max_iter)

    sup = float(np.max(u))
    if np.min(u[:-2]) < -1e-10 * max(sup, abs(float(np.min(u)))):
        raise NegativeStateDetected(
            f"converged to a sign-changing branch (min {np.min(u):.2e})")

    ufield = RadialField(grid=grid, values=u, parity=EVEN)
    hp = hartree_potential(ufield)
    state = GroundState(params=params, u=ufield, v=hp.v,
                        residual_norm=nF / nu_norm, iterations=it, grid=grid)
    from .diagnostics import identities  # deferred: diagnostics uses GroundState
    state.diagnostics = identities(state)
    return state


# -- canonical reference profiles ----------------------------------------------

_ref_cache: dict = {}


def reference_profile(kind: str, grid: RadialGrid, q: float | None = None) -> GroundState:
    """Kwong profile W (kind='kwong', exponent q) or Choquard profile U
    (kind='choquard') on the given grid; results are cached per (kind, q, grid)."""
    if kind == "kwong":
        if q is None:
            raise WrongParams("kwong profile needs q")
        params = ModelParams(lam=1.0, a=0.0, nu=1.0, q=q)
    elif kind == "choquard":
        params = ModelParams(lam=1.0, a=1.0, nu=0.0, q=4.0)  # q inert at nu=0
    else:
        raise WrongParams(f"unknown reference kind {kind!r}")
    key = (kind, None if kind == "choquard" else float(q), grid.key())
    hit = _ref_cache.get(key)
    if hit is not None:
        return hit
    r = grid.nodes
    if kind == "kwong":
        c = 3.0 * (q / 2.0) ** (1.0 / (q - 2.0))
        kap = (q - 2.0) / 2.0
        vals = c / np.cosh(kap * r) ** (2.0 / (q - 2.0))
    else:
        vals = 2.0 * np.exp(-r**2 / 4.0)
    vals[-2:] = 0.0
    guess = RadialField(grid=grid, values=vals, parity=EVEN)
    state = newton_solve(guess, params, SolverOptions())
    _ref_cache[key] = state
    return state


# -- continuation ----------------------------------------------------------------


def _interp_values(x0: float, x1: float, steps: int) -> np.ndarray:
    if x0 == x1:
        return np.full(steps, x0)
    if x0 > 0 and x1 > 0:
        return np.geomspace(x0, x1, steps)
    return np.linspace(x0, x1, steps)   # geometric undefined through 0


def _rescale_seed(state: GroundState, lam_new: float) -> RadialField:
    """Seed for a new lambda: nodally exact scaling-map transfer.

    The grid stretches with the decay length (r_max ~ 1/sqrt(lam)), so
    u_new[j] = s^alpha u_old[j] with s = lam_new/lam_old; alpha follows the
    limit profile the step moves toward (1/(q-2) toward W, 1 toward U).
    """
    from .scaling import limit_regime
    p = state.params
    s = lam_new / p.lam
    side = "zero" if lam_new < p.lam else "infinity"
    form, _ = limit_regime(p.q, side)
    alpha = 1.0 / (p.q - 2.0) if form == "mu_form" else 1.0
    new_grid = make_grid(state.grid.r_max / math.sqrt(s), state.grid.n)
    return RadialField(grid=new_grid, values=(s ** alpha) * state.u.values,
                       parity=EVEN)


def continuation_path(from_params: ModelParams, to_params: ModelParams,
                      steps: int, seed: GroundState,
                      opts: SolverOptions | None = None) -> list[GroundState]:
    """Solve along a geometric parameter path, reusing rescaled previous states.

    Returns `steps` states at the interpolated parameter values (the first one
    is the seed when the path starts at its parameters).  A failed step is
    bisected up to 6 times before ContinuationStuck.
    """
    if seed.params != from_params:
        raise WrongParams("seed was not converged at from_params")
    if from_params.q != to_params.q:
        raise WrongParams("q is not a continuation parameter")
    if steps < 1:
        raise ValueError("steps >= 1")
    opts = opts or SolverOptions()
    # steps points along the geometric path, ending at to_params; the seed's
    # own parameter point is not repeated (a trivial from == to path returns
    # the seed itself)
    lams = _interp_values(from_params.lam, to_params.lam, steps + 1)[1:]
    a_s = _interp_values(from_params.a, to_params.a, steps + 1)[1:]
    nus = _interp_values(from_params.nu, to_params.nu, steps + 1)[1:]

    out: list[GroundState] = []
    current = seed

    def solve_at(target: ModelParams, src: GroundState) -> GroundState:
        if target == src.params:
            return src
        if target.lam != src.params.lam:
            guess = _rescale_seed(src, target.lam)
        else:
            guess = src.u
        # seeded solves skip the warm start; Newton corrects the rescale
        o = replace(opts, warm_iters=0)
        return newton_solve(guess, target, o)

    for i in range(steps):
        target = ModelParams(lam=float(lams[i]), a=float(a_s[i]),
                             nu=float(nus[i]), q=from_params.q)
        stack = [target]
        depth = 0
        while stack:
            goal = stack[-1]
            try:
                current = solve_at(goal, current)
                stack.pop()
            except (NonConvergence, TrivialCollapse, NegativeStateDetected):
                depth += 1
                if depth > 6:
                    raise ContinuationStuck(
                        f"minimum step reached near {goal.label()}")
                mid = ModelParams(
                    lam=math.sqrt(current.params.lam * goal.lam),
                    a=0.5 * (current.params.a + goal.a)
                    if min(current.params.a, goal.a) == 0
                    else math.sqrt(current.params.a * goal.a),
                    nu=0.5 * (current.params.nu + goal.nu)
                    if min(current.params.nu, goal.nu) == 0
                    else math.sqrt(current.params.nu * goal.nu),
                    q=goal.q)
                stack.append(mid)
        out.append(current)
    return out


# -- multistart uniqueness scan ---------------------------------------------------


@dataclass
class ScanResult:
    distinct_states: list
    failed: int
    converged: int


def _sup_distance_rel(u1: np.ndarray, u2: np.ndarray) -> float:
    scale = max(np.max(np.abs(u1)), np.max(np.abs(u2)), 1e-300)
    return float(np.max(np.abs(u1 - u2))) / scale


def uniqueness_scan(params: ModelParams, n_starts: int, rng_seed: int,
                    grid: RadialGrid | None = None,
                    opts: SolverOptions | None = None,
                    dedup_tol: float = 1e-6) -> ScanResult:
    """Multi-start evidence for uniqueness: seeded Gaussian guesses
    c exp(-kappa r^2) with (c, kappa) log-uniform over [1e-2, 1e2]^2.

    Converged positive states are deduplicated by relative sup distance;
    everything else (non-convergence, collapse, sign change) counts as failed.
    """
    if n_starts < 2:
        raise ValueError("n_starts >= 2")
    grid = grid or make_grid(auto_rmax(params.lam), 4096)
    opts = opts or SolverOptions(max_iter=40, warm_iters=50)
    rng = np.random.default_rng(rng_seed)
    draws = 10.0 ** rng.uniform(-2.0, 2.0, size=(n_starts, 2))
    distinct: list[GroundState] = []
    failed = 0
    converged = 0
    for c, kappa in draws:
        vals = c * np.exp(-kappa * grid.nodes**2)
        vals[-2:] = 0.0
        guess = RadialField(grid=grid, values=vals, parity=EVEN)
        try:
            state = newton_solve(guess, params, opts)
        except (NonConvergence, TrivialCollapse, NegativeStateDetected):
            failed += 1
            continue
        converged += 1
        for known in distinct:
            if _sup_distance_rel(state.u.values, known.u.values) <= dedup_tol:
                break
        else:
            distinct.append(state)
    return ScanResult(distinct_states=distinct, failed=failed, converged=converged)
