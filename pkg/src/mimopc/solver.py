"""Unified convex power-control solver.

All three utilities are solved on the log-transformed problem in variables
(t_bar, eta_bar), t = e^{t_bar}, eta = e^{eta_bar}:

  gm     maximize sum_l log(log2(1+eps+e^{t_bar_l}))   (one t per cell)
  nwmmf  maximize t_bar                                (single shared t)
  nwpf   maximize sum_{lk} t_bar_{lk}                  (one t per user)

subject to, for every user, a log-sum-exp SINR constraint

  log( sum b e^{eta'+t-eta} + sum c e^{eta'+t-eta} + d e^{t-eta} ) <= log a

plus per-user boxes (UL) or per-cell log-sum-exp simplex constraints (DL).
Every constraint, including the power constraints, is a log-sum-exp of
affine terms, so one sparse exponent matrix drives values, gradients and
Hessians. The solve is a log-barrier Newton method with Armijo backtracking.

Note on curvature: the per-cell link log(log2(1+eps+e^x)) is concave only
for x above roughly log(sqrt(2*eps)); below that it is convex. Damped Newton
with Hessian regularization handles the indefinite region, and the grid
oracles in the test suite confirm global optimality at small scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import cho_factor, cho_solve

from .coefficients import DL, UL, SinrCoefficientSet, evaluate_sinr

GM, NWMMF, NWPF = "gm", "nwmmf", "nwpf"
SCHEMES = (GM, NWMMF, NWPF)


def concave_link(x, epsilon: float):
    """Value and first two derivatives of f(x) = log(log2(1+eps+e^x)).

    Stable for |x| up to several hundred. Returns (f, f', f'') with the same
    shape as x.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    x = np.asarray(x, dtype=float)
    one_eps = 1.0 + epsilon
    big = x > 30.0
    u = np.where(
        big,
        x + np.log1p(one_eps * np.exp(np.minimum(-x, 0.0))),
        np.log1p(epsilon + np.exp(np.minimum(x, 30.0))),
    )
    s = np.exp(x - u)            # e^x / (1+eps+e^x), exact in the log domain
    f = np.log(u) - math.log(math.log(2.0))
    f1 = s / u
    f2 = s * (1.0 - s) / u - (s / u) ** 2
    return f, f1, f2


# ---------------------------------------------------------------------------
# Problem construction
# ---------------------------------------------------------------------------

@dataclass
class ConvexProblem:
    scheme: str
    direction: str
    coeffs: SinrCoefficientSet
    epsilon: float
    # Variable layout: t variables first, then eta variables.
    n_vars: int
    n_t: int
    eta_index: np.ndarray        # (L, K) index into x, -1 for inactive users
    t_index: np.ndarray          # (L, K) t-variable index per user (-1 inactive)
    active_users: np.ndarray     # (L, K) bool
    active_cells: np.ndarray     # (L,) bool
    # Constraints: log-sum-exp(A x + logcoef)[segment] <= rhs.
    A: sp.csr_matrix             # (T, n_vars)
    logcoef: np.ndarray          # (T,)
    seg_ptr: np.ndarray          # (m+1,)
    rhs: np.ndarray              # (m,)
    n_sinr: int                  # SINR constraints come first
    sinr_user: np.ndarray        # (n_sinr, 2) the (l, k) of each SINR constraint
    degenerate: bool = False     # all-zero outcome (nwmmf/nwpf with a dead user)
    # Padded row structure of A: every term touches at most 3 variables, so
    # (T, 3) column/value arrays drive all evaluations with O(T) kernels
    # (scipy sparse products spend more time on format bookkeeping here).
    cols_pad: np.ndarray = field(default=None, repr=False)    # (T, 3) int
    vals_pad: np.ndarray = field(default=None, repr=False)    # (T, 3)
    seg_of_term: np.ndarray = field(default=None, repr=False)  # (T,)

    @property
    def n_cons(self) -> int:
        return len(self.rhs)


@dataclass
class SolveOutcome:
    scheme: str
    direction: str
    eta: np.ndarray              # (L, K)
    targets: np.ndarray          # () for nwmmf, (L,) for gm, (L, K) for nwpf
    sinr: np.ndarray             # (L, K) from evaluate_sinr at eta
    objective: float             # original (product/min) scale
    objective_log: float         # log-domain objective actually maximized
    kkt_residual: float
    constraint_violation: float
    iterations: int
    status: str                  # "optimal" | "max_iterations"
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    mu: float = float("nan")


class SolverError(RuntimeError):
    pass


def build_problem(coeffs: SinrCoefficientSet, scheme: str, epsilon: float,
                  dead_cells=()) -> ConvexProblem:
    """Assemble the log-domain problem for one utility.

    Cells listed in ``dead_cells``, and (for gm) cells containing a user with
    a == 0, are removed: their users get eta = 0 and target t = 0. For nwmmf
    and nwpf a dead user among the remaining cells makes the optimum all-zero
    and the problem is marked degenerate.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    L, K = coeffs.a.shape
    a = coeffs.a

    cell_alive = np.ones(L, dtype=bool)
    for l in dead_cells:
        cell_alive[l] = False
    user_dead = a <= 0.0
    degenerate = False
    if scheme == GM:
        cell_alive &= ~user_dead.any(axis=1)
    else:
        if user_dead[cell_alive].any():
            degenerate = True
    active_users = cell_alive[:, None] & np.ones((L, K), dtype=bool)

    # Variable layout.
    if scheme == GM:
        n_t = int(cell_alive.sum())
        t_of_cell = np.full(L, -1)
        t_of_cell[cell_alive] = np.arange(n_t)
        t_index = np.repeat(t_of_cell[:, None], K, axis=1)
    elif scheme == NWMMF:
        n_t = 1
        t_index = np.where(active_users, 0, -1)
    else:
        n_t = int(active_users.sum())
        t_index = np.full((L, K), -1)
        t_index[active_users] = np.arange(n_t)

    eta_index = np.full((L, K), -1)
    n_eta = int(active_users.sum())
    eta_index[active_users] = n_t + np.arange(n_eta)
    n_vars = n_t + n_eta

    rows, cols, vals, logcoef = [], [], [], []
    seg_ptr = [0]
    rhs = []
    sinr_user = []
    term = 0

    def add_term(lc: float, entries):
        nonlocal term
        for v, cf in entries:
            rows.append(term)
            cols.append(v)
            vals.append(cf)
        logcoef.append(lc)
        term += 1

    same = coeffs.pilot_group[:, None] == coeffs.pilot_group[None, :]
    for l in range(L):
        if not cell_alive[l]:
            continue
        for k in range(K):
            tv = t_index[l, k]
            ev = eta_index[l, k]
            for j in range(L):
                if not cell_alive[j]:
                    continue
                for p in range(K):
                    bj = coeffs.b[l, k, j, p]
                    if bj <= 0.0:
                        continue
                    if j == l and p == k:
                        add_term(math.log(bj), [(tv, 1.0)])
                    else:
                        add_term(math.log(bj),
                                 [(eta_index[j, p], 1.0), (tv, 1.0), (ev, -1.0)])
                if j != l and same[l, j]:
                    cj = coeffs.c[l, k, j]
                    if cj > 0.0:
                        add_term(math.log(cj),
                                 [(eta_index[j, k], 1.0), (tv, 1.0), (ev, -1.0)])
            add_term(math.log(coeffs.d[l, k]), [(tv, 1.0), (ev, -1.0)])
            seg_ptr.append(term)
            rhs.append(math.log(a[l, k]) if a[l, k] > 0 else -np.inf)
            sinr_user.append((l, k))
    n_sinr = len(rhs)

    if coeffs.direction == UL:
        for l in range(L):
            if not cell_alive[l]:
                continue
            for k in range(K):
                add_term(0.0, [(eta_index[l, k], 1.0)])
                seg_ptr.append(term)
                rhs.append(0.0)
    else:
        for l in range(L):
            if not cell_alive[l]:
                continue
            for k in range(K):
                add_term(0.0, [(eta_index[l, k], 1.0)])
            seg_ptr.append(term)
            rhs.append(0.0)

    A = sp.csr_matrix(
        (vals, (rows, cols)), shape=(term, n_vars), dtype=float
    )
    seg_ptr = np.asarray(seg_ptr, dtype=int)
    m = len(rhs)
    seg_of_term = np.repeat(np.arange(m), np.diff(seg_ptr))
    cols_pad = np.zeros((term, 3), dtype=int)
    vals_pad = np.zeros((term, 3))
    Acsr = A.tocsr()
    for t in range(term):
        s, e = Acsr.indptr[t], Acsr.indptr[t + 1]
        cols_pad[t, : e - s] = Acsr.indices[s:e]
        vals_pad[t, : e - s] = Acsr.data[s:e]
    return ConvexProblem(
        scheme=scheme, direction=coeffs.direction, coeffs=coeffs,
        epsilon=epsilon, n_vars=n_vars, n_t=n_t, eta_index=eta_index,
        t_index=t_index, active_users=active_users, active_cells=cell_alive,
        A=A, logcoef=np.asarray(logcoef), seg_ptr=seg_ptr,
        rhs=np.asarray(rhs), n_sinr=n_sinr,
        sinr_user=np.asarray(sinr_user, dtype=int).reshape(n_sinr, 2),
        degenerate=degenerate, cols_pad=cols_pad, vals_pad=vals_pad,
        seg_of_term=seg_of_term,
    )


# ---------------------------------------------------------------------------
# Barrier machinery
# ---------------------------------------------------------------------------

def _g_from_z(prob: ConvexProblem, z: np.ndarray):
    """Segmented log-sum-exp of precomputed exponents z; returns (g, w)."""
    starts = prob.seg_ptr[:-1]
    seg_max = np.maximum.reduceat(z, starts)
    e = np.exp(z - seg_max[prob.seg_of_term])
    seg_sum = np.add.reduceat(e, starts)
    g = seg_max + np.log(seg_sum) - prob.rhs
    w = e / seg_sum[prob.seg_of_term]
    return g, w


def _constraints(prob: ConvexProblem, x: np.ndarray):
    """Constraint values g (m,), per-term softmax weights w (T,)."""
    z = (prob.vals_pad * x[prob.cols_pad]).sum(axis=1) + prob.logcoef
    return _g_from_z(prob, z)


def _objective(prob: ConvexProblem, x: np.ndarray):
    """(phi, grad phi, diag Hessian of phi); phi is maximized."""
    n = prob.n_vars
    grad = np.zeros(n)
    hdiag = np.zeros(n)
    t = x[: prob.n_t]
    if prob.scheme == GM:
        f, f1, f2 = concave_link(t, prob.epsilon)
        grad[: prob.n_t] = f1
        hdiag[: prob.n_t] = f2
        phi = float(f.sum())
    elif prob.scheme == NWMMF:
        grad[0] = 1.0
        phi = float(t[0])
    else:
        grad[: prob.n_t] = 1.0
        phi = float(t.sum())
    return phi, grad, hdiag


def _barrier_value(prob, x, mu):
    """F(x) = -phi(x) - mu * sum log(-g); +inf outside the feasible interior."""
    g, _ = _constraints(prob, x)
    if np.any(g >= 0.0):
        return np.inf, g
    phi, _, _ = _objective(prob, x)
    return -phi - mu * np.log(-g).sum(), g


def _barrier_derivs(prob, x, mu):
    g, w = _constraints(prob, x)
    if np.any(g >= 0.0):
        raise SolverError("barrier evaluated at an infeasible point")
    phi, gphi, hphi = _objective(prob, x)
    alpha = mu / (-g)                         # dual estimates, > 0

    n = prob.n_vars
    m = alpha.size
    cols, vals, seg = prob.cols_pad, prob.vals_pad, prob.seg_of_term

    # Per-constraint gradients Q (m, n): softmax-weighted segment row sums.
    Q = np.zeros(m * n)
    for i in range(3):
        Q += np.bincount(seg * n + cols[:, i], weights=w * vals[:, i],
                         minlength=m * n)
    Q = Q.reshape(m, n)
    grad = -gphi + Q.T @ alpha

    # sum_i alpha_i * A^T diag(w_i) A over each segment: with at most three
    # variables per term this is nine scatter-adds of length-T products.
    u = w * alpha[seg]
    H = np.zeros(n * n)
    for i in range(3):
        ui = u * vals[:, i]
        for j in range(3):
            H += np.bincount(cols[:, i] * n + cols[:, j],
                             weights=ui * vals[:, j], minlength=n * n)
    H = H.reshape(n, n)
    coef = alpha**2 / mu - alpha              # weight on q_i q_i^T
    H += (Q * coef[:, None]).T @ Q
    H[np.diag_indices_from(H)] -= hphi        # -(d^2 phi); phi has diag Hessian
    val = -phi - mu * np.log(-g).sum()
    return val, grad, H, g, alpha


def _newton_step(H: np.ndarray, grad: np.ndarray) -> np.ndarray:
    n = H.shape[0]
    scale = max(np.abs(H).max(), 1.0)
    reg = 0.0
    for _ in range(60):
        try:
            c = cho_factor(H + reg * np.eye(n), lower=True)
            return cho_solve(c, -grad)
        except np.linalg.LinAlgError:
            reg = max(2.0 * reg, 1e-12 * scale)
    raise SolverError("Newton system factorization failed")


def _initial_point(prob: ConvexProblem) -> np.ndarray:
    L, K = prob.coeffs.a.shape
    eta = np.zeros((L, K))
    if prob.direction == UL:
        eta[prob.active_users] = 0.5
    else:
        eta[prob.active_users] = 1.0 / (2.0 * K)
    sinr = evaluate_sinr(prob.coeffs, eta)
    x = np.zeros(prob.n_vars)
    act = prob.active_users
    x[prob.eta_index[act]] = np.log(eta[act])
    margin = math.log(0.9)
    with np.errstate(divide="ignore"):
        log_sinr = np.log(sinr)
    if prob.scheme == GM:
        for l in np.flatnonzero(prob.active_cells):
            x[prob.t_index[l, 0]] = log_sinr[l].min() + margin
    elif prob.scheme == NWMMF:
        x[0] = log_sinr[act].min() + margin
    else:
        x[prob.t_index[act]] = log_sinr[act] + margin
    return x


def _zero_outcome(prob: ConvexProblem) -> SolveOutcome:
    L, K = prob.coeffs.a.shape
    eta = np.zeros((L, K))
    sinr = evaluate_sinr(prob.coeffs, eta)
    if prob.scheme == NWMMF:
        targets = np.float64(0.0)
    elif prob.scheme == GM:
        targets = np.zeros(L)
    else:
        targets = np.zeros((L, K))
    return SolveOutcome(
        scheme=prob.scheme, direction=prob.direction, eta=eta, targets=targets,
        sinr=sinr, objective=0.0, objective_log=-np.inf, kkt_residual=0.0,
        constraint_violation=0.0, iterations=0, status="optimal",
    )


def _subset_coeffs(coeffs: SinrCoefficientSet, keep: np.ndarray) -> SinrCoefficientSet:
    """Coefficient set restricted to the cells flagged in the boolean mask."""
    idx = np.flatnonzero(keep)
    return SinrCoefficientSet(
        coeffs.direction,
        coeffs.a[idx],
        coeffs.b[np.ix_(idx, np.arange(coeffs.a.shape[1]), idx)],
        coeffs.c[np.ix_(idx, np.arange(coeffs.a.shape[1]), idx)],
        coeffs.d[idx],
        coeffs.pilot_group[idx],
    )


def _embed_start(prob: ConvexProblem, eta_sub: np.ndarray,
                 t_sub: np.ndarray) -> np.ndarray:
    """Pack a strictly feasible (eta, per-cell t) pair into barrier variables."""
    x = np.zeros(prob.n_vars)
    idx = np.flatnonzero(prob.active_cells)
    for i, l in enumerate(idx):
        x[prob.t_index[l, 0]] = math.log(t_sub[i])
        for k in range(prob.coeffs.a.shape[1]):
            x[prob.eta_index[l, k]] = math.log(max(eta_sub[i, k], 1e-280))
    return x


def _gm_starts(prob: ConvexProblem):
    """Candidate starting points for the per-cell geometric-mean utility.

    The link function is convex below roughly sqrt(2 eps), so the log-domain
    problem is nonconvex in the low-SINR toe and has cell-shutdown stationary
    points. Starting from balanced allocations (equalized max-min, the
    closed-form heuristic, uniform power) and keeping the best final
    objective avoids those basins.
    """
    yield _initial_point(prob)
    if not prob.active_cells.any():
        return
    from .heuristic import approximate
    sub = _subset_coeffs(prob.coeffs, prob.active_cells)
    margin = 0.9
    try:
        mmf = bisection_nwmmf(sub)
        t = float(mmf.targets)
        if t > 0 and np.all(mmf.eta > 0):
            t_sub = np.full(sub.a.shape[0], margin * t)
            yield _embed_start(prob, mmf.eta * (1.0 - 1e-9), t_sub)
    except (ValueError, SolverError):
        pass
    try:
        h = approximate(sub)
        t_sub = margin * h.sinr_exact.min(axis=1)
        if np.all(t_sub > 0) and np.all(h.eta > 0):
            yield _embed_start(prob, h.eta * (1.0 - 1e-9), t_sub)
    except (ValueError, SolverError):
        pass


def _barrier_path(prob: ConvexProblem, x0: np.ndarray, tol: float,
                  mu0: float, max_newton: int):
    """Follow the central path from x0; returns (x, iterations, status)."""
    x = x0.copy()
    m = prob.n_cons
    mu = mu0
    total_iters = 0
    status = "optimal"
    while True:
        last_stage = m * mu <= tol
        stage_tol = 1e-9 if last_stage else max(1e-9, 1e-3 * mu)
        stage_cap = 200 if last_stage else 80
        converged = False
        for _ in range(stage_cap):
            if total_iters >= max_newton:
                status = "max_iterations"
                break
            val, grad, H, g, alpha = _barrier_derivs(prob, x, mu)
            if np.abs(grad).max() <= stage_tol:
                converged = True
                break
            step = _newton_step(H, grad)
            total_iters += 1
            t_ls = 1.0
            accepted = False
            slope = float(grad @ step)
            for _ in range(60):
                x_try = x + t_ls * step
                g_try, _ = _constraints(prob, x_try)
                if np.all(g_try < 0.0):
                    phi_try, _, _ = _objective(prob, x_try)
                    new_val = -phi_try - mu * np.log(-g_try).sum()
                    if new_val <= val + 0.25 * t_ls * slope:
                        x = x_try
                        accepted = True
                        break
                t_ls *= 0.5
            if not accepted:
                break   # stalled: step below resolution at this mu
        if last_stage or status == "max_iterations":
            if last_stage and not converged:
                # A mild line-search stall near the central path is harmless;
                # flag only points whose stationarity is far from the target.
                _, grad, _, _, _ = _barrier_derivs(prob, x, mu)
                if np.abs(grad).max() > math.sqrt(tol):
                    status = "max_iterations"
            break
        mu /= 10.0
    return x, mu, total_iters, status


def solve(prob: ConvexProblem, tol: float = 1e-6, max_newton: int = 4000,
          mu0: float | None = None) -> SolveOutcome:
    """Barrier method on the log-domain problem.

    The outer loop shrinks mu by 10x until m * mu <= tol; inner damped Newton
    iterations run to a small gradient norm at the final mu. KKT residuals
    are reported from the final barrier point with dual estimates mu / (-g).
    The gm scheme is solved from several starting points (see _gm_starts)
    and the best final objective is kept; a moderate initial mu keeps the
    early centering from erasing the warm starts.
    """
    if prob.degenerate:
        return _zero_outcome(prob)

    if prob.scheme == GM:
        mu_start = 1e-2 if mu0 is None else mu0
        best = _solve_from_starts(prob, _gm_starts(prob), tol, max_newton,
                                  mu_start)
        return _gm_shutdown_pass(prob, best, tol, max_newton, mu_start)

    mu_start = 1.0 if mu0 is None else mu0
    return _solve_from_starts(prob, [_initial_point(prob)], tol, max_newton,
                              mu_start)


def _solve_from_starts(prob, starts, tol, max_newton, mu_start) -> SolveOutcome:
    best = None
    for x0 in starts:
        g0, _ = _constraints(prob, x0)
        if np.any(g0 >= 0.0):
            continue
        x, mu, iters, status = _barrier_path(prob, x0, tol, mu_start,
                                             max_newton)
        val, grad, H, g, alpha = _barrier_derivs(prob, x, mu)
        out = _finalize(prob, x, g, alpha, grad, mu, iters, status)
        if best is None or out.objective_log > best.objective_log:
            best = out
    if best is None:
        raise SolverError("no strictly feasible starting point found")
    return best


def _gm_all_off_outcome(coeffs: SinrCoefficientSet, epsilon: float,
                        direction: str) -> SolveOutcome:
    L, K = coeffs.a.shape
    eta = np.zeros((L, K))
    floor = math.log(math.log2(1.0 + epsilon))
    return SolveOutcome(
        scheme=GM, direction=direction, eta=eta, targets=np.zeros(L),
        sinr=evaluate_sinr(coeffs, eta), objective=math.exp(L * floor),
        objective_log=L * floor, kkt_residual=0.0, constraint_violation=0.0,
        iterations=0, status="optimal",
    )


def _gm_shutdown_pass(prob: ConvexProblem, best: SolveOutcome, tol: float,
                      max_newton: int, mu_start: float) -> SolveOutcome:
    """Greedy cell-shutdown improvement for the geometric-mean utility.

    Because the rate floor log2(1 + eps) keeps the utility finite at zero
    SINR, switching a hopelessly interfered cell off entirely can beat every
    interior allocation; the barrier method cannot reach that boundary.
    Cells whose optimal target falls in the convex toe of the link function
    (below sqrt(2 eps)) are tried one at a time, keeping any shutdown that
    improves the overall objective.
    """
    toe = math.sqrt(2.0 * prob.epsilon)
    dead = [l for l in range(prob.coeffs.a.shape[0])
            if not prob.active_cells[l]]
    current, cur_prob = best, prob
    while True:
        cand = [l for l in np.flatnonzero(cur_prob.active_cells)
                if current.targets[l] < toe]
        improved = False
        for l in sorted(cand, key=lambda l: current.targets[l]):
            trial_dead = tuple(dead) + (l,)
            trial_prob = build_problem(prob.coeffs, GM, prob.epsilon,
                                       dead_cells=trial_dead)
            if not trial_prob.active_cells.any():
                trial = _gm_all_off_outcome(prob.coeffs, prob.epsilon,
                                            prob.direction)
            else:
                trial = _solve_from_starts(trial_prob, _gm_starts(trial_prob),
                                           tol, max_newton, mu_start)
            if trial.objective_log > current.objective_log + 1e-12:
                current, cur_prob = trial, trial_prob
                dead.append(l)
                improved = True
                break
        if not improved:
            return current


def _finalize(prob, x, g, alpha, barrier_grad, mu, iterations, status) -> SolveOutcome:
    L, K = prob.coeffs.a.shape
    eta = np.zeros((L, K))
    act = prob.active_users
    eta[act] = np.exp(x[prob.eta_index[act]])
    sinr = evaluate_sinr(prob.coeffs, eta)

    if prob.scheme == GM:
        targets = np.zeros(L)
        for l in np.flatnonzero(prob.active_cells):
            targets[l] = math.exp(x[prob.t_index[l, 0]])
        f, _, _ = concave_link(np.log(np.maximum(targets, 1e-300)), prob.epsilon)
        # dead cells contribute the floor log2(1+eps)
        floor = math.log(math.log2(1.0 + prob.epsilon))
        obj_log = float(np.where(prob.active_cells, f, floor).sum())
        objective = math.exp(obj_log)
    elif prob.scheme == NWMMF:
        targets = np.float64(math.exp(x[0]))
        objective = float(targets)
        obj_log = float(x[0])
    else:
        targets = np.zeros((L, K))
        targets[act] = np.exp(x[prob.t_index[act]])
        obj_log = float(x[prob.t_index[act]].sum())
        with np.errstate(over="ignore", under="ignore"):
            objective = float(np.exp(obj_log))
    return SolveOutcome(
        scheme=prob.scheme, direction=prob.direction, eta=eta, targets=targets,
        sinr=sinr, objective=objective, objective_log=obj_log,
        kkt_residual=float(np.abs(barrier_grad).max()),
        constraint_violation=float(max(g.max(), 0.0)),
        iterations=iterations, status=status, x=x.copy(), duals=alpha.copy(),
        mu=mu,
    )


def verify_kkt(prob: ConvexProblem, outcome: SolveOutcome) -> dict:
    """Stationarity / feasibility / complementary-slackness residual report."""
    if outcome.x is None or outcome.duals is None:
        raise ValueError("outcome carries no primal-dual point (bisection result?)")
    x, lam = outcome.x, outcome.duals
    g, w = _constraints(prob, x)
    _, gphi, _ = _objective(prob, x)
    n, m = prob.n_vars, prob.n_cons
    Q = np.zeros(m * n)
    for i in range(3):
        Q += np.bincount(prob.seg_of_term * n + prob.cols_pad[:, i],
                         weights=w * prob.vals_pad[:, i], minlength=m * n)
    Q = Q.reshape(m, n)
    stationarity = float(np.abs(gphi - Q.T @ lam).max())
    primal = float(max(g.max(), 0.0))
    dual = float(max(-lam.min(), 0.0))
    slack = float(np.abs(lam * g).max())
    return {
        "stationarity": stationarity,
        "primal_feasibility": primal,
        "dual_feasibility": dual,
        "complementary_slackness": slack,
        "max_residual": max(stationarity, primal, dual, slack),
    }


# ---------------------------------------------------------------------------
# NW-MMF by bisection over a monotone fixed-point feasibility check
# ---------------------------------------------------------------------------

def fixed_point_allocation(coeffs: SinrCoefficientSet, t: float,
                           max_iter: int = 20000,
                           rel_tol: float = 1e-13) -> np.ndarray | None:
    """Minimal powers giving every user SINR exactly t, or None if infeasible.

    Iterates eta <- t * I(eta) from zero, where I is the standard
    interference mapping of the general SINR form. The iterates increase
    monotonically to the minimal fixed point; crossing the power budget
    (per-user box for UL, per-cell sum for DL) proves infeasibility.
    """
    if t <= 0.0:
        return np.zeros_like(coeffs.a)
    a, b, c, d = coeffs.a, coeffs.b, coeffs.c, coeffs.d
    if np.any(a <= 0):
        return None
    eta = np.zeros_like(a)
    for _ in range(max_iter):
        interference = (
            np.einsum("lkjp,jp->lk", b, eta)
            + np.einsum("lkj,jk->lk", c, eta)
            + d
        )
        new = t * interference / a
        if coeffs.direction == UL:
            if np.any(new > 1.0 + 1e-12):
                return None
        else:
            if np.any(new.sum(axis=1) > 1.0 + 1e-12):
                return None
        if np.all(np.abs(new - eta) <= rel_tol * np.maximum(new, 1e-300)):
            return new
        eta = new
    return eta   # monotone and within budget for the whole cap: feasible


def bisection_nwmmf(coeffs: SinrCoefficientSet, tol: float = 1e-6,
                    max_bisect: int = 200) -> SolveOutcome:
    """Network-wide max-min SINR by bisection on the target t."""
    a, d = coeffs.a, coeffs.d
    if np.any(a <= 0):
        prob = build_problem(coeffs, NWMMF, 1e-3)
        return _zero_outcome(prob)
    lo, eta_lo = 0.0, np.zeros_like(a)
    hi = float((a / d).min())
    iters = 0
    for _ in range(max_bisect):
        if hi - lo <= tol * max(hi, 1e-300):
            break
        mid = 0.5 * (lo + hi)
        eta = fixed_point_allocation(coeffs, mid)
        iters += 1
        if eta is None:
            hi = mid
        else:
            lo, eta_lo = mid, eta
    sinr = evaluate_sinr(coeffs, eta_lo)
    return SolveOutcome(
        scheme=NWMMF, direction=coeffs.direction, eta=eta_lo,
        targets=np.float64(lo), sinr=sinr, objective=lo, objective_log=
        (math.log(lo) if lo > 0 else -np.inf),
        kkt_residual=float("nan"), constraint_violation=0.0,
        iterations=iters, status="optimal",
    )
