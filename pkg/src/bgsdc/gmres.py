"""Matrix-free GMRES with Givens rotations, tailored to small systems.

The operator is supplied as a callable on flat vectors. There are no
restarts: the node systems solved here have dimension 6M, so the full
Arnoldi basis is tiny and a fixed small iteration count is the normal
mode of use.
"""

from dataclasses import dataclass, field

import numpy as np

BREAKDOWN_TOL = 1e-14
REORTH_FACTOR = 1e-3


@dataclass
class KrylovResult:
    """Outcome of a GMRES solve."""

    solution: np.ndarray
    residual_history: list = field(default_factory=list)
    iterations_used: int = 0
    converged: bool = False
    breakdown: bool = False


def _givens(a, b):
    """Rotation (c, s) zeroing b in the pair (a, b)."""
    r = np.hypot(a, b)
    if r == 0.0:
        return 1.0, 0.0
    return a / r, b / r


def gmres_solve(apply_A, rhs, x0=None, max_iter=None, abs_tol=None):
    """Solve A x = rhs with full (unrestarted) GMRES.

    apply_A maps a flat vector to a flat vector and must be linear.
    Iterates until max_iter Arnoldi steps (default: the dimension) or
    until the residual drops below abs_tol (default 1e-14 * |rhs|).
    A vanishing Arnoldi vector is flagged as breakdown and treated as
    convergence of the Krylov space.
    """
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.size
    if max_iter is None:
        max_iter = n
    max_iter = min(max_iter, n)
    rhs_norm = float(np.linalg.norm(rhs))
    if abs_tol is None:
        abs_tol = 1e-14 * rhs_norm

    if x0 is None:
        x = np.zeros(n)
        r = rhs.copy()
    else:
        x = np.asarray(x0, dtype=float).copy()
        r = rhs - apply_A(x)
    beta = float(np.linalg.norm(r))
    history = [beta]
    if beta <= abs_tol or max_iter == 0:
        return KrylovResult(solution=x, residual_history=history,
                            iterations_used=0, converged=beta <= abs_tol)

    V = np.zeros((max_iter + 1, n))
    H = np.zeros((max_iter + 1, max_iter))
    cs = np.zeros(max_iter)
    sn = np.zeros(max_iter)
    g = np.zeros(max_iter + 1)
    V[0] = r / beta
    g[0] = beta

    breakdown = False
    k_done = 0
    for k in range(max_iter):
        # copy: the operator may return its input (or a view of it), and
        # the orthogonalization below updates w in place
        w = np.array(apply_A(V[k]), dtype=float, copy=True)
        norm_before = float(np.linalg.norm(w))
        # modified Gram-Schmidt with a second pass when cancellation is severe
        for j in range(k + 1):
            H[j, k] = float(w @ V[j])
            w -= H[j, k] * V[j]
        if float(np.linalg.norm(w)) < REORTH_FACTOR * norm_before:
            for j in range(k + 1):
                h2 = float(w @ V[j])
                H[j, k] += h2
                w -= h2 * V[j]
        H[k + 1, k] = float(np.linalg.norm(w))

        if H[k + 1, k] < BREAKDOWN_TOL:
            breakdown = True
        else:
            V[k + 1] = w / H[k + 1, k]

        # apply accumulated rotations to the new column, then a fresh one
        for j in range(k):
            h0 = cs[j] * H[j, k] + sn[j] * H[j + 1, k]
            H[j + 1, k] = -sn[j] * H[j, k] + cs[j] * H[j + 1, k]
            H[j, k] = h0
        cs[k], sn[k] = _givens(H[k, k], H[k + 1, k])
        H[k, k] = cs[k] * H[k, k] + sn[k] * H[k + 1, k]
        H[k + 1, k] = 0.0
        g[k + 1] = -sn[k] * g[k]
        g[k] = cs[k] * g[k]

        res = abs(g[k + 1])
        history.append(min(res, history[-1]))
        k_done = k + 1
        if breakdown or res <= abs_tol:
            break

    y = np.linalg.solve(H[:k_done, :k_done], g[:k_done])
    x = x + V[:k_done].T @ y
    converged = history[-1] <= abs_tol or breakdown
    return KrylovResult(solution=x, residual_history=history,
                        iterations_used=k_done, converged=converged,
                        breakdown=breakdown)
