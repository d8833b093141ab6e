"""Gauss-Lobatto nodes, quadrature weights and preconditioner tables.

All tables live on the unit interval scaled by the step length dt. The
left endpoint is included as the first node, so the first node spacing
is zero and node 1 carries the initial condition through the
preconditioner sweep.
"""

import numpy as np

MAX_NODES = 12


class NodeCountError(ValueError):
    pass


class IllConditionedWeightsError(RuntimeError):
    pass


class NodeSet:
    """Gauss-Lobatto nodes on [0, 1]."""

    def __init__(self, taus):
        taus = np.asarray(taus, dtype=float)
        if taus.ndim != 1 or taus.size < 2:
            raise NodeCountError("need at least 2 nodes")
        if np.any(np.diff(taus) <= 0):
            raise ValueError("nodes must be strictly increasing")
        self.taus = taus
        self.M = taus.size

    def __repr__(self):
        return "NodeSet(M=%d)" % self.M


def _legendre_and_deriv(n, x):
    """Value and derivative of the Legendre polynomial P_n at x (array)."""
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev, np.zeros_like(x)
    p = x.copy()
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    # derivative from the standard identity, valid away from |x| = 1
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def lobatto_nodes(M):
    """Gauss-Lobatto points on [0, 1] for M nodes.

    Interior points are the roots of P'_{M-1}, found by Newton iteration
    on Chebyshev-Gauss-Lobatto initial guesses.
    """
    if not (2 <= M <= MAX_NODES):
        raise NodeCountError("node count must be in [2, %d], got %s" % (MAX_NODES, M))
    if M == 2:
        return NodeSet([0.0, 1.0])

    n = M - 1
    # Chebyshev-Gauss-Lobatto guesses for the interior roots on [-1, 1]
    x = -np.cos(np.pi * np.arange(1, n) / n)
    for _ in range(100):
        # Newton on q(x) = P'_n(x); q'(x) from the Legendre ODE:
        # (1 - x^2) P''_n = 2 x P'_n - n (n+1) P_n
        p, dp = _legendre_and_deriv(n, x)
        ddp = (2.0 * x * dp - n * (n + 1) * p) / (1.0 - x * x)
        dx = dp / ddp
        x -= dx
        if np.max(np.abs(dx)) < 1e-14:
            break
    # enforce Lobatto symmetry exactly
    x = 0.5 * (x - x[::-1])
    taus = np.concatenate(([0.0], 0.5 * (x + 1.0), [1.0]))
    return NodeSet(taus)


def quad_weights(nodes, dt):
    """Quadrature matrix Q and end-of-step weights for a node set.

    Q[m, j] integrates the j-th Lagrange basis polynomial from 0 to
    tau_m, scaled by dt. Rows are obtained from the moment system that
    enforces exactness on monomials up to degree M-1. Returns
    (Q, q_end) where q_end is the full-interval rule (last row of Q for
    Lobatto nodes).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    taus = nodes.taus
    M = nodes.M
    # V[k, j] = tau_j^k ; rhs[k, m] = tau_m^(k+1) / (k+1)
    powers = np.arange(M)
    V = taus[np.newaxis, :] ** powers[:, np.newaxis]
    rhs = taus[np.newaxis, :] ** (powers[:, np.newaxis] + 1) / (powers[:, np.newaxis] + 1)
    Q_unit = np.linalg.solve(V, rhs).T
    resid = np.max(np.abs(V @ Q_unit.T - rhs))
    if resid > 1e-10:
        raise IllConditionedWeightsError(
            "moment system residual %.3e exceeds 1e-10" % resid
        )
    Q = dt * Q_unit
    return Q, Q[-1].copy()


def qdelta_tables(nodes, dt):
    """Low-order preconditioner tables (QdE, QdI, QdT, QdE2).

    QdE and QdI accumulate the node spacings dtau_m = tau_m - tau_{m-1}
    (with tau_0 the left endpoint) in explicit-Euler and implicit-Euler
    banded patterns; QdT is their average and QdE2 the entrywise square
    of QdE.
    """
    taus = nodes.taus * dt
    M = nodes.M
    dtau = np.empty(M)
    dtau[0] = taus[0]
    dtau[1:] = np.diff(taus)
    QdE = np.zeros((M, M))
    QdI = np.zeros((M, M))
    for m in range(M):
        QdE[m, :m] = dtau[1 : m + 1]
        QdI[m, : m + 1] = dtau[: m + 1]
    QdT = 0.5 * (QdE + QdI)
    QdE2 = QdE * QdE
    return QdE, QdI, QdT, QdE2


class CollocationTables:
    """All per-step tables for M collocation nodes and step length dt."""

    def __init__(self, nodes, dt):
        self.nodes = nodes
        self.dt = float(dt)
        self.M = nodes.M
        if dt > 0:
            self.Q, self.q_end = quad_weights(nodes, dt)
        else:
            self.Q = np.zeros((nodes.M, nodes.M))
            self.q_end = np.zeros(nodes.M)
        self.QdE, self.QdI, self.QdT, self.QdE2 = qdelta_tables(nodes, dt)
        taus = nodes.taus * self.dt
        self.dtau = np.empty(nodes.M)
        self.dtau[0] = taus[0]
        self.dtau[1:] = np.diff(taus)

    @classmethod
    def lobatto(cls, M, dt):
        return cls(lobatto_nodes(M), dt)


def lagrange_eval(node_values, nodes, s):
    """Evaluate the interpolating polynomial through (tau_m, value_m) at s.

    Uses the barycentric form; node_values may be scalars of shape (M,)
    or vectors of shape (M, d). Evaluation at a node returns the node
    value exactly.
    """
    taus = nodes.taus
    values = np.asarray(node_values, dtype=float)
    diffs = s - taus
    hit = np.abs(diffs) < 1e-15
    if np.any(hit):
        return values[int(np.argmax(hit))]
    # barycentric weights (M is small; quadratic cost is fine)
    w = np.array([1.0 / np.prod(taus[j] - np.delete(taus, j)) for j in range(nodes.M)])
    coeff = w / diffs
    coeff /= coeff.sum()
    if values.ndim == 1:
        return float(coeff @ values)
    return coeff @ values
