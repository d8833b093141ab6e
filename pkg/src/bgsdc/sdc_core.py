"""Operators of the collocation problem and its Boris-based preconditioner.

The collocation unknown stacks positions and velocities at all nodes.
The preconditioner (identity minus the low-order tables applied to the
right-hand side) is solved by forward elimination node by node, using
the closed-form rotation solve for the implicit velocity diagonal.
"""

from dataclasses import dataclass

import numpy as np

from .integrators import boris_rotation_solve, cross3


def _cross_rows(vs, Bs):
    """Row-wise cross product of two (M, 3) stacks."""
    out = np.empty_like(vs)
    out[:, 0] = vs[:, 1] * Bs[:, 2] - vs[:, 2] * Bs[:, 1]
    out[:, 1] = vs[:, 2] * Bs[:, 0] - vs[:, 0] * Bs[:, 2]
    out[:, 2] = vs[:, 0] * Bs[:, 1] - vs[:, 1] * Bs[:, 0]
    return out


@dataclass
class NodeSolution:
    """Positions and velocities at the M collocation nodes, shape (M, 3)."""

    xs: np.ndarray
    vs: np.ndarray

    def copy(self):
        return NodeSolution(self.xs.copy(), self.vs.copy())

    @classmethod
    def constant(cls, x0, v0, M):
        return cls(np.tile(np.asarray(x0, float), (M, 1)),
                   np.tile(np.asarray(v0, float), (M, 1)))

    def flatten(self):
        return np.concatenate([self.xs.ravel(), self.vs.ravel()])

    @classmethod
    def unflatten(cls, vec, M):
        vec = np.asarray(vec, dtype=float)
        return cls(vec[: 3 * M].reshape(M, 3), vec[3 * M :].reshape(M, 3))


@dataclass
class RHSStack:
    """Right-hand side at the nodes: dxs = velocities, dvs = Lorentz forces."""

    dxs: np.ndarray
    dvs: np.ndarray


class FrozenField:
    """Field samples fixed at the predictor's node positions.

    Both B and E are frozen, which makes the linearized right-hand side
    affine in the unknown and the GMRES operator exactly linear once
    the constant part is shifted into the right-hand side.
    """

    def __init__(self, Bs, Es):
        self.Bs = np.asarray(Bs, dtype=float)
        self.Es = np.asarray(Es, dtype=float)

    @classmethod
    def from_positions(cls, xs, field):
        return cls([field.B_at(x) for x in xs], [field.E_at(x) for x in xs])

    def force(self, m, v, alpha):
        return alpha * (self.Es[m] + cross3(v, self.Bs[m]))

    def force_all(self, vs, alpha):
        return alpha * (self.Es + _cross_rows(vs, self.Bs))


def eval_F(U, field, alpha, counter=None, cached_f0=None):
    """Node-wise right-hand side of the collocation problem.

    If cached_f0 is given it is reused for node 1 (whose state never
    changes for Lobatto nodes) and only M-1 force evaluations are
    counted.
    """
    M = U.xs.shape[0]
    dvs = np.empty_like(U.vs)
    start = 0
    if cached_f0 is not None:
        dvs[0] = cached_f0
        start = 1
    for m in range(start, M):
        dvs[m] = alpha * (field.E_at(U.xs[m]) + cross3(U.vs[m], field.B_at(U.xs[m])))
    if counter is not None:
        counter.add(M - start)
    return RHSStack(dxs=U.vs.copy(), dvs=dvs)


def apply_QF(stack, tables):
    """Integrate the node right-hand sides with the quadrature matrix."""
    return NodeSolution(tables.Q @ stack.dxs, tables.Q @ stack.dvs)


def apply_collocation_operator(U, tables, frozen, alpha, U0=None):
    """U minus the quadrature applied to the frozen-field right-hand side.

    With U0 given the result is shifted by -U0, turning the operator
    value into the residual of the linearized node system.
    """
    forces = frozen.force_all(U.vs, alpha)
    xs = U.xs - tables.Q @ U.vs
    vs = U.vs - tables.Q @ forces
    if U0 is not None:
        xs = xs - U0.xs
        vs = vs - U0.vs
    return NodeSolution(xs, vs)


def solve_preconditioner(b, tables, frozen, alpha):
    """Forward elimination for the low-order system with frozen fields.

    Node m receives explicit contributions from already-eliminated
    nodes; the implicit velocity diagonal (half the node spacing) is
    resolved by the rotation solve against the frozen magnetic field.
    """
    M = tables.nodes.M
    xs = np.empty((M, 3))
    vs = np.empty((M, 3))
    fs = np.empty((M, 3))
    QdE, QdE2, QdT = tables.QdE, tables.QdE2, tables.QdT
    for m in range(M):
        xs[m] = b.xs[m] + QdE[m, :m] @ vs[:m] + 0.5 * (QdE2[m, :m] @ fs[:m])
        h = alpha * QdT[m, m]
        c = b.vs[m] + QdT[m, :m] @ fs[:m] + h * frozen.Es[m]
        vs[m] = boris_rotation_solve(c, h, frozen.Bs[m])
        fs[m] = frozen.force(m, vs[m], alpha)
    return NodeSolution(xs, vs)


def predictor_sweep(x0, v0, tables, field, alpha, counter=None):
    """Nonlinear Boris sweep: the elimination above with live fields.

    Returns the node solution together with the field samples at the
    computed positions, which seed the frozen linearization. Counts M
    force evaluations (one per node, including the initial condition).
    """
    M = tables.nodes.M
    xs = np.empty((M, 3))
    vs = np.empty((M, 3))
    fs = np.empty((M, 3))
    Bs = np.empty((M, 3))
    Es = np.empty((M, 3))
    QdE, QdE2, QdT = tables.QdE, tables.QdE2, tables.QdT
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    for m in range(M):
        xs[m] = x0 + QdE[m, :m] @ vs[:m] + 0.5 * (QdE2[m, :m] @ fs[:m])
        Bs[m] = field.B_at(xs[m])
        Es[m] = field.E_at(xs[m])
        h = alpha * QdT[m, m]
        c = v0 + QdT[m, :m] @ fs[:m] + h * Es[m]
        vs[m] = boris_rotation_solve(c, h, Bs[m])
        fs[m] = alpha * (Es[m] + cross3(vs[m], Bs[m]))
    if counter is not None:
        counter.add(M)
    return NodeSolution(xs, vs), FrozenField(Bs, Es), fs


def nonlinear_sweep(b, tables, field, alpha, counter=None, cached_f0=None):
    """Elimination solve of the low-order system with live fields.

    b collects the initial condition plus lagged quadrature terms; used
    for the non-accelerated Boris-SDC sweeps. Returns the node solution
    and the fresh force values at the new nodes.
    """
    M = tables.nodes.M
    xs = np.empty((M, 3))
    vs = np.empty((M, 3))
    fs = np.empty((M, 3))
    QdE, QdE2, QdT = tables.QdE, tables.QdE2, tables.QdT
    evals = 0
    for m in range(M):
        xs[m] = b.xs[m] + QdE[m, :m] @ vs[:m] + 0.5 * (QdE2[m, :m] @ fs[:m])
        if m == 0 and cached_f0 is not None:
            # node 1 is pinned to the initial condition for Lobatto nodes
            vs[0] = b.vs[0]
            fs[0] = cached_f0
            continue
        B = field.B_at(xs[m])
        E = field.E_at(xs[m])
        evals += 1
        h = alpha * QdT[m, m]
        c = b.vs[m] + QdT[m, :m] @ fs[:m] + h * E
        vs[m] = boris_rotation_solve(c, h, B)
        fs[m] = alpha * (E + cross3(vs[m], B))
    if counter is not None:
        counter.add(evals)
    return NodeSolution(xs, vs), fs


def picard_iteration(U, x0, v0, tables, field, alpha, counter=None, cached_f0=None):
    """One fixed-point pass U <- U0 + Q F(U) on the live nonlinear field."""
    stack = eval_F(U, field, alpha, counter=counter, cached_f0=cached_f0)
    inc = apply_QF(stack, tables)
    return NodeSolution(np.asarray(x0, float) + inc.xs,
                        np.asarray(v0, float) + inc.vs)


def collocation_update(U, x0, v0, tables, field, alpha, counter=None, cached_f0=None):
    """End-of-step update from the node solution.

    The position is taken from the endpoint node, whose quadrature
    point coincides with the step end; this keeps the two-node method
    bit-compatible with a velocity-Verlet Boris step. The velocity
    integrates fresh force values with the full-interval weights.
    """
    stack = eval_F(U, field, alpha, counter=counter, cached_f0=cached_f0)
    x_new = U.xs[-1].copy()
    v_new = np.asarray(v0, float) + tables.q_end @ stack.dvs
    return x_new, v_new


def collocation_residual(U, x0, v0, tables, field, alpha):
    """Max node-block norm of U - U0 - QF(U), relative to 1 + |v0|."""
    stack = eval_F(U, field, alpha)
    inc = apply_QF(stack, tables)
    rx = U.xs - np.asarray(x0, float) - inc.xs
    rv = U.vs - np.asarray(v0, float) - inc.vs
    scale = 1.0 + float(np.linalg.norm(v0))
    return max(np.max(np.linalg.norm(rx, axis=1)),
               np.max(np.linalg.norm(rv, axis=1))) / scale
