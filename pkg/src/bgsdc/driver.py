"""Time-step orchestration, trajectory driving and the cost model.

One accelerated step runs: nonlinear predictor sweep, a few GMRES
iterations on the field-frozen linearization, a few Picard passes on
the live field, and the end-of-step update. The same driver also runs
the plain Boris integrators and non-accelerated sweeps so every method
shares recording and work accounting.
"""

from dataclasses import dataclass

import numpy as np

from . import fastpath
from .collocation import CollocationTables
from .gmres import gmres_solve
from .integrators import (
    ParticleState,
    staggered_init,
    step_nonstaggered,
    step_staggered,
)
from .sdc_core import (
    NodeSolution,
    apply_collocation_operator,
    collocation_update,
    eval_F,
    nonlinear_sweep,
    picard_iteration,
    predictor_sweep,
    solve_preconditioner,
)

METHODS = ("staggered-boris", "nonstaggered-boris", "boris-sdc", "bgsdc")


@dataclass(frozen=True)
class MethodConfig:
    """Which stepper to run and its iteration counts."""

    method: str
    M: int = 2
    K_gmres: int = 0
    K_picard: int = 0
    K_sweeps: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError("unknown method %r" % (self.method,))
        if self.method in ("boris-sdc", "bgsdc") and self.M < 2:
            raise ValueError("collocation methods need M >= 2")
        if self.K_gmres < 0 or self.K_picard < 0:
            raise ValueError("iteration counts must be >= 0")
        if self.method == "boris-sdc" and self.K_sweeps < 1:
            raise ValueError("boris-sdc needs K_sweeps >= 1")

    def label(self):
        if self.method == "bgsdc":
            return "bgsdc(%d,%d)-M%d" % (self.K_gmres, self.K_picard, self.M)
        if self.method == "boris-sdc":
            return "boris-sdc(%d)-M%d" % (self.K_sweeps, self.M)
        return self.method


class WorkCounter:
    """Running count of force-evaluation equivalents."""

    def __init__(self):
        self.f_evals = 0

    def add(self, n):
        if n < 0:
            raise ValueError("work increments are non-negative")
        self.f_evals += int(n)


def predicted_work_serial(N_steps, M, K_picard):
    """Cost model for one processor: predictor, linearization, Picard
    passes and update, each stage priced per the node-evaluation
    convention (M for the predictor, M-1 for every later stage)."""
    return N_steps * (3 * M - 2 + (M - 1) * K_picard)


def predicted_work_parallel(N_steps, M, K_picard, tau_overhead=0.0):
    """Cost model with the M-1 interior nodes evaluated concurrently."""
    if tau_overhead < 0:
        raise ValueError("tau_overhead must be >= 0")
    return N_steps * (M + 2 + K_picard + tau_overhead)


@dataclass
class RunRecord:
    """Everything a trajectory run produces."""

    ts: np.ndarray            # (N+1,)
    xs: np.ndarray            # (N+1, 3) positions
    vs: np.ndarray            # (N+1, 3) velocities (half-step ones if staggered)
    energy: np.ndarray        # (N+1,) total energy of the recorded states
    work: WorkCounter
    config: MethodConfig
    dt: float
    staggered: bool = False
    node_data: list = None    # per-step NodeSolution when retained

    @property
    def n_steps(self):
        return len(self.ts) - 1


class NonFiniteStateError(FloatingPointError):
    def __init__(self, step_index):
        super().__init__("non-finite state after step %d" % step_index)
        self.step_index = step_index


def _gmres_correction(U_pred, x0, v0, tables, frozen, alpha, k_gmres):
    """Krylov solve of the preconditioned linearization.

    With both field components frozen the preconditioned operator is
    affine; subtracting its value at zero makes the map handed to
    GMRES exactly linear, with the constant folded into the right-hand
    side. The predictor provides the initial guess.
    """
    M = tables.M

    def base(u):
        U = NodeSolution.unflatten(u, M)
        b = apply_collocation_operator(U, tables, frozen, alpha)
        return solve_preconditioner(b, tables, frozen, alpha).flatten()

    base0 = base(np.zeros(6 * M))

    def apply_A(u):
        return base(u) - base0

    U0 = NodeSolution.constant(x0, v0, M)
    rhs = solve_preconditioner(U0, tables, frozen, alpha).flatten() - base0
    result = gmres_solve(apply_A, rhs, x0=U_pred.flatten(), max_iter=k_gmres)
    return NodeSolution.unflatten(result.solution, M), result


def bgsdc_step(x0, v0, dt, field, alpha, config, counter=None, tables=None):
    """One accelerated step; returns (x_new, v_new, node_data).

    The GMRES stage solves the preconditioned linearization with the
    fields frozen at the predictor positions, starting from the
    predictor itself; Picard passes then re-couple the live field.
    The linearized right-hand side is priced at one evaluation per
    interior node even though the field samples come from the
    predictor.
    """
    if tables is None:
        tables = CollocationTables.lobatto(config.M, dt)
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    M = tables.M

    U, frozen, fs = predictor_sweep(x0, v0, tables, field, alpha,
                                    counter=counter)
    f0 = fs[0]

    if config.K_gmres > 0:
        U, _ = _gmres_correction(U, x0, v0, tables, frozen, alpha,
                                 config.K_gmres)
        if counter is not None:
            counter.add(M - 1)

    for _ in range(config.K_picard):
        U = picard_iteration(U, x0, v0, tables, field, alpha,
                             counter=counter, cached_f0=f0)

    x_new, v_new = collocation_update(U, x0, v0, tables, field, alpha,
                                      counter=counter, cached_f0=f0)
    return x_new, v_new, U


def boris_sdc_step(x0, v0, dt, field, alpha, config, counter=None,
                   tables=None):
    """One non-accelerated step: predictor plus K_sweeps corrections.

    Each correction solves the low-order system against the live field
    with the lagged high-order quadrature moved to the right-hand side,
    then the usual end-of-step update is applied.
    """
    if tables is None:
        tables = CollocationTables.lobatto(config.M, dt)
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)

    U, _, fs = predictor_sweep(x0, v0, tables, field, alpha, counter=counter)
    f0 = fs[0]

    for _ in range(config.K_sweeps):
        stack = eval_F(U, field, alpha, counter=counter, cached_f0=f0)
        bx = x0 + tables.Q @ stack.dxs \
            - (tables.QdE @ U.vs + 0.5 * (tables.QdE2 @ stack.dvs))
        bv = v0 + (tables.Q - tables.QdT) @ stack.dvs
        U, fs = nonlinear_sweep(NodeSolution(bx, bv), tables, field, alpha,
                                counter=counter, cached_f0=f0)

    x_new, v_new = collocation_update(U, x0, v0, tables, field, alpha,
                                      counter=counter, cached_f0=f0)
    return x_new, v_new, U


def _energy(x, v, field, alpha):
    return 0.5 * float(v @ v) + alpha * field.potential_at(x)


def _run_trajectory_fast(initial, dt, N_steps, field, alpha, config,
                         store_nodes):
    """Compiled-kernel variant of run_trajectory; same record layout."""
    code, fparams = fastpath.encode_field(field)
    counter = WorkCounter()
    x0 = np.asarray(initial.x, float).copy()
    v0 = np.asarray(initial.v, float).copy()
    t0 = float(initial.t)
    node_data = None
    staggered = False
    if config.method == "bgsdc":
        tables = CollocationTables.lobatto(config.M, dt)
        xs, vs, nxs, nvs, bad = fastpath._run_bgsdc(
            x0, v0, dt, N_steps, code, fparams, alpha,
            config.K_gmres, config.K_picard,
            tables.Q, tables.QdE, tables.QdE2, tables.QdT, tables.q_end,
            store_nodes)
        per_step = config.M + (config.M - 1) * (config.K_picard + 1)
        if config.K_gmres > 0:
            per_step += config.M - 1
        counter.add(per_step * (len(xs) - 1))
        if store_nodes:
            node_data = [NodeSolution(nxs[i], nvs[i]) for i in range(len(nxs))]
    elif config.method == "nonstaggered-boris":
        xs, vs, bad = fastpath._run_nonstaggered(x0, v0, dt, N_steps, code,
                                                 fparams, alpha)
        counter.add(len(xs) - 1)
    else:
        xs, vs, bad = fastpath._run_staggered(x0, v0, dt, N_steps, code,
                                              fparams, alpha)
        counter.add(len(xs))
        staggered = True
    if bad >= 0:
        raise NonFiniteStateError(bad)
    ts = t0 + dt * np.arange(N_steps + 1)
    energy = np.array([0.5 * float(v @ v) + alpha * field.potential_at(x)
                       for x, v in zip(xs, vs)])
    return RunRecord(ts=ts, xs=xs, vs=vs, energy=energy, work=counter,
                     config=config, dt=dt, staggered=staggered,
                     node_data=node_data)


def run_trajectory(initial, dt, N_steps, field, alpha, config,
                   store_nodes=False, fast="auto"):
    """Apply the configured stepper N_steps times and record everything.

    For the staggered method the recorded velocities are the half-step
    ones; the record is flagged so diagnostics can synchronize them.
    Aborts with the step index if a state stops being finite. With
    fast="auto" (the default) runs on built-in analytic fields use the
    compiled kernels from fastpath when numba is importable; fast=False
    forces the reference loop, fast=True requires the kernels.
    """
    if N_steps < 1:
        raise ValueError("N_steps must be >= 1")
    if fast != False:  # noqa: E712  - tri-state: "auto" / True / False
        supported = (fastpath.HAVE_NUMBA
                     and config.method in ("bgsdc", "nonstaggered-boris",
                                           "staggered-boris")
                     and fastpath.encode_field(field) is not None
                     and dt > 0)
        if supported:
            return _run_trajectory_fast(initial, dt, N_steps, field, alpha,
                                        config, store_nodes)
        if fast == True:  # noqa: E712
            raise RuntimeError("compiled kernels unavailable for this "
                               "field/method combination")
    counter = WorkCounter()
    n_rec = N_steps + 1
    ts = np.empty(n_rec)
    xs = np.empty((n_rec, 3))
    vs = np.empty((n_rec, 3))
    energy = np.empty(n_rec)
    node_data = [] if store_nodes else None

    staggered = config.method == "staggered-boris"
    collocated = config.method in ("boris-sdc", "bgsdc")
    tables = CollocationTables.lobatto(config.M, dt) if collocated else None
    stepper = bgsdc_step if config.method == "bgsdc" else boris_sdc_step

    state = ParticleState(x=np.asarray(initial.x, float).copy(),
                          v=np.asarray(initial.v, float).copy(),
                          t=float(initial.t))
    if staggered:
        state = staggered_init(state, dt, field, alpha)
        counter.add(1)

    def record(i, x, v, t):
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise NonFiniteStateError(i)
        ts[i] = t
        xs[i] = x
        vs[i] = v
        energy[i] = _energy(x, v, field, alpha)

    if staggered:
        record(0, state.x, state.v_half, state.t)
        for i in range(1, n_rec):
            state = step_staggered(state, dt, field, alpha, counter=counter)
            record(i, state.x, state.v_half, state.t)
    elif config.method == "nonstaggered-boris":
        record(0, state.x, state.v, state.t)
        for i in range(1, n_rec):
            state = step_nonstaggered(state, dt, field, alpha,
                                      counter=counter)
            record(i, state.x, state.v, state.t)
    else:
        record(0, state.x, state.v, state.t)
        x, v, t = state.x, state.v, state.t
        for i in range(1, n_rec):
            x, v, U = stepper(x, v, dt, field, alpha, config,
                              counter=counter, tables=tables)
            t += dt
            record(i, x, v, t)
            if store_nodes:
                node_data.append(U)

    return RunRecord(ts=ts, xs=xs, vs=vs, energy=energy, work=counter,
                     config=config, dt=dt, staggered=staggered,
                     node_data=node_data)
