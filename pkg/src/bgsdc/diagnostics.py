"""Error metrics: pitch-angle bookkeeping, reflection detection with
dense node output, RMS field errors at turning points, trajectory
defects against reference runs, convergence-order fits and energy
series."""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .collocation import lagrange_eval

BISECTION_TOL = 1e-13
BISECTION_MAX_ITER = 200


class ZeroVectorError(ValueError):
    pass


class LossConeError(ValueError):
    """No adiabatic turning point exists: the velocity has no component
    perpendicular to the local field."""


class EmptyEventListError(ValueError):
    pass


class MisalignedGridError(ValueError):
    """A run's time points are not a subset of the reference's."""


@dataclass
class ReflectionEvent:
    """One detected turning point of the parallel velocity."""

    t_ref: float
    x_ref: np.ndarray
    B_at_ref: float
    step_index: int


@dataclass
class EnergySeries:
    """Total energy per unit mass at the recorded states and its
    relative deviation from the initial value."""

    energies: np.ndarray
    rel_errors: np.ndarray


def pitch_decompose(v, B):
    """Split v into components along and across B.

    Returns (v_par, v_perp, pitch_angle) with v_par signed along B and
    pitch_angle = arcsin(v_perp / |v|).
    """
    v = np.asarray(v, dtype=float)
    B = np.asarray(B, dtype=float)
    Bn = float(np.linalg.norm(B))
    vn = float(np.linalg.norm(v))
    if Bn == 0.0:
        raise ZeroVectorError("pitch decomposition needs a nonzero field")
    if vn == 0.0:
        raise ZeroVectorError("pitch decomposition needs a nonzero velocity")
    v_par = float(v @ B) / Bn
    v_perp = math.sqrt(max(vn * vn - v_par * v_par, 0.0))
    pitch = math.asin(min(v_perp / vn, 1.0))
    return v_par, v_perp, pitch


def b_ref_adiabatic(x0, v0, field):
    """Field magnitude at the adiabatic turning point.

    Conservation of the magnetic moment and of kinetic energy gives
    B_ref = |B(x0)| |v0|^2 / v_perp0^2; independent of the speed scale.
    """
    B0 = field.B_at(x0)
    _, v_perp, _ = pitch_decompose(v0, B0)
    if v_perp == 0.0:
        raise LossConeError("velocity parallel to B: no adiabatic reflection")
    v0 = np.asarray(v0, dtype=float)
    return float(np.linalg.norm(B0)) * float(v0 @ v0) / (v_perp * v_perp)


def _parallel_velocity(x, v, field):
    B = field.B_at(x)
    return float(v @ B) / float(np.linalg.norm(B))


def detect_reflections(record, field, nodes):
    """Find the turning points of the parallel velocity in a run.

    Steps whose endpoint-node parallel velocities change sign get a
    degree-(M-1) interpolant of v_par over the node parameter s in
    [0, 1]; its root (bisection to 1e-13 in s) gives the reflection
    time, the position interpolant at the root gives x_ref, and the
    field magnitude there is reported. Steps where the interpolant does
    not change sign at the interval ends despite the endpoint check are
    skipped with a warning.
    """
    if record.node_data is None:
        raise ValueError("reflection detection needs retained node data")
    events = []
    skipped = 0
    dt = record.dt
    # vectorized endpoint prefilter: only steps whose endpoint parallel
    # velocities change sign get the per-node interpolation treatment
    x_lo = np.array([U.xs[0] for U in record.node_data])
    v_lo = np.array([U.vs[0] for U in record.node_data])
    x_hi = np.array([U.xs[-1] for U in record.node_data])
    v_hi = np.array([U.vs[-1] for U in record.node_data])
    B_lo = field.B_many(x_lo)
    B_hi = field.B_many(x_hi)
    vpar_lo = np.einsum("ij,ij->i", v_lo, B_lo) / np.linalg.norm(B_lo, axis=1)
    vpar_hi = np.einsum("ij,ij->i", v_hi, B_hi) / np.linalg.norm(B_hi, axis=1)
    candidates = np.nonzero((vpar_lo != 0.0) & (vpar_lo * vpar_hi <= 0.0))[0]
    for i in candidates:
        U = record.node_data[i]
        vpar = np.array([_parallel_velocity(U.xs[m], U.vs[m], field)
                         for m in range(nodes.M)])

        def L(s):
            return float(lagrange_eval(vpar, nodes, s))

        lo, hi = 0.0, 1.0
        f_lo, f_hi = L(lo), L(hi)
        if f_lo * f_hi > 0.0:
            skipped += 1
            continue
        for _ in range(BISECTION_MAX_ITER):
            if hi - lo <= BISECTION_TOL:
                break
            mid = 0.5 * (lo + hi)
            f_mid = L(mid)
            if f_mid == 0.0:
                lo = hi = mid
                break
            if f_lo * f_mid < 0.0:
                hi, f_hi = mid, f_mid
            else:
                lo, f_lo = mid, f_mid
        s_root = 0.5 * (lo + hi)
        x_ref = lagrange_eval(U.xs, nodes, s_root)
        events.append(ReflectionEvent(
            t_ref=record.ts[i] + s_root * dt,
            x_ref=np.asarray(x_ref, dtype=float),
            B_at_ref=float(np.linalg.norm(field.B_at(x_ref))),
            step_index=i,
        ))
    if skipped:
        warnings.warn("skipped %d sign-changing steps whose interpolant "
                      "had equal signs at the interval ends" % skipped)
    return events


def sigma_B(events, B_reference):
    """RMS deviation of the field magnitude at the detected reflections
    from a reference (one scalar, or one value per event)."""
    if len(events) == 0:
        raise EmptyEventListError("sigma_B needs at least one reflection")
    Bi = np.array([e.B_at_ref for e in events])
    ref = np.asarray(B_reference, dtype=float)
    if ref.ndim == 0:
        ref = np.full(len(events), float(ref))
    elif ref.size != len(events):
        raise ValueError("reference list length %d does not match %d events"
                         % (ref.size, len(events)))
    return float(np.sqrt(np.mean((ref - Bi) ** 2)))


def trajectory_defect(run, reference):
    """Largest componentwise position deviation at shared time points.

    The run's time grid must be a subset of the reference's (nested
    step-size ladders guarantee this).
    """
    ref_ts = reference.ts
    # locate each run time at the nearest reference grid point; the raw
    # insertion index can be off by one through rounding of t = i*dt
    idx = np.clip(np.searchsorted(ref_ts, run.ts), 0, len(ref_ts) - 1)
    left = np.maximum(idx - 1, 0)
    use_left = (np.abs(ref_ts[left] - run.ts) < np.abs(ref_ts[idx] - run.ts))
    idx = np.where(use_left, left, idx)
    span = max(abs(ref_ts[-1] - ref_ts[0]), 1.0)
    if not np.allclose(ref_ts[idx], run.ts, rtol=0.0, atol=1e-9 * span):
        raise MisalignedGridError("run time points are not a subset of the "
                                  "reference time points")
    return float(np.max(np.abs(run.xs - reference.xs[idx])))


def convergence_order(step_sizes, errors):
    """Pairwise observed orders between consecutive resolutions."""
    steps = np.asarray(step_sizes, dtype=float)
    errs = np.asarray(errors, dtype=float)
    if steps.size != errs.size or steps.size < 2:
        raise ValueError("need matching lists of length >= 2")
    if np.any(np.diff(steps) >= 0):
        raise ValueError("step sizes must be strictly decreasing")
    if np.any(errs <= 0):
        raise ValueError("errors must be positive")
    return [float(np.log(errs[i + 1] / errs[i]) / np.log(steps[i + 1] / steps[i]))
            for i in range(steps.size - 1)]


def relative_energy_series(record, field, alpha):
    """Total energy H = |v|^2/2 + alpha*Phi(x) along a run and its
    relative drift. For staggered runs the recorded velocities are the
    half-step ones and are used directly, which preserves the exact
    kinetic-energy conservation of the leapfrog kick when E = 0."""
    H = np.array([0.5 * float(v @ v) + alpha * field.potential_at(x)
                  for x, v in zip(record.xs, record.vs)])
    H0 = H[0]
    if H0 == 0.0:
        raise ZeroVectorError("relative energy error undefined for H_0 = 0")
    return EnergySeries(energies=H, rel_errors=np.abs(H - H0) / abs(H0))


def self_convergence(xs):
    """Relative differences of final positions between consecutive
    resolutions of the same experiment."""
    if len(xs) < 2:
        raise ValueError("need at least two resolutions")
    out = []
    for a, b in zip(xs[:-1], xs[1:]):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        na = float(np.linalg.norm(a))
        if na == 0.0:
            raise ZeroVectorError("zero-norm entry in self-convergence")
        out.append(float(np.linalg.norm(a - b) / na))
    return out
