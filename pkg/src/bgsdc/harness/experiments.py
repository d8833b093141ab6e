"""The benchmark experiments behind each CLI command.

Every command reads its parameters (with desk-scale defaults) from the
parsed config, runs deterministically, writes one CSV with a fixed
schema plus a resolved-config sidecar, and returns the CSV path.
Floating-point cells carry 17 significant digits.
"""

import csv
import math
import os

import numpy as np

from ..collocation import NodeSet, lobatto_nodes
from ..diagnostics import (
    b_ref_adiabatic,
    detect_reflections,
    relative_energy_series,
    self_convergence,
    sigma_B,
    trajectory_defect,
)
from ..driver import (
    predicted_work_parallel,
    predicted_work_serial,
    run_trajectory,
)
from ..integrators import ParticleState, gyro_analytic
from ..sdc_core import NodeSolution
from .config import (
    PARTICLES,
    ConfigError,
    Section,
    field_from,
    format_method,
    methods_from,
    parse_method,
    write_resolved,
)


def _fmt(cell):
    if cell is None:
        return ""
    if isinstance(cell, float):
        return "%.17g" % cell
    return str(cell)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(c) for c in row])
    return path


def _iters_label(cfg):
    if cfg.method == "bgsdc":
        return "(%d,%d)" % (cfg.K_gmres, cfg.K_picard)
    if cfg.method == "boris-sdc":
        return "%d sweeps" % cfg.K_sweeps
    return "-"


def _method_columns(cfg):
    M = cfg.M if cfg.method in ("bgsdc", "boris-sdc") else None
    return [format_method(cfg), M, _iters_label(cfg)]


def _boris_node_record(record):
    """Two-node per-step data synthesized from consecutive states, so
    reflection detection treats plain Boris runs like M=2 collocation
    runs with a linear interpolant."""
    record.node_data = [
        NodeSolution(np.vstack((record.xs[i], record.xs[i + 1])),
                     np.vstack((record.vs[i], record.vs[i + 1])))
        for i in range(len(record.ts) - 1)
    ]
    return NodeSet([0.0, 1.0])


def _pairwise_orders(dts, errors):
    """Order estimates aligned to the coarser run of each pair; None
    where an error is missing or non-positive."""
    orders = []
    for i in range(len(errors) - 1):
        e0, e1 = errors[i], errors[i + 1]
        if e0 is None or e1 is None or e0 <= 0 or e1 <= 0:
            orders.append(None)
        else:
            orders.append(float(np.log(e1 / e0) / np.log(dts[i + 1] / dts[i])))
    orders.append(None)
    return orders


# ---------------------------------------------------------------- gyro


def cmd_gyro_validate(parser, out_dir, paper_scale=False, retain_nodes=False):
    field, alpha, field_resolved = field_from(
        parser, {"type": "uniform", "B": np.array([0.0, 0.0, 1.0]),
                 "alpha": 1.0})
    part = Section(parser, "particle")
    x0 = part.vec3("x0", np.zeros(3))
    v0 = part.vec3("v0", np.array([1.0, 0.0, 0.5]))
    run = Section(parser, "run")
    t_end = run.real("t_end", 2.0 * math.pi)
    ladder = [int(n) for n in run.reals("n_steps_ladder",
                                        [50.0, 100.0, 200.0, 400.0])]
    methods = methods_from(parser, [
        "nonstaggered-boris",
        "staggered-boris",
        "bgsdc M=3 K_gmres=2 K_picard=3",
        "bgsdc M=5 K_gmres=2 K_picard=3",
    ])

    B_const = field.B_at(x0)
    exact_end = gyro_analytic(ParticleState(x0, v0), t_end, B_const, alpha)
    rows = []
    for cfg in methods:
        errs_x, errs_v, dts = [], [], []
        for n in ladder:
            dt = t_end / n
            rec = run_trajectory(ParticleState(x0, v0), dt, n, field, alpha,
                                 cfg)
            err_x = float(np.linalg.norm(rec.xs[-1] - exact_end.x))
            if rec.staggered:
                exact_half = gyro_analytic(ParticleState(x0, v0),
                                           t_end - 0.5 * dt, B_const, alpha)
                err_v = float(np.linalg.norm(rec.vs[-1] - exact_half.v))
            else:
                err_v = float(np.linalg.norm(rec.vs[-1] - exact_end.v))
            errs_x.append(err_x)
            errs_v.append(err_v)
            dts.append(dt)
        orders = _pairwise_orders(dts, errs_x) if len(ladder) > 1 else [None]
        for n, dt, ex, ev, p in zip(ladder, dts, errs_x, errs_v, orders):
            rows.append(_method_columns(cfg) + [n, dt, ex, ev, p])

    path = _write_csv(
        os.path.join(out_dir, "gyro-validate.csv"),
        ["method", "M", "iterations", "n_steps", "dt", "error_x", "error_v",
         "order_p"],
        rows)
    write_resolved(os.path.join(out_dir, "gyro-validate.resolved.cfg"), {
        "experiment": {"name": "gyro-validate"},
        "field": field_resolved,
        "particle": {"x0": "%.17g %.17g %.17g" % tuple(x0),
                     "v0": "%.17g %.17g %.17g" % tuple(v0)},
        "run": {"t_end": "%.17g" % t_end,
                "n_steps_ladder": " ".join(str(n) for n in ladder)},
        "methods": {"method%d" % i: format_method(m)
                    for i, m in enumerate(methods, 1)},
    })
    return path


# ------------------------------------------------- mirror convergence


def cmd_mirror_convergence(parser, out_dir, paper_scale=False,
                           retain_nodes=False):
    field, alpha, field_resolved = field_from(
        parser, {"type": "mirror", "omega_B": 400.0, "z0": 16.0,
                 "alpha": 1.0})
    omega = float(field_resolved["omega_B"])
    part = Section(parser, "particle")
    x0 = part.vec3("x0", np.array([1.0, 0.0, 0.0]))
    v0 = part.vec3("v0", np.array([100.0, 0.0, 50.0]))
    run = Section(parser, "run")
    t_end = run.real("t_end", 16.0 if paper_scale else 1.0)
    ladder = run.reals("dt_omega_ladder", [0.4, 0.2, 0.1, 0.05])
    ladder_boris = run.reals("dt_omega_ladder_boris",
                             [0.04, 0.02, 0.01, 0.005])
    methods = methods_from(parser, [
        "nonstaggered-boris",
        "staggered-boris",
        "bgsdc M=5 K_gmres=1 K_picard=3",
        "bgsdc M=5 K_gmres=2 K_picard=3",
    ])

    rows = []
    for cfg in methods:
        dt_omegas = ladder_boris if cfg.method.endswith("boris") else ladder
        finals, dts, works, counts = [], [], [], []
        for dtw in dt_omegas:
            n = max(int(round(t_end * omega / dtw)), 1)
            dt = t_end / n
            rec = run_trajectory(ParticleState(x0, v0), dt, n, field, alpha,
                                 cfg)
            finals.append(rec.xs[-1])
            dts.append(dt)
            works.append(rec.work.f_evals)
            counts.append(n)
        errors = self_convergence(finals) + [None]
        orders = _pairwise_orders(dts, errors)
        for dtw, dt, n, err, p, w in zip(dt_omegas, dts, counts, errors,
                                         orders, works):
            rows.append(_method_columns(cfg)[:1]
                        + [cfg.M if cfg.method == "bgsdc" else None,
                           cfg.K_gmres if cfg.method == "bgsdc" else None,
                           cfg.K_picard if cfg.method == "bgsdc" else None,
                           dtw, n, err, p, w])

    path = _write_csv(
        os.path.join(out_dir, "mirror-convergence.csv"),
        ["method", "M", "K_gmres", "K_picard", "dt_omega", "n_steps",
         "error_x", "order_p", "f_evals"],
        rows)
    write_resolved(os.path.join(out_dir, "mirror-convergence.resolved.cfg"), {
        "experiment": {"name": "mirror-convergence"},
        "field": field_resolved,
        "particle": {"x0": "%.17g %.17g %.17g" % tuple(x0),
                     "v0": "%.17g %.17g %.17g" % tuple(v0)},
        "run": {"t_end": "%.17g" % t_end,
                "dt_omega_ladder": " ".join("%.17g" % d for d in ladder),
                "dt_omega_ladder_boris": " ".join("%.17g" % d
                                                  for d in ladder_boris)},
        "methods": {"method%d" % i: format_method(m)
                    for i, m in enumerate(methods, 1)},
    })
    return path


# ------------------------------------------------- mirror reflections


def cmd_mirror_reflections(parser, out_dir, paper_scale=False,
                           retain_nodes=True):
    field, alpha, field_resolved = field_from(
        parser, {"type": "mirror", "omega_B": 2000.0, "z0": 200.0,
                 "alpha": 1.0})
    omega = float(field_resolved["omega_B"])
    part = Section(parser, "particle")
    x0 = part.vec3("x0", np.array([1.0, 0.5, 0.0]))
    v0 = part.vec3("v0", np.array([100.0, 0.0, 50.0]))
    run = Section(parser, "run")
    t_end = run.real("t_end", 50.0 if paper_scale else 25.0)
    ladder = run.reals("dt_omega_ladder", [0.8, 0.4, 0.2, 0.1])
    methods = methods_from(parser, [
        "nonstaggered-boris",
        "bgsdc M=5 K_gmres=2 K_picard=3",
    ])

    B_ref = b_ref_adiabatic(x0, v0, field)
    rows = []
    for cfg in methods:
        collocated = cfg.method in ("bgsdc", "boris-sdc")
        nodes = lobatto_nodes(cfg.M) if collocated else None
        for dtw in ladder:
            n = max(int(round(t_end * omega / dtw)), 1)
            dt = t_end / n
            rec = run_trajectory(ParticleState(x0, v0), dt, n, field, alpha,
                                 cfg, store_nodes=collocated)
            if collocated:
                node_set = nodes
            else:
                node_set = _boris_node_record(rec)
            events = detect_reflections(rec, field, node_set)
            sig = sigma_B(events, B_ref) if events else None
            rows.append(_method_columns(cfg)
                        + [dtw, dt, rec.work.f_evals, len(events), sig,
                           B_ref])

    path = _write_csv(
        os.path.join(out_dir, "mirror-reflections.csv"),
        ["method", "M", "iterations", "dt_omega", "dt", "f_evals",
         "n_reflections", "sigma_B", "B_ref_used"],
        rows)
    write_resolved(os.path.join(out_dir, "mirror-reflections.resolved.cfg"), {
        "experiment": {"name": "mirror-reflections"},
        "field": field_resolved,
        "particle": {"x0": "%.17g %.17g %.17g" % tuple(x0),
                     "v0": "%.17g %.17g %.17g" % tuple(v0)},
        "run": {"t_end": "%.17g" % t_end,
                "dt_omega_ladder": " ".join("%.17g" % d for d in ladder)},
        "methods": {"method%d" % i: format_method(m)
                    for i, m in enumerate(methods, 1)},
    })
    return path


# ------------------------------------------------------ mirror energy


def _log_spaced_indices(n_steps, n_samples):
    idx = np.unique(np.round(
        np.logspace(0.0, np.log10(n_steps), n_samples)).astype(int))
    return np.concatenate(([0], idx[idx <= n_steps]))


def cmd_mirror_energy(parser, out_dir, paper_scale=False,
                      retain_nodes=False):
    field, alpha, field_resolved = field_from(
        parser, {"type": "mirror", "omega_B": 400.0, "z0": 16.0,
                 "alpha": 1.0})
    omega = float(field_resolved["omega_B"])
    part = Section(parser, "particle")
    x0 = part.vec3("x0", np.array([1.0, 0.0, 0.0]))
    v0 = part.vec3("v0", np.array([100.0, 0.0, 50.0]))
    run = Section(parser, "run")
    dt_omega = run.real("dt_omega", 0.5)
    n_steps = run.integer("n_steps", 3840000 if paper_scale else 100000)
    n_samples = run.integer("n_samples", 512)
    methods = methods_from(parser, [
        "nonstaggered-boris",
        "staggered-boris",
        "bgsdc M=3 K_gmres=2 K_picard=3",
        "bgsdc M=3 K_gmres=1 K_picard=2",
    ])

    dt = dt_omega / omega
    sample_idx = _log_spaced_indices(n_steps, n_samples)
    rows = []
    for cfg in methods:
        rec = run_trajectory(ParticleState(x0, v0), dt, n_steps, field,
                             alpha, cfg)
        series = relative_energy_series(rec, field, alpha)
        for i in sample_idx:
            rows.append(_method_columns(cfg)
                        + [int(i), rec.ts[i], series.rel_errors[i]])

    path = _write_csv(
        os.path.join(out_dir, "mirror-energy.csv"),
        ["method", "M", "iterations", "step_index", "t", "rel_energy_error"],
        rows)
    write_resolved(os.path.join(out_dir, "mirror-energy.resolved.cfg"), {
        "experiment": {"name": "mirror-energy"},
        "field": field_resolved,
        "particle": {"x0": "%.17g %.17g %.17g" % tuple(x0),
                     "v0": "%.17g %.17g %.17g" % tuple(v0)},
        "run": {"dt_omega": "%.17g" % dt_omega, "n_steps": str(n_steps),
                "n_samples": str(n_samples)},
        "methods": {"method%d" % i: format_method(m)
                    for i, m in enumerate(methods, 1)},
    })
    return path


# -------------------------------------------------- solovev accuracy


def _particles_from(parser):
    sec = Section(parser, "particle")
    names = sec.text("particles", "passing trapped").split()
    out = []
    for name in names:
        if name not in PARTICLES:
            raise ConfigError("[particle] unknown particle %r (expected "
                              "passing/trapped)" % name)
        out.append((name,) + PARTICLES[name])
    return out, " ".join(names)


def cmd_solovev_accuracy(parser, out_dir, paper_scale=False,
                         retain_nodes=False):
    field, alpha, field_resolved = field_from(parser, {"type": "solovev"})
    particles, particles_resolved = _particles_from(parser)
    run = Section(parser, "run")
    t_end = run.real("t_end", 1.0e-4 if paper_scale else 5.0e-5)
    ladder_ns = run.reals("dt_ladder_ns", [4.0, 2.0, 1.0, 0.5])
    ref_divisor = run.real("reference_dt_divisor", 5.0)
    ref_method = parse_method(run.text(
        "reference_method", "bgsdc M=5 K_gmres=2 K_picard=4"))
    methods = methods_from(parser, [
        "staggered-boris",
        "bgsdc M=5 K_gmres=1 K_picard=4",
        "bgsdc M=5 K_gmres=2 K_picard=6",
    ])

    rows = []
    for pname, x0, v0 in particles:
        dt_ref = min(ladder_ns) * 1e-9 / ref_divisor
        n_ref = max(int(round(t_end / dt_ref)), 1)
        dt_ref = t_end / n_ref
        reference = run_trajectory(ParticleState(x0, v0), dt_ref, n_ref,
                                   field, alpha, ref_method)
        for cfg in methods:
            for dt_ns in ladder_ns:
                n = max(int(round(t_end / (dt_ns * 1e-9))), 1)
                dt = t_end / n
                rec = run_trajectory(ParticleState(x0, v0), dt, n, field,
                                     alpha, cfg)
                d_max = trajectory_defect(rec, reference)
                rows.append([pname] + _method_columns(cfg)
                            + [dt_ns, n, d_max, rec.work.f_evals])

    path = _write_csv(
        os.path.join(out_dir, "solovev-accuracy.csv"),
        ["particle", "method", "M", "iterations", "dt_ns", "n_steps",
         "d_max_m", "f_evals"],
        rows)
    write_resolved(os.path.join(out_dir, "solovev-accuracy.resolved.cfg"), {
        "experiment": {"name": "solovev-accuracy"},
        "field": field_resolved,
        "particle": {"particles": particles_resolved},
        "run": {"t_end": "%.17g" % t_end,
                "dt_ladder_ns": " ".join("%.17g" % d for d in ladder_ns),
                "reference_dt_divisor": "%.17g" % ref_divisor,
                "reference_method": format_method(ref_method)},
        "methods": {"method%d" % i: format_method(m)
                    for i, m in enumerate(methods, 1)},
    })
    return path


# ---------------------------------------------------- solovev energy


def cmd_solovev_energy(parser, out_dir, paper_scale=False,
                       retain_nodes=False):
    field, alpha, field_resolved = field_from(parser, {"type": "solovev"})
    particles, particles_resolved = _particles_from(parser)
    run = Section(parser, "run")
    dt_ns = run.real("dt_ns", 1.0)
    n_steps = run.integer("n_steps", 10000000 if paper_scale else 100000)
    n_samples = run.integer("n_samples", 512)
    methods = methods_from(parser, [
        "bgsdc M=3 K_gmres=2 K_picard=6",
        "staggered-boris",
    ])

    dt = dt_ns * 1e-9
    sample_idx = _log_spaced_indices(n_steps, n_samples)
    rows = []
    for pname, x0, v0 in particles:
        for cfg in methods:
            rec = run_trajectory(ParticleState(x0, v0), dt, n_steps, field,
                                 alpha, cfg)
            series = relative_energy_series(rec, field, alpha)
            for i in sample_idx:
                rows.append([pname] + _method_columns(cfg)
                            + [int(i), rec.ts[i], series.rel_errors[i]])

    path = _write_csv(
        os.path.join(out_dir, "solovev-energy.csv"),
        ["particle", "method", "M", "iterations", "step_index", "t",
         "rel_energy_error"],
        rows)
    write_resolved(os.path.join(out_dir, "solovev-energy.resolved.cfg"), {
        "experiment": {"name": "solovev-energy"},
        "field": field_resolved,
        "particle": {"particles": particles_resolved},
        "run": {"dt_ns": "%.17g" % dt_ns, "n_steps": str(n_steps),
                "n_samples": str(n_samples)},
        "methods": {"method%d" % i: format_method(m)
                    for i, m in enumerate(methods, 1)},
    })
    return path


# --------------------------------------------------------- work table


def _predicted_serial(cfg, n_steps):
    if cfg.method == "bgsdc":
        return predicted_work_serial(n_steps, cfg.M, cfg.K_picard)
    if cfg.method == "nonstaggered-boris":
        return n_steps
    if cfg.method == "staggered-boris":
        return n_steps + 1
    return n_steps * (cfg.M + (2 * cfg.K_sweeps + 1) * (cfg.M - 1))


def cmd_work_table(parser, out_dir, paper_scale=False, retain_nodes=False):
    field, alpha, field_resolved = field_from(
        parser, {"type": "mirror", "omega_B": 2000.0, "z0": 200.0,
                 "alpha": 1.0})
    omega = float(field_resolved["omega_B"])
    part = Section(parser, "particle")
    x0 = part.vec3("x0", np.array([1.0, 0.5, 0.0]))
    v0 = part.vec3("v0", np.array([100.0, 0.0, 50.0]))
    run = Section(parser, "run")
    n_steps = run.integer("n_steps", 1)
    dt_omega = run.real("dt_omega", 0.1)
    tau_overhead = run.real("tau_overhead", 0.0)
    methods = methods_from(parser, [
        "nonstaggered-boris",
        "bgsdc M=3 K_gmres=2 K_picard=6",
        "bgsdc M=5 K_gmres=2 K_picard=6",
    ])

    dt = dt_omega / omega
    rows = []
    for cfg in methods:
        rec = run_trajectory(ParticleState(x0, v0), dt, n_steps, field,
                             alpha, cfg)
        par = (predicted_work_parallel(n_steps, cfg.M, cfg.K_picard,
                                       tau_overhead)
               if cfg.method == "bgsdc" else None)
        rows.append(_method_columns(cfg)
                    + [n_steps, _predicted_serial(cfg, n_steps), par,
                       rec.work.f_evals])

    path = _write_csv(
        os.path.join(out_dir, "work-table.csv"),
        ["method", "M", "iterations", "n_steps", "predicted_serial",
         "predicted_parallel", "measured_f_evals"],
        rows)
    write_resolved(os.path.join(out_dir, "work-table.resolved.cfg"), {
        "experiment": {"name": "work-table"},
        "field": field_resolved,
        "particle": {"x0": "%.17g %.17g %.17g" % tuple(x0),
                     "v0": "%.17g %.17g %.17g" % tuple(v0)},
        "run": {"n_steps": str(n_steps), "dt_omega": "%.17g" % dt_omega,
                "tau_overhead": "%.17g" % tau_overhead},
        "methods": {"method%d" % i: format_method(m)
                    for i, m in enumerate(methods, 1)},
    })
    return path


COMMANDS = {
    "gyro-validate": cmd_gyro_validate,
    "mirror-convergence": cmd_mirror_convergence,
    "mirror-reflections": cmd_mirror_reflections,
    "mirror-energy": cmd_mirror_energy,
    "solovev-accuracy": cmd_solovev_accuracy,
    "solovev-energy": cmd_solovev_energy,
    "work-table": cmd_work_table,
}
