"""Command-line interface: experiment commands with CSV output.

Exit codes: 0 = success and all checks passed, 1 = computation finished
but a tolerance check failed, 2 = invalid input.  Output is deterministic
for a fixed config and seed: probe points come from a seeded generator,
targets are processed in file order, and BLAS threading is pinned to one
thread when run as a console script.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import warnings
from dataclasses import dataclass, fields, replace

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_INVALID = 2

GAMMA_DATA_COLUMNS = ("theta", "phi_angle", "value")
BASE_DATA_COLUMNS = ("r", "phi_angle", "value")
TARGET_COLUMNS = ("x1", "x2", "x3")


@dataclass(frozen=True)
class RunConfig:
    """Flat configuration; file keys and CLI flags share these names."""

    alpha: float = 0.3
    radius: float = 1.0
    n_theta: int = 16
    n_phi: int = 32
    n_r: int = 16
    grading: float = 3.0
    tol: float = 1e-14
    seed: int = 1234
    threads: int = 1
    out: str | None = None


def load_config(path: str) -> dict:
    """Parse a flat key=value config file ('#' starts a comment)."""
    known = {f.name: f.type for f in fields(RunConfig)}
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in known:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            if key == "out":
                out[key] = value
            elif key in ("n_theta", "n_phi", "n_r", "seed", "threads"):
                out[key] = int(value)
            else:
                out[key] = float(value)
    return out


def _build_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg = replace(cfg, **load_config(args.config))
    overrides = {}
    for flag, key in (
        ("alpha", "alpha"),
        ("radius", "radius"),
        ("ntheta", "n_theta"),
        ("nphi", "n_phi"),
        ("grading", "grading"),
        ("tol", "tol"),
        ("seed", "seed"),
        ("threads", "threads"),
        ("out", "out"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    cfg = replace(cfg, **overrides)
    if not 0.0 < 2.0 * cfg.alpha < 1.0:
        raise ValueError(f"alpha must satisfy 0 < 2*alpha < 1, got {cfg.alpha}")
    if min(cfg.n_theta, cfg.n_phi, cfg.n_r) < 4:
        raise ValueError("mesh parameters must be >= 4")
    if cfg.tol <= 0.0:
        raise ValueError("tol must be positive")
    if cfg.radius <= 0.0:
        raise ValueError("radius must be positive")
    return cfg


class _CsvSink:
    """Writes rows to the --out path or stdout; floats via repr for
    lossless round-trips."""

    def __init__(self, out: str | None):
        self._fh = open(out, "w", newline="") if out else sys.stdout
        self._own = out is not None
        self._writer = csv.writer(self._fh, lineterminator="\n")

    def row(self, values) -> None:
        out = []
        for v in values:
            if isinstance(v, float):
                out.append(repr(v))
            elif hasattr(v, "dtype"):  # numpy scalar
                out.append(repr(float(v)))
            else:
                out.append(v)
        self._writer.writerow(out)

    def close(self) -> None:
        if self._own:
            self._fh.close()


def _parse_point(text: str):
    import numpy as np

    try:
        coords = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise ValueError(f"cannot parse point {text!r}: {exc}") from None
    if len(coords) < 3:
        raise ValueError(f"point needs at least 3 coordinates, got {text!r}")
    return np.asarray(coords)


def _probe_sets(cfg: RunConfig, rng, n_interior=20, n_exterior=20, n_base=10, n_rim=8):
    """Seeded probe points for the gauge suite, grouped by location class."""
    import numpy as np

    a = cfg.radius

    def ball(n, rmax, x1min):
        pts = []
        while len(pts) < n:
            p = rng.uniform(-rmax, rmax, 3)
            p[0] = rng.uniform(x1min, rmax)
            if np.linalg.norm(p) <= rmax:
                pts.append(p)
        return np.array(pts)

    interior = ball(n_interior, 0.75 * a, 0.1 * a)
    exterior = []
    while len(exterior) < n_exterior:
        p = rng.uniform(-2.0 * a, 2.0 * a, 3)
        p[0] = rng.uniform(0.05 * a, 2.0 * a)
        if 1.25 * a <= np.linalg.norm(p) <= 2.0 * a:
            exterior.append(p)
    base = []
    for r, t in zip(rng.uniform(0.05 * a, 0.8 * a, n_base), rng.uniform(0, 2 * np.pi, n_base)):
        base.append(np.array([0.0, r * np.cos(t), r * np.sin(t)]))
    rim = [
        np.array([0.0, a * np.cos(t), a * np.sin(t)])
        for t in rng.uniform(0, 2 * np.pi, n_rim)
    ]
    base_out = []
    for r, t in zip(rng.uniform(1.3 * a, 1.9 * a, n_base // 2), rng.uniform(0, 2 * np.pi, n_base // 2)):
        base_out.append(np.array([0.0, r * np.cos(t), r * np.sin(t)]))
    return (
        ("interior", interior, -1.0, 1e-3),
        ("exterior", np.array(exterior), 0.0, 1e-3),
        ("base", np.array(base), -1.0, 1e-2),
        ("rim", np.array(rim), -0.5, 5e-2),
        ("base_exterior", np.array(base_out), 0.0, 1e-2),
    )


def _mesh_and_params(cfg: RunConfig):
    from .kernel import Params
    from .surface import base_disk, hemisphere_mesh

    prm = Params(3, cfg.alpha)
    mesh = hemisphere_mesh(cfg.radius, cfg.n_theta, cfg.n_phi, cfg.grading, prm)
    base = base_disk(cfg.radius, cfg.n_r, cfg.n_phi)
    return prm, mesh, base


def cmd_kernel_eval(args) -> int:
    import numpy as np

    from .errors import CoincidentPointsError
    from .kernel import (
        Params,
        fundamental_solution,
        fundamental_solution_odd,
        grad_fundamental_solution,
        kernel_bound,
        pair_geometry,
    )

    cfg = _build_config(args)
    x = _parse_point(args.x)
    xi = _parse_point(args.xi)
    if x.size != xi.size:
        print(f"error: point dimensions differ ({x.size} vs {xi.size})", file=sys.stderr)
        return EXIT_INVALID
    prm = Params(x.size, cfg.alpha)
    try:
        geo = pair_geometry(x, xi)
        q1 = fundamental_solution(x, xi, prm)
        q2 = fundamental_solution_odd(x, xi, prm)
        grad = grad_fundamental_solution(x, xi, prm)
        bound = kernel_bound(x, xi, prm)
    except CoincidentPointsError:
        print("error: coincident points", file=sys.stderr)
        return EXIT_INVALID
    sink = _CsvSink(cfg.out)
    sink.row(("quantity", "value"))
    sink.row(("r2", geo.r2))
    sink.row(("r12", geo.r12))
    sink.row(("zeta", geo.zeta))
    sink.row(("q1", q1))
    sink.row(("q2", q2))
    for i in range(grad.size):
        sink.row((f"grad_{i + 1}", float(grad[i])))
    sink.row(("bound", bound))
    sink.row(("bound_ok", str(abs(q1) <= bound).lower()))
    sink.close()
    return EXIT_OK


def cmd_gauge(args) -> int:
    import numpy as np

    from .potentials import double_layer

    cfg = _build_config(args)
    prm, mesh, _ = _mesh_and_params(cfg)
    rng = np.random.default_rng(cfg.seed)
    ones = np.ones(mesh.n_nodes)
    sink = _CsvSink(cfg.out)
    sink.row(("x1", "x2", "x3", "location_class", "value", "expected", "abs_error"))
    failed = False
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for name, pts, expected, tol in _probe_sets(cfg, rng):
            for p in pts:
                value = double_layer(mesh, ones, p, prm)
                err = abs(value - expected)
                failed |= err > tol
                sink.row((float(p[0]), float(p[1]), float(p[2]), name, value, expected, err))
    sink.close()
    return EXIT_TOLERANCE if failed else EXIT_OK


def cmd_flux(args) -> int:
    import numpy as np

    from .kernel import grad_fundamental_solution
    from .surface import weighted_flux

    cfg = _build_config(args)
    prm, mesh, base = _mesh_and_params(cfg)
    rng = np.random.default_rng(cfg.seed)
    a = cfg.radius
    poles = [("interior", np.array([0.4, 0.1, -0.2]) * a, -1.0, 1e-3)]
    for _ in range(3):
        p = rng.uniform(-0.5 * a, 0.5 * a, 3)
        p[0] = rng.uniform(0.15 * a, 0.6 * a)
        poles.append(("interior", p, -1.0, 1e-3))
    for _ in range(4):
        p = rng.uniform(-2.0 * a, 2.0 * a, 3)
        p[0] = rng.uniform(0.1 * a, 2.0 * a)
        while np.linalg.norm(p) < 1.3 * a:
            p *= 1.3
        poles.append(("exterior", p, 0.0, 1e-4))
    sink = _CsvSink(cfg.out)
    sink.row(("pole_class", "x1", "x2", "x3", "flux", "expected", "abs_error"))
    failed = False
    for name, pole, expected, tol in poles:
        flux = weighted_flux(mesh, base, lambda p: grad_fundamental_solution(p, pole, prm), prm)
        err = abs(flux - expected)
        failed |= err > tol
        sink.row((name, float(pole[0]), float(pole[1]), float(pole[2]), flux, expected, err))
    sink.close()
    return EXIT_TOLERANCE if failed else EXIT_OK


def read_gamma_data(path: str, mesh):
    """Dirichlet samples in mesh construction order from CSV
    (theta, phi_angle, value)."""
    return _read_data(path, GAMMA_DATA_COLUMNS, mesh.n_nodes)


def read_base_data(path: str, base):
    """Weighted-flux samples in disk construction order from CSV
    (r, phi_angle, value)."""
    return _read_data(path, BASE_DATA_COLUMNS, base.n_nodes)


def _read_data(path, columns, expected):
    import numpy as np

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != columns:
            raise ValueError(f"{path}: expected header {columns}, got {header}")
        values = [float(row[2]) for row in reader]
    if len(values) != expected:
        raise ValueError(f"{path}: {len(values)} samples for {expected} quadrature nodes")
    return np.asarray(values)


def write_gamma_data(path: str, mesh, values) -> None:
    import numpy as np

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GAMMA_DATA_COLUMNS)
        for node, v in zip(mesh.nodes, np.asarray(values, dtype=float)):
            theta = math.atan2(math.hypot(node[1], node[2]), node[0])
            phi = math.atan2(node[2], node[1])
            writer.writerow((repr(theta), repr(phi), repr(float(v))))


def write_base_data(path: str, base, values) -> None:
    import numpy as np

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BASE_DATA_COLUMNS)
        for node, v in zip(base.nodes, np.asarray(values, dtype=float)):
            writer.writerow((repr(math.hypot(node[1], node[2])), repr(math.atan2(node[2], node[1])), repr(float(v))))


def read_targets(path: str):
    import numpy as np

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != TARGET_COLUMNS:
            raise ValueError(f"{path}: expected header {TARGET_COLUMNS}, got {header}")
        rows = [[float(v) for v in row] for row in reader]
    return np.asarray(rows, dtype=float).reshape(len(rows), 3)


def cmd_solve(args) -> int:
    import numpy as np

    from .holmgren import BoundaryData, solve, solve_hemisphere

    cfg = _build_config(args)
    prm, mesh, base = _mesh_and_params(cfg)
    phi = read_gamma_data(args.data_gamma, mesh)
    nu = read_base_data(args.data_base, base)
    targets = read_targets(args.targets)
    sink = _CsvSink(cfg.out)
    sink.row(("x1", "x2", "x3", "u_bem", "u_hemisphere_closed_form_if_applicable", "abs_diff"))
    if targets.shape[0] == 0:
        sink.close()
        return EXIT_OK
    data = BoundaryData(phi=phi, nu=nu)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        u_bem = solve(mesh, base, data, targets, prm, n_threads=cfg.threads)
        u_hemi = solve_hemisphere(cfg.radius, base, mesh, data, targets, prm)
    for t in range(targets.shape[0]):
        sink.row(
            (
                float(targets[t, 0]),
                float(targets[t, 1]),
                float(targets[t, 2]),
                float(u_bem[t]),
                float(u_hemi[t]),
                float(abs(u_bem[t] - u_hemi[t])),
            )
        )
    sink.close()
    return EXIT_OK


def cmd_green_check(args) -> int:
    import numpy as np

    from . import green
    from .bie import SecondKindSolver, assemble
    from .kernel import fundamental_solution

    cfg = _build_config(args)
    prm, mesh, _ = _mesh_and_params(cfg)
    rng = np.random.default_rng(cfg.seed)
    a = cfg.radius
    solver = SecondKindSolver(assemble(mesh, prm), 2.0)

    def interior(n):
        pts = []
        while len(pts) < n:
            p = rng.uniform(-0.7 * a, 0.7 * a, 3)
            p[0] = rng.uniform(0.15 * a, 0.7 * a)
            if np.linalg.norm(p) <= 0.7 * a:
                pts.append(p)
        return pts

    sink = _CsvSink(cfg.out)
    sink.row(("check", "value", "expected", "abs_error", "tolerance"))
    failed = False

    def record(check, value, expected, tol):
        nonlocal failed
        err = abs(value - expected)
        failed |= err > tol
        sink.row((check, value, expected, err, tol))

    for k in range(5):
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        v[0] = abs(v[0])
        sp = a * v
        (xi,) = interior(1)
        scale = abs(fundamental_solution(sp, xi, prm))
        record(f"sphere_vanishing_{k}", green.hemisphere_green(sp, xi, a, prm) / scale, 0.0, 1e-10)
    for k in range(5):
        x, xi = interior(2)
        g1 = green.hemisphere_green(x, xi, a, prm)
        g2 = green.hemisphere_green(xi, x, a, prm)
        record(f"closed_symmetry_{k}", (g1 - g2) / g1, 0.0, 1e-12)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for k in range(5):
            x, xi = interior(2)
            if np.linalg.norm(x - xi) < 0.2 * a:
                xi = xi + 0.25 * a * np.array([0.0, 1.0, 0.0])
            parts = green.green_densities(mesh, xi, prm, solver=solver)
            vref = green.hemisphere_green_regular(x, xi, a, prm)
            for via in ("double", "simple"):
                vb = green.green_regular_part(parts, mesh, x, prm, via=via)
                record(f"bem_regular_{via}_{k}", vb / vref, 1.0, 1e-2)
    sink.close()
    return EXIT_TOLERANCE if failed else EXIT_OK


def cmd_convergence(args) -> int:
    import numpy as np

    from .bie import SecondKindSolver, assemble
    from .holmgren import register_manufactured, solve
    from .kernel import Params
    from .surface import base_disk, hemisphere_mesh

    cfg = _build_config(args)
    prm = Params(3, cfg.alpha)
    rng = np.random.default_rng(cfg.seed)
    a = cfg.radius
    targets = []
    while len(targets) < 10:
        p = rng.uniform(-0.6 * a, 0.6 * a, 3)
        p[0] = rng.uniform(0.2 * a, 0.6 * a)
        if np.linalg.norm(p) <= 0.6 * a:
            targets.append(p)
    targets = np.array(targets)

    names = ("one", "x2", "x2sq_minus_x3sq", "x1_power", "x1_power_x2")
    cases = [c for c in register_manufactured(prm) if c.name in names]
    ladder = [(cfg.n_theta // 2, cfg.n_phi // 2), (cfg.n_theta, cfg.n_phi), (2 * cfg.n_theta, 2 * cfg.n_phi)]
    errors = {c.name: [] for c in cases}
    sink = _CsvSink(cfg.out)
    sink.row(("n_theta", "n_phi", "case_name", "max_rel_error"))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for nt, np_ in ladder:
            mesh = hemisphere_mesh(a, nt, np_, cfg.grading, prm)
            base = base_disk(a, nt, np_)
            solver = SecondKindSolver(assemble(mesh, prm), 2.0)
            for ms in cases:
                u = solve(mesh, base, ms.boundary_data(), targets, prm, solver=solver, n_threads=cfg.threads)
                exact = np.array([ms.u(p) for p in targets])
                err = float(np.abs(u - exact).max() / max(1.0, np.abs(exact).max()))
                errors[ms.name].append(err)
                sink.row((nt, np_, ms.name, err))
    # Below this floor errors are rounding noise and ratios are meaningless.
    floor = 1e-10
    monotone = all(
        all(e2 <= e1 or e2 < floor for e1, e2 in zip(errs, errs[1:]))
        for errs in errors.values()
    )
    sink.row(("summary", "", "monotone_decrease", str(monotone).lower()))
    sink.close()
    return EXIT_OK if monotone else EXIT_TOLERANCE


def cmd_energy_check(args) -> int:
    from .holmgren import energy_identity_check, register_manufactured

    cfg = _build_config(args)
    prm, mesh, base = _mesh_and_params(cfg)
    cases = {c.name: c for c in register_manufactured(prm)}
    sink = _CsvSink(cfg.out)
    sink.row(("case_name", "lhs", "rhs", "rel_error"))
    failed = False
    for name in ("x2", "x1_power"):
        lhs, rhs = energy_identity_check(mesh, base, cases[name], prm, volume_resolution=max(cfg.n_theta, 16))
        rel = abs(lhs - rhs) / abs(rhs)
        failed |= rel > 1e-2
        sink.row((name, lhs, rhs, rel))
    sink.close()
    return EXIT_TOLERANCE if failed else EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=None)
    parser.add_argument("--radius", type=float, default=None)
    parser.add_argument("--ntheta", type=int, default=None)
    parser.add_argument("--nphi", type=int, default=None)
    parser.add_argument("--grading", type=float, default=None)
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--config", type=str, default=None)
    parser.add_argument("--out", type=str, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="degenpot",
        description="Layer potentials and boundary value problems for the "
        "elliptic operator with one line of degeneration",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel-eval", help="evaluate the kernels at a point pair")
    p.add_argument("--x", required=True, help="comma-separated coordinates")
    p.add_argument("--xi", required=True, help="comma-separated coordinates")
    _add_common(p)
    p.set_defaults(func=cmd_kernel_eval)

    p = sub.add_parser("gauge", help="unit-density double-layer gauge values")
    _add_common(p)
    p.set_defaults(func=cmd_gauge)

    p = sub.add_parser("flux", help="weighted flux of the fundamental solution")
    _add_common(p)
    p.set_defaults(func=cmd_flux)

    p = sub.add_parser("solve", help="solve the mixed boundary value problem")
    p.add_argument("--data-gamma", required=True, help="CSV (theta, phi_angle, value)")
    p.add_argument("--data-base", required=True, help="CSV (r, phi_angle, value)")
    p.add_argument("--targets", required=True, help="CSV (x1, x2, x3)")
    _add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("green-check", help="Green's-function identities")
    _add_common(p)
    p.set_defaults(func=cmd_green_check)

    p = sub.add_parser("convergence", help="manufactured-solution refinement ladder")
    _add_common(p)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("energy-check", help="weighted energy identity")
    _add_common(p)
    p.set_defaults(func=cmd_energy_check)
    return parser


def main(argv=None) -> int:
    # Pin BLAS threading before numpy loads so output is independent of the
    # machine's core count; library-level parallelism (--threads) is
    # deterministic by construction.
    for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, "1")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
