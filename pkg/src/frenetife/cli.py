"""Experiment driver.

Subcommands sweep the library over degrees and meshes and drop CSV
artifacts plus gnuplot scripts into an output directory:

* ``project``   piecewise L2 projection errors and observed rates
* ``cond-a``    conditioning of the extension system, raw and row-scaled
* ``cond-mass`` mass-matrix conditioning before/after orthonormalization
* ``inspect``   full dump of a single interface element

Configuration comes from flat ``key=value`` files with command-line
overrides; every run is deterministic given the config.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .assembly import (MatchedRadialCosine, build_element_basis,
                       global_projection_study, mass_condition_numbers,
                       stacked_root_factor)
from .curve import circle, ellipse
from .cutquad import find_edge_intersections
from .errors import FrenetIFEError, RankDeficiencyError
from .ifebasis import jump_residual, jump_system, precondition_rows, reconstruct
from .mesh import (LABEL_INTERFACE, build_mesh, classify_elements,
                   default_sample_count, element_info_from_vertices,
                   xi_init_guess)


class UsageError(Exception):
    """Bad flags or config values; maps to exit code 2."""


class NotAnInterfaceElement(FrenetIFEError):
    """Inspection target is uncut; maps to exit code 3."""


@dataclass(frozen=True)
class ExperimentConfig:
    curve: str = "circle"
    radius: float = 1.0
    axes: tuple = (1.0, 0.6)
    center: tuple = (0.0, 0.0)
    beta_minus: float = 1.0
    beta_plus: float = 1000.0
    degrees: tuple = (1, 2, 3, 4)
    mesh_sizes: tuple = (16, 32, 64)
    nqp: int | None = None
    precond: str = "rownorm"
    reconstruct: str = "vandermonde"
    construction: str = "special"
    out: str = "results"
    jobs: int = 1
    seed: int = 0

    @property
    def betas(self):
        return (self.beta_minus, self.beta_plus)


@dataclass(frozen=True)
class CsvReport:
    header: tuple
    rows: tuple
    path: Path


_PROJECT_DEFAULTS = dict(radius=1.0 / math.sqrt(3.0), beta_minus=1000.0,
                         beta_plus=1.0)
_COND_A_DEFAULTS = dict(degrees=tuple(range(1, 9)),
                        mesh_sizes=tuple(2 ** k for k in range(1, 9)))
_COND_MASS_DEFAULTS = dict(degrees=tuple(range(1, 11)), mesh_sizes=(4,))


def _parse_ints(text: str) -> tuple:
    items = [s for s in text.replace(" ", "").split(",") if s]
    try:
        return tuple(int(s) for s in items)
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") \
            from exc


def _parse_pair(text: str) -> tuple:
    items = [s for s in text.replace(" ", "").split(",") if s]
    if len(items) != 2:
        raise UsageError(f"expected two comma-separated numbers, got {text!r}")
    try:
        return (float(items[0]), float(items[1]))
    except ValueError as exc:
        raise UsageError(f"bad number in {text!r}") from exc


_KEY_PARSERS = {
    "curve": str,
    "radius": float,
    "axes": _parse_pair,
    "center": _parse_pair,
    "beta_minus": float,
    "beta_plus": float,
    "degrees": _parse_ints,
    "mesh_sizes": _parse_ints,
    "nqp": int,
    "precond": str,
    "reconstruct": str,
    "construction": str,
    "out": str,
    "jobs": int,
    "seed": int,
}


def load_config_file(path) -> dict:
    """Flat key=value lines; '#' starts a comment."""
    raw = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in stripped.split("=", 1))
        if key not in _KEY_PARSERS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            raw[key] = _KEY_PARSERS[key](value)
        except UsageError:
            raise
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}") from exc
    return raw


def build_config(args, subcommand_defaults) -> ExperimentConfig:
    cfg = ExperimentConfig(**subcommand_defaults)
    if args.config is not None:
        cfg = replace(cfg, **load_config_file(args.config))
    overrides = {}
    for f in fields(ExperimentConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            overrides[f.name] = value
    return replace(cfg, **overrides)


def validate_config(cfg: ExperimentConfig, min_mesh: int = 4) -> None:
    if cfg.curve not in ("circle", "ellipse"):
        raise UsageError(f"unsupported curve {cfg.curve!r}")
    if not cfg.degrees:
        raise UsageError("empty degree list")
    if any(m < 1 for m in cfg.degrees):
        raise UsageError("degrees must be >= 1")
    if not cfg.mesh_sizes:
        raise UsageError("empty mesh-size list")
    for n in cfg.mesh_sizes:
        if n < min_mesh or (n & (n - 1)) != 0:
            raise UsageError(
                f"mesh sizes must be powers of two >= {min_mesh}, got {n}")
    if not (cfg.beta_minus > 0.0 and cfg.beta_plus > 0.0):
        raise UsageError("betas must be positive")
    if cfg.radius <= 0.0 or min(cfg.axes) <= 0.0:
        raise UsageError("curve dimensions must be positive")
    if cfg.nqp is not None and cfg.nqp < 1:
        raise UsageError("nqp must be >= 1")
    if cfg.jobs < 1:
        raise UsageError("jobs must be >= 1")
    if cfg.precond not in ("jacobi", "rownorm"):
        raise UsageError(f"unknown preconditioner {cfg.precond!r}")
    if cfg.reconstruct not in ("none", "mass", "vandermonde"):
        raise UsageError(f"unknown reconstruction {cfg.reconstruct!r}")
    if cfg.construction not in ("special", "extend"):
        raise UsageError(f"unknown construction {cfg.construction!r}")


def make_curve(cfg: ExperimentConfig):
    if cfg.curve == "circle":
        return circle(cfg.radius, cfg.center)
    return ellipse(cfg.axes[0], cfg.axes[1], cfg.center)


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % float(value)


def write_csv(path: Path, header, rows) -> CsvReport:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    lines += [",".join(_format_cell(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return CsvReport(tuple(header), tuple(tuple(r) for r in rows), path)


def _write_plot(path: Path, text: str) -> None:
    path.write_text(text)


def diagonal_element_vertices(h: float) -> np.ndarray:
    """The square of width h/sqrt(2) centered on the unit circle's diagonal."""
    lo = (1.0 - 0.5 * h) / math.sqrt(2.0)
    hi = (1.0 + 0.5 * h) / math.sqrt(2.0)
    return np.array([[lo, lo], [hi, lo], [hi, hi], [lo, hi]])


def run_project(cfg: ExperimentConfig) -> CsvReport:
    validate_config(cfg)
    curve = make_curve(cfg)
    if cfg.curve != "circle":
        raise UsageError("the projection study's built-in field is radial; "
                         "use curve=circle")
    field = MatchedRadialCosine(cfg.radius, cfg.beta_minus, cfg.beta_plus,
                                cfg.center)
    study = global_projection_study(
        curve, field, cfg.betas, cfg.degrees, cfg.mesh_sizes,
        n_qp=cfg.nqp, construction=cfg.construction, precond=cfg.precond,
        reconstruct_mode=cfg.reconstruct, jobs=cfg.jobs)
    rows = []
    for i, m in enumerate(cfg.degrees):
        for j, n in enumerate(cfg.mesh_sizes):
            rows.append((m, n, study.errors[i, j], study.rates[i, j]))
    out = Path(cfg.out)
    report = write_csv(out / "project.csv", ("m", "N", "error", "rate"), rows)
    _write_plot(out / "project.gp", _PROJECT_PLOT)
    return report


_PROJECT_PLOT = """\
# L2 projection error against mesh size, one curve per degree.
set datafile separator ','
set logscale xy
set xlabel 'N'
set ylabel 'L2 error'
set key outside
plot for [d=1:10] 'project.csv' using (column('m')==d?column('N'):NaN):'error' \\
     with linespoints title sprintf('m=%d', d)
"""


def _cond_or_nan(matrix: np.ndarray) -> float:
    if matrix.size == 0:
        return float("nan")
    return float(np.linalg.cond(matrix))


def _preconditioned_cond(matrix: np.ndarray, kind: str) -> float:
    if matrix.size == 0:
        return float("nan")
    try:
        scaled, _ = precondition_rows(matrix, kind)
    except RankDeficiencyError as exc:
        print(f"warning: {kind}: {exc}", file=sys.stderr)
        return float("nan")
    return float(np.linalg.cond(scaled))


def run_cond_a(cfg: ExperimentConfig) -> CsvReport:
    validate_config(cfg, min_mesh=2)
    curve = make_curve(cfg)
    rows = []
    for m in cfg.degrees:
        for n in cfg.mesh_sizes:
            h = 1.0 / n
            vertices = diagonal_element_vertices(h)
            guess = xi_init_guess(curve, vertices.mean(axis=0),
                                  default_sample_count(h))
            info = element_info_from_vertices(curve, vertices, guess)
            system = jump_system(curve, info, m)
            cells = [m, h]
            for mat in (system.a_stack, system.atilde):
                cells.append(_cond_or_nan(mat))
                cells.append(_preconditioned_cond(mat, "jacobi"))
                cells.append(_preconditioned_cond(mat, "rownorm"))
            rows.append(tuple(cells))
    out = Path(cfg.out)
    report = write_csv(
        out / "cond_a.csv",
        ("m", "h", "cond_A", "cond_P1A", "cond_P2A",
         "cond_At", "cond_P1At", "cond_P2At"), rows)
    _write_plot(out / "cond_a.gp", _COND_A_PLOT)
    return report


_COND_A_PLOT = """\
# Conditioning of the extension system, raw and row-scaled.
set datafile separator ','
set logscale y
set xlabel 'm'
set ylabel 'condition number'
set key outside
plot 'cond_a.csv' using 'm':'cond_A' with points title 'A', \\
     'cond_a.csv' using 'm':'cond_P1A' with points title 'P1 A', \\
     'cond_a.csv' using 'm':'cond_P2A' with points title 'P2 A'
"""


def run_cond_mass(cfg: ExperimentConfig) -> CsvReport:
    validate_config(cfg)
    curve = make_curve(cfg)
    h = 0.25                         # the study's fixed element width
    vertices = diagonal_element_vertices(h)
    guess = xi_init_guess(curve, vertices.mean(axis=0),
                          default_sample_count(h))
    rows = []
    for m in cfg.degrees:
        c0, c1, c2 = mass_condition_numbers(
            curve, vertices, m, cfg.betas, guess, n_qp=cfg.nqp,
            construction=cfg.construction, precond=cfg.precond)
        rows.append((m, c0, c1, c2))
    out = Path(cfg.out)
    report = write_csv(out / "cond_mass.csv",
                       ("m", "cond_M0", "cond_M1", "cond_M2"), rows)
    _write_plot(out / "cond_mass.gp", _COND_MASS_PLOT)
    return report


_COND_MASS_PLOT = """\
# Mass-matrix conditioning before and after orthonormalization.
set datafile separator ','
set logscale y
set xlabel 'm'
set ylabel 'condition number'
set key outside
plot 'cond_mass.csv' using 'm':'cond_M0' with linespoints title 'initial', \\
     'cond_mass.csv' using 'm':'cond_M1' with linespoints title 'mass SVD', \\
     'cond_mass.csv' using 'm':'cond_M2' with linespoints title 'Vandermonde SVD'
"""


def inspect_element(cfg: ExperimentConfig, elem_id: int) -> CsvReport:
    validate_config(cfg)
    curve = make_curve(cfg)
    n = cfg.mesh_sizes[0]
    m = cfg.degrees[0]
    mesh = build_mesh(n)
    labels = classify_elements(mesh, curve)
    if elem_id < 0 or elem_id >= mesh.n_elements:
        raise UsageError(f"element id {elem_id} outside 0..{mesh.n_elements - 1}")
    if labels[elem_id] != LABEL_INTERFACE:
        raise NotAnInterfaceElement(
            f"element {elem_id} is not cut by the interface "
            f"(label {int(labels[elem_id])})")
    guess = xi_init_guess(curve, mesh.element_center(elem_id),
                          default_sample_count(mesh.diameter))
    n_qp = cfg.nqp if cfg.nqp is not None else m + 1
    built = build_element_basis(
        curve, mesh.element_vertices(elem_id), m, cfg.betas, guess,
        element_id=elem_id, n_qp=n_qp, construction=cfg.construction,
        precond=cfg.precond, reconstruct_mode="none")
    initial_resid = jump_residual(built.basis, curve, built.info, cfg.betas)
    rec = reconstruct(built.basis, built.vset.values_minus,
                      built.quad.weights_minus, built.vset.values_plus,
                      built.quad.weights_plus,
                      approach=cfg.reconstruct
                      if cfg.reconstruct != "none" else "vandermonde")
    rec_resid = jump_residual(rec, curve, built.info, cfg.betas)
    cond0 = np.linalg.cond(
        stacked_root_factor(built.basis, built.vset, built.quad)) ** 2
    cond1 = np.linalg.cond(
        stacked_root_factor(rec, built.vset, built.quad)) ** 2

    info = built.info
    topo = find_edge_intersections(curve, mesh.element_vertices(elem_id),
                                   info.xi_guess, element_id=elem_id)
    pairs = [
        ("element_id", elem_id),
        ("degree", m),
        ("mesh_size", n),
        ("eta_h", info.eta_h),
        ("xi_lo", info.xi_lo),
        ("xi_hi", info.xi_hi),
        ("xi_mid", info.xi_mid),
        ("xi_h", info.xi_h),
        ("xi_guess", info.xi_guess),
        ("cut_kind", topo.kind),
        ("entry_edge", topo.entry_edge),
        ("exit_edge", topo.exit_edge),
        ("xi_entry", topo.xi_entry),
        ("xi_exit", topo.xi_exit),
        ("nodes_minus", built.quad.nodes_minus.shape[0]),
        ("nodes_plus", built.quad.nodes_plus.shape[0]),
        ("resid_initial_continuity", initial_resid.continuity.max()),
        ("resid_initial_flux", initial_resid.flux.max()),
        ("resid_initial_extended",
         initial_resid.extended.max() if initial_resid.extended.size else 0.0),
        ("resid_recon_continuity", rec_resid.continuity.max()),
        ("resid_recon_flux", rec_resid.flux.max()),
        ("resid_recon_extended",
         rec_resid.extended.max() if rec_resid.extended.size else 0.0),
        ("cond_mass_initial", cond0),
        ("cond_mass_reconstructed", cond1),
    ]
    for key, value in pairs:
        print(f"{key} = {_format_cell(value)}")
    report = write_csv(Path(cfg.out) / "inspect.csv", ("key", "value"), pairs)
    return report


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", default=None, help="key=value config file")
    sub.add_argument("--curve", default=None, choices=("circle", "ellipse"))
    sub.add_argument("--radius", type=float, default=None)
    sub.add_argument("--axes", type=_parse_pair, default=None,
                     help="ellipse semi-axes A,B")
    sub.add_argument("--center", type=_parse_pair, default=None)
    sub.add_argument("--beta-minus", dest="beta_minus", type=float,
                     default=None)
    sub.add_argument("--beta-plus", dest="beta_plus", type=float,
                     default=None)
    sub.add_argument("--degrees", type=_parse_ints, default=None)
    sub.add_argument("--mesh-sizes", dest="mesh_sizes", type=_parse_ints,
                     default=None)
    sub.add_argument("--nqp", type=int, default=None)
    sub.add_argument("--precond", default=None,
                     choices=("jacobi", "rownorm"))
    sub.add_argument("--reconstruct", default=None,
                     choices=("none", "mass", "vandermonde"))
    sub.add_argument("--construction", default=None,
                     choices=("special", "extend"))
    sub.add_argument("--out", default=None)
    sub.add_argument("--jobs", type=int, default=None)
    sub.add_argument("--seed", type=int, default=None)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frenetife",
        description="Immersed finite element studies on curved interfaces.")
    subs = parser.add_subparsers(dest="command", required=True)
    for name in ("project", "cond-a", "cond-mass", "inspect"):
        sub = subs.add_parser(name)
        _add_common_flags(sub)
        if name == "inspect":
            sub.add_argument("element", type=int)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "project":
            cfg = build_config(args, _PROJECT_DEFAULTS)
            report = run_project(cfg)
        elif args.command == "cond-a":
            cfg = build_config(args, _COND_A_DEFAULTS)
            report = run_cond_a(cfg)
        elif args.command == "cond-mass":
            cfg = build_config(args, _COND_MASS_DEFAULTS)
            report = run_cond_mass(cfg)
        else:
            cfg = build_config(args, {})
            report = inspect_element(cfg, args.element)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NotAnInterfaceElement as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FrenetIFEError as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {report.path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
