"""Command-line interface: simulate gauge protocols, identify offsets,
reproduce the bundled prototype experiments, and run Monte Carlo studies.

Exit codes: 0 success, 2 configuration or parse error, 3 numerical failure.

Measurement CSV: one header row naming the columns exactly (reduced:
``dx_y,dx_z,dy_x,dy_z,dz_x,dz_y``; full: the 12 names of
:data:`orthocal.identification.FULL_COLUMNS`), one data row of mm values,
``#`` lines are comments.  Config files are flat ``key=value`` text; unknown
keys are rejected.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import identification, kinematics, leg_model, virtual_rig
from .errors import CalibrationError, ConfigError, MeasurementFormatError
from .experiments import EXPERIMENTS
from .identification import FULL_COLUMNS, REDUCED_COLUMNS, PostureAngles

DEFAULT_TOLERANCE = 0.03  # mm, for r.m.s. comparisons against the bundled data


# ---------------------------------------------------------------------------
# configuration

@dataclass
class RunConfig:
    """Resolved run configuration (geometry, rig parameters, angle overrides)."""

    geometry: kinematics.Geometry = kinematics.DEFAULT_GEOMETRY
    geometry_explicit: bool = False
    alpha_max: float | None = None
    alpha_min: float | None = None
    true_offsets: tuple[float, float, float] = (0.0, 0.0, 0.0)
    noise_std: float = 0.007
    gauge_resolution: float = 0.010
    repetitions: int = 3
    seed: int = 0
    form: str = "reduced"


_FLOAT_KEYS = {
    "L_mm", "rho_min_mm", "rho_max_mm", "alpha1_rad", "alpha2_rad",
    "true_offset_x_mm", "true_offset_y_mm", "true_offset_z_mm",
    "noise_std_mm", "gauge_resolution_mm",
}
_INT_KEYS = {"repetitions", "seed"}
_STR_KEYS = {"form"}
CONFIG_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS


def parse_config(path) -> RunConfig:
    """Parse a flat key=value config file into a RunConfig."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc

    items: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in items:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        items[key] = value
    return config_from_items(items)


def _parse_value(key: str, value: str):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError as exc:
        raise ConfigError(f"invalid value for {key}: {value!r}") from exc
    return value


def config_from_items(items: dict[str, str]) -> RunConfig:
    """Build a RunConfig from raw key/value strings, validating everything."""
    cfg = RunConfig()
    parsed = {key: _parse_value(key, value) for key, value in items.items()}

    geometry_keys = {"L_mm", "rho_min_mm", "rho_max_mm"}
    if geometry_keys & parsed.keys():
        base = kinematics.DEFAULT_GEOMETRY
        try:
            cfg.geometry = kinematics.Geometry(
                leg_length=parsed.get("L_mm", base.leg_length),
                rho_min=parsed.get("rho_min_mm", base.rho_min),
                rho_max=parsed.get("rho_max_mm", base.rho_max),
            )
        except ValueError as exc:
            raise ConfigError(f"invalid geometry: {exc}") from exc
        cfg.geometry_explicit = True

    if ("alpha1_rad" in parsed) != ("alpha2_rad" in parsed):
        raise ConfigError("alpha1_rad and alpha2_rad must be given together")
    cfg.alpha_max = parsed.get("alpha1_rad")
    cfg.alpha_min = parsed.get("alpha2_rad")
    if cfg.alpha_max is not None:
        try:
            PostureAngles(cfg.alpha_max, cfg.alpha_min)
        except ValueError as exc:
            raise ConfigError(f"invalid angle override: {exc}") from exc

    cfg.true_offsets = (
        parsed.get("true_offset_x_mm", 0.0),
        parsed.get("true_offset_y_mm", 0.0),
        parsed.get("true_offset_z_mm", 0.0),
    )
    cfg.noise_std = parsed.get("noise_std_mm", cfg.noise_std)
    cfg.gauge_resolution = parsed.get("gauge_resolution_mm", cfg.gauge_resolution)
    cfg.repetitions = parsed.get("repetitions", cfg.repetitions)
    cfg.seed = parsed.get("seed", cfg.seed)
    cfg.form = parsed.get("form", cfg.form)
    if cfg.form not in ("full", "reduced"):
        raise ConfigError(f"form must be 'full' or 'reduced', got {cfg.form!r}")
    return cfg


def load_config(args) -> RunConfig:
    """Config file (if any) plus command-line overrides."""
    cfg = parse_config(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "form", None) is not None:
        cfg.form = args.form
    return cfg


def rig_from_config(cfg: RunConfig) -> virtual_rig.RigConfig:
    try:
        return virtual_rig.RigConfig(
            geometry=cfg.geometry,
            true_offsets=cfg.true_offsets,
            gauge_resolution=cfg.gauge_resolution,
            noise_std=cfg.noise_std,
            repetitions=cfg.repetitions,
            seed=cfg.seed,
        )
    except ValueError as exc:
        raise ConfigError(f"invalid rig configuration: {exc}") from exc


def resolve_angles(cfg: RunConfig, allow_fit: bool = False) -> PostureAngles | None:
    """Angle precedence: explicit override > explicit geometry > fit.

    Returns None when fitting is allowed and nothing explicit was
    configured; otherwise falls back to the (default) geometry.
    """
    if cfg.alpha_max is not None:
        return PostureAngles(cfg.alpha_max, cfg.alpha_min)
    if cfg.geometry_explicit or not allow_fit:
        return PostureAngles.from_geometry(cfg.geometry)
    return None


# ---------------------------------------------------------------------------
# measurement files

def write_measurement_file(path, columns, values, comments=()) -> None:
    lines = [f"# {comment}" for comment in comments]
    lines.append(",".join(columns))
    lines.append(",".join(repr(float(v)) for v in values))
    Path(path).write_text("\n".join(lines) + "\n")


def read_measurement_file(path) -> tuple[str, np.ndarray]:
    """Parse a measurement CSV; returns (form, values)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise MeasurementFormatError(f"cannot read {path}: {exc}") from exc
    rows = [line.strip() for line in text.splitlines()
            if line.strip() and not line.strip().startswith("#")]
    if len(rows) < 2:
        raise MeasurementFormatError(f"{path}: expected a header and one data row")
    header = tuple(name.strip() for name in rows[0].split(","))
    if header == REDUCED_COLUMNS:
        form = "reduced"
    elif header == FULL_COLUMNS:
        form = "full"
    else:
        raise MeasurementFormatError(
            f"{path}: header does not match the reduced or full column layout")
    if len(rows) != 2:
        raise MeasurementFormatError(f"{path}: expected exactly one data row")
    fields = rows[1].split(",")
    if len(fields) != len(header):
        raise MeasurementFormatError(
            f"{path}: {len(fields)} values for {len(header)} columns")
    try:
        values = np.array([float(v) for v in fields])
    except ValueError as exc:
        raise MeasurementFormatError(f"{path}: non-numeric value: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise MeasurementFormatError(f"{path}: non-finite measurement value")
    return form, values


# ---------------------------------------------------------------------------
# reports

def _json_ready(obj):
    if isinstance(obj, np.ndarray):
        return [float(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    return obj


def write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(_json_ready(payload), indent=2) + "\n")


def identification_report(cfg: RunConfig, angles: PostureAngles, form: str,
                          columns, measurements,
                          result: identification.CalibrationResult) -> dict:
    table = {
        name: {"measured_mm": float(m), "predicted_improvement_mm": float(r)}
        for name, m, r in zip(columns, measurements, result.residuals)
    }
    return {
        "inputs": {
            "form": form,
            "alpha_max_rad": angles.alpha_max,
            "alpha_min_rad": angles.alpha_min,
            "geometry_mm": {
                "L": cfg.geometry.leg_length,
                "rho_min": cfg.geometry.rho_min,
                "rho_max": cfg.geometry.rho_max,
            },
            "measurements_mm": measurements,
        },
        "offsets_mm": result.offsets,
        "residuals_mm": result.residuals,
        "sigma_hat_mm": result.sigma_hat,
        "rms_before_mm": result.rms_before,
        "rms_after_predicted_mm": result.rms_after_predicted,
        "table": table,
    }


def print_identification_report(report: dict) -> None:
    offsets = report["offsets_mm"]
    print(f"form:                {report['inputs']['form']}")
    print(f"posture angles:      alpha_max={report['inputs']['alpha_max_rad']:+.6f} rad, "
          f"alpha_min={report['inputs']['alpha_min_rad']:+.6f} rad")
    print(f"estimated offsets:   dx={offsets[0]:+.4f}  dy={offsets[1]:+.4f}  "
          f"dz={offsets[2]:+.4f}  (mm)")
    print(f"sigma_hat:           {report['sigma_hat_mm']:.4f} mm")
    print(f"rms before:          {report['rms_before_mm']:.4f} mm")
    print(f"rms after (model):   {report['rms_after_predicted_mm']:.4f} mm")
    print(f"{'column':<12}{'measured':>12}{'improved':>12}")
    for name, row in report["table"].items():
        print(f"{name:<12}{row['measured_mm']:>+12.4f}"
              f"{row['predicted_improvement_mm']:>+12.4f}")


# ---------------------------------------------------------------------------
# commands

def cmd_simulate(args) -> int:
    cfg = load_config(args)
    rig = rig_from_config(cfg)
    _, full, reduced = virtual_rig.run_protocol(rig)
    columns, values = ((FULL_COLUMNS, full) if cfg.form == "full"
                       else (REDUCED_COLUMNS, reduced))
    comments = (
        f"simulated gauge protocol, form={cfg.form}",
        f"L_mm={rig.geometry.leg_length!r} rho_min_mm={rig.geometry.rho_min!r} "
        f"rho_max_mm={rig.geometry.rho_max!r}",
        f"true_offsets_mm={rig.true_offsets!r}",
        f"noise_std_mm={rig.noise_std!r} gauge_resolution_mm={rig.gauge_resolution!r} "
        f"repetitions={rig.repetitions} seed={rig.seed}",
    )
    write_measurement_file(args.out, columns, values, comments)
    print(f"wrote {cfg.form} measurement set to {args.out}")
    return 0


def cmd_identify(args) -> int:
    cfg = load_config(args)
    form, measurements = read_measurement_file(args.infile)
    angles = resolve_angles(cfg)
    design = (identification.design_matrix_full(angles) if form == "full"
              else identification.design_matrix_reduced(angles))
    result = identification.solve_offsets(design, measurements)
    columns = FULL_COLUMNS if form == "full" else REDUCED_COLUMNS
    report = identification_report(cfg, angles, form, columns, measurements, result)
    print_identification_report(report)
    if args.out:
        write_json(args.out, report)
        print(f"report written to {args.out}")
    return 0


def cmd_table1(args) -> int:
    cfg = load_config(args)
    tolerance = args.tolerance if args.tolerance is not None else DEFAULT_TOLERANCE
    angles = resolve_angles(cfg, allow_fit=True)
    if angles is None:
        # fit on the second experiment (after mechanical tuning), the one the
        # offsets were identified from
        angles = identification.fit_posture_angles(
            EXPERIMENTS[1].measured, EXPERIMENTS[1].expected_improvement)
        angle_source = "fit"
    elif cfg.alpha_max is not None:
        angle_source = "override"
    else:
        angle_source = "geometry"

    design = identification.design_matrix_reduced(angles)
    rows = []
    all_ok = True
    for record in EXPERIMENTS:
        result = identification.solve_offsets(design, record.measured)
        rms_measured = identification.rms(record.measured)
        rms_predicted = result.rms_after_predicted
        measured_ok = abs(rms_measured - record.rms_measured) <= tolerance
        predicted_ok = abs(rms_predicted - record.rms_improvement) <= tolerance
        all_ok = all_ok and measured_ok and predicted_ok
        rows.append({
            "label": record.label,
            "measured_mm": record.measured,
            "rms_measured_mm": rms_measured,
            "rms_measured_published_mm": record.rms_measured,
            "rms_measured_ok": measured_ok,
            "offsets_mm": result.offsets,
            "sigma_hat_mm": result.sigma_hat,
            "predicted_improvement_mm": result.residuals,
            "rms_predicted_mm": rms_predicted,
            "rms_improvement_published_mm": record.rms_improvement,
            "rms_predicted_ok": predicted_ok,
        })

    report = {
        "angles": {
            "alpha_max_rad": angles.alpha_max,
            "alpha_min_rad": angles.alpha_min,
            "source": angle_source,
        },
        "tolerance_mm": tolerance,
        "experiments": rows,
        "all_within_tolerance": all_ok,
    }
    print(f"posture angles ({angle_source}): alpha_max={angles.alpha_max:+.6f} rad, "
          f"alpha_min={angles.alpha_min:+.6f} rad")
    width = max(len(row["label"]) for row in rows) + 2
    print(f"{'experiment':<{width}}{'rms meas':>10}{'published':>10}{'ok':>4}"
          f"{'rms pred':>10}{'published':>10}{'ok':>4}")
    for row in rows:
        print(f"{row['label']:<{width}}{row['rms_measured_mm']:>10.3f}"
              f"{row['rms_measured_published_mm']:>10.2f}"
              f"{'y' if row['rms_measured_ok'] else 'N':>4}"
              f"{row['rms_predicted_mm']:>10.3f}"
              f"{row['rms_improvement_published_mm']:>10.2f}"
              f"{'y' if row['rms_predicted_ok'] else 'N':>4}")
    if not all_ok:
        print(f"warning: some r.m.s. values deviate beyond +/-{tolerance:g} mm "
              "from the published table")
    if args.out:
        write_json(args.out, report)
        print(f"report written to {args.out}")
    return 0


def cmd_montecarlo(args) -> int:
    cfg = load_config(args)
    rig = rig_from_config(cfg)
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    summary = virtual_rig.monte_carlo_identification(rig, args.trials, form=cfg.form)
    lines = [
        "trial,offset_x_mm,offset_y_mm,offset_z_mm,sigma_hat_mm",
    ]
    for k, (est, sig) in enumerate(zip(summary.estimates, summary.sigma_hats)):
        lines.append(f"{k},{float(est[0])!r},{float(est[1])!r},"
                     f"{float(est[2])!r},{float(sig)!r}")
    lines += [
        f"# form={summary.form} trials={args.trials} seed={rig.seed}",
        f"# true_offsets_mm={rig.true_offsets!r}",
        f"# bias_mm={tuple(float(v) for v in summary.bias)!r}",
        f"# std_mm={tuple(float(v) for v in summary.std)!r}",
        f"# sigma_hat_mean_mm={summary.sigma_hat_mean!r}",
        f"# sigma_hat_std_mm={summary.sigma_hat_std!r}",
    ]
    if args.out:
        Path(args.out).write_text("\n".join(lines) + "\n")
        print(f"wrote {args.trials} trials to {args.out}")
    print(f"bias (mm):      {summary.bias}")
    print(f"std (mm):       {summary.std}")
    print(f"mean sigma_hat: {summary.sigma_hat_mean:.5f} mm")
    return 0


def cmd_selftest(args) -> int:
    cfg = load_config(args)
    g = cfg.geometry
    rng = np.random.default_rng(cfg.seed)
    failures = 0

    def check(name: str, ok: bool, detail: str = "") -> None:
        nonlocal failures
        print(f"selftest {name}: {'PASS' if ok else 'FAIL'}"
              + (f"  ({detail})" if detail else ""))
        failures += 0 if ok else 1

    pts = rng.uniform(-0.35 * g.leg_length, 0.35 * g.leg_length, size=(2000, 3))
    offsets = np.array([0.5, -0.3, 0.2])
    rho = kinematics.inverse_kinematics(pts, g.leg_length, offsets)
    back = kinematics.direct_kinematics(rho, g.leg_length, offsets)
    err = float(np.max(np.abs(back - pts)))
    check("kinematics round trip", err < 1e-9, f"max error {err:.2e} mm")

    worst = 0.0
    for point in pts[:50]:
        q = kinematics.inverse_kinematics(point, g.leg_length)
        j = kinematics.jacobian(point, q)
        jinv = kinematics.inverse_jacobian(point, q)
        worst = max(worst, float(np.max(np.abs(j @ jinv - np.eye(3)))))
    check("jacobian consistency", worst < 1e-10, f"max |J Jinv - I| {worst:.2e}")

    angles = PostureAngles.from_geometry(g)
    target = np.array([1.2, -0.8, 0.5])
    ok = True
    for design in (identification.design_matrix_full(angles),
                   identification.design_matrix_reduced(angles)):
        result = identification.solve_offsets(design, design @ target)
        ok = ok and bool(np.max(np.abs(result.offsets - target)) < 1e-9)
    check("linear recovery", ok)

    rig = virtual_rig.RigConfig(geometry=g, true_offsets=(0.06, -0.05, 0.08),
                                gauge_resolution=0.0, noise_std=0.0, repetitions=1,
                                seed=cfg.seed)
    _, _, reduced = virtual_rig.run_protocol(rig)
    result = identification.solve_offsets(
        identification.design_matrix_reduced(angles), reduced)
    err = float(np.max(np.abs(result.offsets - np.asarray(rig.true_offsets))))
    check("pipeline closure", err < 1e-3, f"max error {err:.2e} mm")

    run_a = virtual_rig.run_protocol(virtual_rig.RigConfig(geometry=g, seed=123))[0]
    run_b = virtual_rig.run_protocol(virtual_rig.RigConfig(geometry=g, seed=123))[0]
    check("determinism", bool(np.array_equal(run_a.readings, run_b.readings)))

    return 0 if failures == 0 else 1


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orthocal",
        description="Encoder-offset calibration toolkit for Orthoglide-type "
                    "translational parallel mechanisms.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", metavar="PATH", help="key=value config file")
        p.add_argument("--seed", type=int, metavar="N", help="override the seed")

    p = sub.add_parser("simulate", help="simulate the gauge protocol, write a CSV")
    add_common(p)
    p.add_argument("--out", metavar="PATH", required=True, help="output CSV")
    p.add_argument("--form", choices=("full", "reduced"),
                   help="measurement layout (default from config)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("identify", help="identify offsets from a measurement CSV")
    add_common(p)
    p.add_argument("--in", dest="infile", metavar="PATH", required=True,
                   help="measurement CSV")
    p.add_argument("--out", metavar="PATH", help="write a JSON report")
    p.set_defaults(func=cmd_identify, form=None)

    p = sub.add_parser("table1", help="reproduce the bundled prototype experiments")
    add_common(p)
    p.add_argument("--out", metavar="PATH", help="write a JSON report")
    p.add_argument("--tolerance", type=float, metavar="MM",
                   help=f"r.m.s. comparison tolerance (default {DEFAULT_TOLERANCE})")
    p.set_defaults(func=cmd_table1, form=None)

    p = sub.add_parser("montecarlo", help="Monte Carlo sensitivity study")
    add_common(p)
    p.add_argument("--trials", type=int, default=100, metavar="N")
    p.add_argument("--out", metavar="PATH", help="per-trial CSV output")
    p.add_argument("--form", choices=("full", "reduced"))
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("selftest", help="run quick internal consistency checks")
    add_common(p)
    p.set_defaults(func=cmd_selftest, form=None)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, MeasurementFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CalibrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
