"""Command-line entry point: ``tmlambda {sites,scan,optimize,fit,spectrum}``.

Exit codes: 0 success, 1 validation error, 2 computational error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import geometry, holeburning, optimizer, tensorfit
from .errors import ComputationError, ConfigError
from .zeeman import GyroTensor, lambda_system, splitting


def write_atomic(path: str | None, text: str) -> None:
    """Write-then-rename; ``None`` or ``-`` means stdout."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        os.unlink(tmp)
        raise


def _json(obj) -> str:
    return json.dumps(obj, indent=2, default=_jsonable) + "\n"


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _finite_or_none(x):
    return None if x is None or not math.isfinite(x) else float(x)


def _tensors(cfg):
    if cfg.gamma_g is None:
        raise ConfigError("gamma_g", "required for this command")
    if cfg.gamma_e is None:
        raise ConfigError("gamma_e", "required for this command")
    return GyroTensor(*cfg.gamma_g, "ground"), GyroTensor(*cfg.gamma_e, "excited")


def _fmt_set(s) -> str:
    return "{" + ",".join(str(i) for i in sorted(s)) + "}"


def cmd_sites(cfg) -> str:
    b = cfg.field_direction()
    pol = cfg.polarization_vector()
    cls = geometry.classify_sites(b, pol)
    target = cls.class_of(cfg.site)
    fraction = cls.od_fraction(target) if target else 0.0
    frac_str = str(Fraction(fraction).limit_denominator(12))
    summary = (
        f"optimized class {_fmt_set(target)}, fraction {frac_str}"
        if target else f"site {cfg.site} is dark for this polarization"
    )
    report = {
        "field_direction": b,
        "polarization": pol,
        "frames": [f.to_dict() for f in geometry.site_frames()],
        "dipole_projection": {str(k): v for k, v in cls.projections.items()},
        "local_field": {str(f.site_id): geometry.to_local(f, b) for f in geometry.site_frames()},
        "dark_sites": sorted(cls.dark_sites),
        "active_classes": [sorted(c) for c in cls.active_classes],
        "active_class_od_fraction": [cls.od_fraction(c) for c in cls.active_classes],
        "optimized_class": sorted(target) if target else None,
        "optimized_fraction": fraction,
        "optimized_fraction_str": frac_str,
        "summary": summary,
    }
    return _json(report)


SCAN_HEADER = ("theta_deg", "delta_g_site1", "delta_e_site1", "R_site1",
               "delta_g_site35", "delta_e_site35", "R_site35")


def cmd_scan(cfg) -> str:
    gg, ge = _tensors(cfg)
    scan = optimizer.scan_bisector(
        gg, ge,
        (math.radians(cfg.theta_start_deg), math.radians(cfg.theta_stop_deg)),
        math.radians(cfg.theta_step_deg),
    )
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_HEADER)
    for row in scan.rows():
        w.writerow(["" if not math.isfinite(v) else repr(float(v)) for v in row])
    return buf.getvalue()


def _phi(cfg) -> float:
    if cfg.phi_deg is not None:
        return math.radians(cfg.phi_deg)
    bl = geometry.to_local(geometry.frame(cfg.site), cfg.field_direction())
    return optimizer.phi_from_local(bl)


def cmd_optimize(cfg) -> str:
    if cfg.gamma_g is None and cfg.gamma_e is None:
        # bound-only route from measured splittings at B_y = 0 and gamma_y
        if cfg.gamma_y is None or cfg.splittings_mhz_per_t is None:
            raise ConfigError("gamma_g", "give full tensors, or gamma_y plus splittings_mhz_per_t")
        (dg, de), (gyg, gye) = cfg.splittings_mhz_per_t, cfg.gamma_y
        bound, theta0 = optimizer.bound_from_splittings(dg, de, gyg, gye)
        return _json({
            "mode": "bound_from_splittings",
            "theta0_local": theta0,
            "dTheta0_deg": math.degrees(optimizer.crystal_tilt(theta0)),
            "r_max_bound": bound,
            "r_max_exact": None,
        })

    gg, ge = _tensors(cfg)
    phi = _phi(cfg)
    opt = optimizer.general_tilt(gg, ge, phi)
    fac = optimizer.disparity_decomposition(gg, ge, phi)
    return _json({
        "mode": "tensors",
        "phi_deg": math.degrees(phi),
        "theta0_local": opt.theta0_local,
        "dTheta0_deg": math.degrees(opt.dTheta0_crystal),
        "r_max_bound": opt.r_max_bound,
        "r_max_exact": opt.r_max_exact,
        "theta_star": opt.theta_star,
        "r_at_theta0": opt.r_at_theta0,
        "sin_alpha_at_theta0": opt.sin_alpha_at_theta0,
        "A": fac.A,
        "C": fac.C,
        "F": fac.F,
        "identity_residual": fac.identity_residual,
    })


def cmd_fit(cfg) -> str:
    if cfg.measurements is None:
        raise ConfigError("measurements", "path to measurement JSON is required")
    try:
        text = Path(cfg.measurements).read_text()
    except OSError as exc:
        raise ConfigError("measurements", f"cannot read {cfg.measurements}: {exc.strerror}") from None
    ms = tensorfit.measurements_from_json(text)
    return _json(tensorfit.fit_all(ms))


def spectrum_inputs(cfg):
    """Splittings (MHz) and optical R for the configured field and site."""
    if cfg.splittings_mhz_per_t is not None:
        dg, de = (v * cfg.field_tesla for v in cfg.splittings_mhz_per_t)
    else:
        gg, ge = _tensors(cfg)
        bl = cfg.field_tesla * geometry.to_local(geometry.frame(cfg.site), cfg.field_direction())
        dg, de = splitting(gg, bl), splitting(ge, bl)
    if cfg.branching_ratio is not None:
        R = cfg.branching_ratio
    else:
        if cfg.gamma_g is None or cfg.gamma_e is None:
            raise ConfigError("branching_ratio", "required unless gamma_g and gamma_e are given")
        gg, ge = _tensors(cfg)
        bl = geometry.to_local(geometry.frame(cfg.site), cfg.field_direction())
        R = lambda_system(gg, ge, bl).branching_ratio
    return dg, de, R


def cmd_spectrum(cfg):
    dg, de, R = spectrum_inputs(cfg)
    try:
        burn = holeburning.BurnConfig(
            P0=cfg.p0, Gamma0=cfg.gamma0, R=R, R1=cfg.r1, gamma_h=cfg.gamma_h_mhz,
            omega0=cfg.omega0_mhz, baseline_od=cfg.baseline_od,
            sidebands=holeburning.default_sidebands(cfg.sideband_amplitude) if cfg.sidebands else (),
        )
    except ValueError as exc:
        raise ConfigError("burn", str(exc)) from None
    spec = holeburning.synthesize_spectrum(dg, de, burn, cfg.window_mhz, cfg.resolution_mhz)
    feats = holeburning.detect_features(spec, cfg.min_depth, center=cfg.omega0_mhz)
    sat = holeburning.saturation_check(burn)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("probe_offset_mhz", "optical_depth", "transmission"))
    for x, od, t in zip(spec.probe_grid, spec.optical_depth, spec.transmission):
        w.writerow((repr(float(x)), repr(float(od)), repr(float(t))))

    classes = holeburning.classify_features(dg, de)
    features = {
        "delta_g_mhz": dg,
        "delta_e_mhz": de,
        "branching_ratio": R,
        "saturation": vars(sat),
        "expected": {
            k: {"position": v.position, "kind": v.kind,
                "contributions": ["".join(c) for c in v.contributions], "notes": list(v.notes)}
            for k, v in classes.items()
        },
        "features": [vars(f) for f in feats],
    }
    return buf.getvalue(), _json(features)


def _direction_arg(text):
    if text is None:
        return None
    if text.strip().startswith("["):
        return text.strip()
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a label like [111] or u,v,w; got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tmlambda", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML key-value config file")
    common.add_argument("--field-tesla", type=float)
    common.add_argument("--theta-deg", type=float, help="bisector-plane angle from [001] (degrees)")
    common.add_argument("--direction", type=_direction_arg, help="label like [-1-11] or u,v,w")
    common.add_argument("--polarization", type=_direction_arg)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--error-json", action="store_true", help="emit errors as JSON on stderr")

    sub.add_parser("sites", parents=[common], help="site frames and classification")
    sub.add_parser("scan", parents=[common], help="bisector-plane orientation scan (CSV)")
    sub.add_parser("optimize", parents=[common], help="optimal tilt and branching ratio (JSON)")
    fit = sub.add_parser("fit", parents=[common], help="fit gamma_y from splitting measurements (JSON)")
    fit.add_argument("measurements", nargs="?", help="measurement JSON file")
    spec = sub.add_parser("spectrum", parents=[common], help="synthetic hole-burning spectrum")
    spec.add_argument("--sidebands", action="store_true", default=None, help="add the 864 kHz burn sidebands")
    spec.add_argument("--features-out", help="feature JSON path (default: stdout)")
    return p


def _overrides(args) -> dict:
    ov = {
        "field_tesla": args.field_tesla,
        "theta_deg": args.theta_deg,
        "direction": args.direction,
        "polarization": args.polarization,
        "out": args.out,
    }
    for name in ("measurements", "sidebands", "features_out"):
        if hasattr(args, name):
            ov[name] = getattr(args, name)
    return ov


def _fail(args, code, kind, exc):
    key = getattr(exc, "key", None)
    if args is not None and args.error_json:
        sys.stderr.write(json.dumps({"error": kind, "key": key, "message": str(exc)}) + "\n")
    else:
        sys.stderr.write(f"tmlambda: {kind}: {exc}\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = cfgmod.load(args.config, _overrides(args))
        if args.command == "spectrum":
            csv_text, feat_text = cmd_spectrum(cfg)
            write_atomic(cfg.out, csv_text)
            write_atomic(cfg.features_out, feat_text)
        else:
            handler = {"sites": cmd_sites, "scan": cmd_scan, "optimize": cmd_optimize, "fit": cmd_fit}
            write_atomic(cfg.out, handler[args.command](cfg))
    except ConfigError as exc:
        return _fail(args, 1, "validation", exc)
    except ComputationError as exc:
        return _fail(args, 2, "computation", exc)
    except ValueError as exc:
        return _fail(args, 1, "validation", exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
