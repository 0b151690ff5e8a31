"""Print the headline numbers: fitted gamma_y, figures of merit, theory optimum,
and feature positions of the 24 mT spectrum.

    python scripts/reproduce_numbers.py [--json results.json]
"""

import argparse
import json
import math
from dataclasses import asdict

from tmlambda import THEORY_EXCITED, THEORY_GROUND
from tmlambda import holeburning as hb
from tmlambda import optimizer as opt
from tmlambda import tensorfit as tf

MEASUREMENTS = [
    tf.SplittingMeasurement("[-1-11]", 15.3, 14.4, 0.1, 0.1),
    tf.SplittingMeasurement("[001]", 285.0, 60.0, 2.0, 2.0),
    tf.SplittingMeasurement("[111]", 329.0, 67.0, 2.0, 2.0),
]


def fit_section():
    res = tf.fit_all({m.direction_label: m for m in MEASUREMENTS})
    fit, lf, cons = res["fit"], res["lambda_figures"], res["consistency"]
    print("gamma_y fit (MHz/T)")
    for lvl in ("g", "e"):
        v, c = fit[f"gy_{lvl}"], fit[f"gy_{lvl}_combination"]
        print(f"  {lvl}: {v['value']:8.3f} +/- {v['sigma']:.3f}   combination route {c['value']:8.3f} +/- {c['sigma']:.3f}")
    print(f"  ratio_comb g/e : {fit['ratio_comb_g']['value']:.4f} / {fit['ratio_comb_e']['value']:.4f}")
    print(f"  gx/gy excited  : {fit['ratio_xy_e']['value']:.4f} +/- {fit['ratio_xy_e']['sigma']:.4f}")
    print(f"  gx/gy ground < : {fit['ratio_xy_g_upper']:.4f}")
    print(f"  R_max bound    : {lf['r_max_bound']['value']:.4f} +/- {lf['r_max_bound']['sigma']:.4f}")
    print(f"  dTheta0        : {lf['dTheta0_deg']['value']:.3f} +/- {lf['dTheta0_deg']['sigma']:.3f} deg")
    print(f"  [001] predicted: {cons['predicted_g']['value']:.2f} / {cons['predicted_e']['value']:.2f}")
    return res


def theory_section():
    phi = math.atan(1 / math.sqrt(2))
    t = opt.general_tilt(THEORY_GROUND, THEORY_EXCITED, phi)
    f = opt.disparity_decomposition(THEORY_GROUND, THEORY_EXCITED, phi)
    scan = opt.scan_bisector(THEORY_GROUND, THEORY_EXCITED, step=math.radians(0.01))
    r35 = scan.site_classes["site35"].branching_ratio
    i = int(r35.argmax())
    print("theory tensors, sites 3/5")
    print(f"  bound {t.r_max_bound:.5f}  exact {t.r_max_exact:.5f} at theta* {t.theta_star:.5f} rad")
    print(f"  theta0 {t.theta0_local:.5f} rad  dTheta0 {math.degrees(t.dTheta0_crystal):.3f} deg")
    print(f"  A {f.A:.5f}  C {f.C:.5f}  F {f.F:.5f}  identity residual {f.identity_residual:.1e}")
    print(f"  bisector-plane max R {r35[i]:.5f} at {math.degrees(scan.theta_grid[i]):.2f} deg")
    return {"tilt": asdict(t), "A": f.A, "C": f.C, "F": f.F,
            "scan_max": float(r35[i]), "scan_argmax_deg": math.degrees(scan.theta_grid[i])}


def spectrum_section():
    dg, de = 329 * 0.024, 67 * 0.024
    cfg = hb.BurnConfig(P0=0.5, Gamma0=1.0, R=0.2, R1=1.0)
    spec = hb.synthesize_spectrum(dg, de, cfg, window=(-12, 12), resolution=0.02)
    feats = [f for f in hb.detect_features(spec, 1e-4) if f.position > -0.01]
    print(f"24 mT spectrum: delta_g {dg:.3f}, delta_e {de:.3f} MHz")
    for f in feats:
        print(f"  {f.kind:8s} {f.position:7.3f} MHz  depth {f.depth:.2e}")
    return [vars(f) for f in feats]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--json", help="also write the numbers to this file")
    args = ap.parse_args()
    out = {"fit": fit_section(), "theory": theory_section(), "spectrum_features": spectrum_section()}
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(out, fh, indent=2, default=float)


if __name__ == "__main__":
    main()
