"""RMSE of the adaptive G(1) estimate against the number of paths (sinusoidal rate)."""
import json
import sys
from pathlib import Path

from mtginf.experiment import preset, rmse_vs_n

if __name__ == "__main__":
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "results")
    out.mkdir(parents=True, exist_ok=True)
    spec = preset("case1a", estimator={"target": "G", "x0": [1.0],
                                       "adaptive": {"h_min": 0.025, "alpha": 0.25}})
    curve = rmse_vs_n(spec, [25, 50, 100, 200, 400], replications=50, threads=4)
    for n, r in curve:
        print(f"n={n:4d}  rmse={r['G(1)']:.4f}")
    (out / "case1a_rmse_curve.json").write_text(json.dumps([{"n": n, "rmse": r} for n, r in curve], indent=2) + "\n")
