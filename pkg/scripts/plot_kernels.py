"""Tabulate L_h for the built-in rates at a few bandwidths (CSV, one file per rate and h)."""
import sys
from pathlib import Path

import numpy as np

from mtginf.kernels import make_L
from mtginf.rates import make_constant, make_highlow, make_linear, make_sinusoidal

RATES = {"constant": make_constant(1.0), "linear": make_linear(1.0),
         "highlow": make_highlow(1.0, 0.0), "cosine": make_sinusoidal(10.0, 1.0, "cos")}

if __name__ == "__main__":
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "results/kernels")
    out.mkdir(parents=True, exist_ok=True)
    ts = np.linspace(-3, 3, 601)
    for name, rate in RATES.items():
        for h in (0.25, 0.5, 1.0):
            make_L(rate, h, table_range=(-3, 3)).dump_csv(ts, out / f"L_{name}_h{h:g}.csv")
    print(f"wrote {len(RATES) * 3} tables to {out}")
