"""Regenerate the bundled synthetic datasets in src/metabic/data.

Run from the repository root: python3 scripts/make_fixtures.py
"""
import warnings
from pathlib import Path

import numpy as np

from metabic.cdos import preset
from metabic.fitting import synthetic_cdos_series, synthetic_purcell_series

SEED = 20240611
DATA = Path(__file__).resolve().parents[1] / "src" / "metabic" / "data"


def write(path, header, xname, series, scale):
    with open(path, "w", encoding="utf-8") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(f"{xname},y\n")
        for x, y in zip(series.x, series.y):
            fh.write(f"{x / scale!r},{y!r}\n")


def main():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        md = preset("md_finite")
    d = np.linspace(2 * md.a, 50 * md.a, 241)
    s = synthetic_cdos_series(md, d, noise=0.01, seed=SEED)
    write(
        DATA / "synthetic_md_cdos.csv",
        [
            "gamma12/gamma0 from the single-mode model, MD finite-surface preset",
            f"beta={md.beta} k_res_per_um={md.k_res * 1e-6:.6g} purcell={md.purcell}",
            f"1% multiplicative Gaussian noise, numpy default_rng seed {SEED}",
        ],
        "d [um]",
        s,
        1e-6,
    )
    heights = np.linspace(2e-9, 120e-9, 60)
    p = synthetic_purcell_series(15.47, 16.97, 400e-9, 100e-9, heights, noise=0.01, seed=SEED)
    write(
        DATA / "synthetic_md_purcell.csv",
        [
            "Purcell factor 1 + A exp(-B (z - R)/a), A=15.47 B=16.97 a=400 nm R=100 nm",
            f"1% multiplicative Gaussian noise, numpy default_rng seed {SEED}",
        ],
        "z [nm]",
        p,
        1e-9,
    )


if __name__ == "__main__":
    main()
