"""2D delay-line operation of the multicavity FBG device.

Prints tap delays and FSRs for every core (wavelength diversity) and every
channel (spatial diversity), then writes each core's reflection spectrum.
"""

import argparse
from pathlib import Path

import numpy as np

from mcf_ttdl import fbg_device as fb
from mcf_ttdl import mwp_filter as mf


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--group-index", type=float, default=fb.DEFAULT_GROUP_INDEX)
    ap.add_argument("--out", default=".")
    args = ap.parse_args()

    layout = fb.canonical_paper_layout(n_g=args.group_index)
    print("wavelength diversity (one core, three channels)")
    for core in sorted(layout.cores, reverse=True):
        d = fb.tap_delays(layout, "wavelength", core)
        print(f"  core {core}: delays {np.round(d, 2).tolist()} ps, "
              f"FSR {mf.fsr(mf.TapSet(d, np.ones(d.size))):.3f} GHz")
    print("spatial diversity (one channel, three cores)")
    for i, lam in enumerate(layout.wavelength_channels, start=1):
        d = fb.tap_delays(layout, "spatial", i)
        print(f"  channel {i} ({lam * 1e9:.2f} nm): delays {np.round(d, 2).tolist()} ps, "
              f"FSR {mf.fsr(mf.TapSet(d, np.ones(d.size))):.3f} GHz")

    lam = np.linspace(1535e-9, 1548e-9, 5201)
    for core in layout.cores:
        path = Path(args.out) / f"fbg_core{core}_reflection.csv"
        path.write_text(fb.spectrum_csv(fb.core_spectrum(layout, core, lam)))
        print(f"core {core} spectrum -> {path}")


if __name__ == "__main__":
    main()
