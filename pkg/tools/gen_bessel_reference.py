#!/usr/bin/env python3
"""Pre-build oracle: arbitrary-precision reference values for K0, K1, K2.

Writes tests/data/bessel_reference.json with mpmath (50 digits) values on a
200-point log grid of moduli in [1e-3, 50], along the positive real axis and
along the rays arg(sqrt(lambda)) for lambda in {1, 1+2i, 10}.  Run once
before the build; the test suite reads the frozen file and never calls
mpmath itself.
"""

import json
import pathlib

import mpmath as mp

mp.mp.dps = 50

LAMBDAS = [1.0 + 0.0j, 1.0 + 2.0j, 10.0 + 0.0j]
NPTS = 200


def main():
    rays = [0.0]
    for lam in LAMBDAS:
        rays.append(float(mp.arg(mp.sqrt(mp.mpc(lam)))))
    moduli = [float(mp.mpf(10) ** (mp.mpf(-3) + (mp.log10(50) + 3) * k / (NPTS - 1)))
              for k in range(NPTS)]
    entries = []
    for theta in rays:
        for m in moduli:
            z = mp.mpc(m) * mp.exp(1j * mp.mpf(theta))
            row = {"z": [float(z.real), float(z.imag)]}
            for order in (0, 1, 2):
                val = mp.besselk(order, z)
                row[f"k{order}"] = [float(val.real), float(val.imag)]
            entries.append(row)
    out = pathlib.Path(__file__).resolve().parents[1] / "tests" / "data" / "bessel_reference.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps({"dps": 50, "npts": NPTS, "rays": rays,
                               "values": entries}))
    print(f"wrote {out} ({len(entries)} points)")


if __name__ == "__main__":
    main()
