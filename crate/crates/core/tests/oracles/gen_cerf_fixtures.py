"""Regenerate the complex error function reference tables.

Values are computed with mpmath at 60 significant digits and written with
20 significant digits. Run from the crate root:

    python3 tests/oracles/gen_cerf_fixtures.py
"""

import os

import mpmath as mp
import numpy as np

mp.mp.dps = 60
HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "data")


def fmt(x):
    return mp.nstr(x, 20, min_fixed=1, max_fixed=0)


def faddeeva(z):
    return mp.exp(-z * z) * mp.erfc(-1j * z)


def main():
    rng = np.random.default_rng(20110512)
    n = 10_000
    radii = 10.0 ** rng.uniform(-4.0, np.log10(20.0), n)
    angles = rng.uniform(0.0, 2.0 * np.pi, n)
    with open(os.path.join(DATA, "cerf_reference.csv"), "w") as out:
        out.write("z_re,z_im,w_re,w_im,erf_re,erf_im\n")
        for r, a in zip(radii, angles):
            zr, zi = float(r * np.cos(a)), float(r * np.sin(a))
            z = mp.mpc(zr, zi)
            w = faddeeva(z)
            e = mp.erf(z)
            out.write(",".join([repr(zr), repr(zi), fmt(w.real), fmt(w.imag), fmt(e.real), fmt(e.imag)]) + "\n")

    with open(os.path.join(DATA, "erf_real_reference.csv"), "w") as out:
        out.write("x,erf\n")
        for x in np.linspace(-6.0, 6.0, 241):
            x = float(x)
            out.write(f"{x!r},{fmt(mp.erf(mp.mpf(x)))}\n")

    # Grid for the identity w(z) exp(z^2) = erfc(-iz), all quadrants.
    with open(os.path.join(DATA, "erfc_identity_reference.csv"), "w") as out:
        out.write("z_re,z_im,erfc_re,erfc_im\n")
        for r in np.geomspace(1e-3, 10.0, 40):
            for k in range(16):
                a = (k + 0.5) * 2.0 * np.pi / 16
                zr, zi = float(r * np.cos(a)), float(r * np.sin(a))
                v = mp.erfc(-1j * mp.mpc(zr, zi))
                out.write(f"{zr!r},{zi!r},{fmt(v.real)},{fmt(v.imag)}\n")

    # Scalar anchors used directly in unit tests.
    a, b = mp.mpc(2, 5), mp.mpc(-2, 5)
    pair = mp.exp(-25) * (mp.erf(a) - mp.erf(b))
    print("pair_erf_diff(2+5i, -2+5i, -25) =", fmt(pair.real), fmt(pair.imag))
    print("w(i) =", fmt(faddeeva(mp.mpc(0, 1)).real))
    print("w(1e4) =", fmt(faddeeva(mp.mpc(1e4, 0)).real), fmt(faddeeva(mp.mpc(1e4, 0)).imag))
    print("erf(1) =", fmt(mp.erf(1)))


if __name__ == "__main__":
    main()
