#!/usr/bin/env python3
"""Smoke test of the leakywire_py extension module.

Builds nothing itself: run `cargo build -p leakywire-python --release` first,
then `python3 python/smoke_test.py`. The script locates the compiled cdylib in
target/, imports it under the proper module name and exercises the main types
and operations against frozen reference values.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / "release" / "libleakywire_py.so",
        REPO / "target" / "debug" / "libleakywire_py.so",
        REPO / "target" / "release" / "leakywire_py.dll",
        REPO / "target" / "release" / "libleakywire_py.dylib",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit(
            "extension not built; run `cargo build -p leakywire-python --release` first"
        )
    stage = Path(tempfile.mkdtemp(prefix="leakywire-py-"))
    suffix = ".pyd" if built.suffix == ".dll" else ".so"
    shutil.copy2(built, stage / f"leakywire_py{suffix}")
    sys.path.insert(0, str(stage))
    import leakywire_py

    return leakywire_py


CHECKS = []


def check(name, ok, detail=""):
    CHECKS.append(ok)
    print(f"[{'PASS' if ok else 'FAIL'}] {name} {detail}")


def main():
    lw = load_module()

    # constants and special functions
    check(
        "varsigma",
        abs(lw.varsigma() - 0.018451073777171806) < 1e-16,
        f"= {lw.varsigma():.15f}",
    )
    check(
        "bessel_k0(1)",
        abs(lw.bessel_k0(1.0) - 0.4210244382407083) < 1e-13,
        f"= {lw.bessel_k0(1.0):.15f}",
    )
    check("k0_square_moment", abs(lw.k0_square_moment() - 0.5) < 1e-10)
    xi0 = lw.xi(0.0)
    check("xi(0)", abs(xi0 - (-1.2609470067487736)) < 1e-13, f"= {xi0:.13f}")
    check(
        "xi shift law",
        abs(lw.xi(0.3) - xi0 * math.exp(-4 * math.pi * 0.3)) < 1e-15,
    )

    # coupling construction
    const = lw.Coupling.constant(0.1)
    check("constant coupling mean", abs(const.mean - 0.1) < 1e-15)
    amp = 0.05 * math.sqrt(math.pi / 2)
    sigma = lw.Coupling.from_fourier(
        {0: 0.1 * math.sqrt(2 * math.pi), 1: amp, -1: amp}
    )
    check(
        "fourier coupling evaluate",
        abs(sigma.evaluate(0.0) - 0.15) < 1e-12,
        f"sigma(0) = {sigma.evaluate(0.0):.12f}",
    )
    samples = [0.3 + 0.1 * math.cos(-math.pi + 2 * math.pi * j / 32) for j in range(32)]
    from_samples = lw.Coupling.from_samples(samples)
    check("sampled coupling roundtrip", abs(from_samples.evaluate(-math.pi) - samples[0]) < 1e-12)

    # line model: constant coupling at k=0 gives {xi, xi+1 (double)}
    modes = lw.line_spectrum(0.0, lw.Coupling.constant(0.0), n_modes=64)
    check(
        "line spectrum values",
        len(modes) == 2
        and abs(modes[0]["lambda"] - xi0) < 1e-8
        and abs(modes[1]["lambda"] - (xi0 + 1.0)) < 1e-8,
        f"lambdas = {[m['lambda'] for m in modes]}",
    )
    check(
        "line spectrum multiplicities",
        [m["multiplicity"] for m in modes] == [1, 2],
    )
    norm = sum(abs(c) ** 2 for _, c in modes[0]["coeffs"])
    check("mode coefficients normalized", abs(norm - 1.0) < 1e-12)

    # field reconstruction: ground mode is a K0 profile
    u = lw.reconstruct_field(0.0, modes[0]["lambda"], modes[0]["coeffs"], [(0.0, 0.5), (1.3, 0.5)])
    check("field x-independence", abs(u[0] - u[1]) < 1e-12)

    # embedded kernel point at xi(0) + (1.25)^2
    found = lw.embedded_kernel_search(0.25, lw.Coupling.constant(0.0), (0.29, 0.31), n_modes=48)
    check(
        "embedded kernel point",
        len(found) == 1 and abs(found[0]["lambda"] - (xi0 + 1.5625)) < 1e-6,
        f"at {found[0]['lambda']:.9f}" if found else "none found",
    )

    # grating symbol: anchor, dual representation, root
    ctx = lw.GratingContext()
    check("anchor t(-1,0)", abs(ctx.anchor - (-0.018743220958073229)) < 1e-12)
    a = lw.t_renormalized(-2.0, 0.25, ctx)
    b = lw.t_image(-2.0, 0.25, ctx)
    check("t dual representation", abs(a - b) < 1e-9, f"|diff| = {abs(a - b):.2e}")
    l00 = lw.lambda_const(0.0, 0.0)
    check("lambda(0,0)", abs(l00 - (-1.2629568946630512)) < 1e-8, f"= {l00:.10f}")

    # grating spectrum at k = (0,0)
    gmodes = lw.grating_spectrum(0.0, 0.0, lw.Coupling.constant(0.0), n_modes=48)
    check(
        "grating spectrum",
        len(gmodes) == 2
        and abs(gmodes[0]["lambda"] - l00) < 1e-7
        and gmodes[1]["multiplicity"] == 2,
        f"lambdas = {[m['lambda'] for m in gmodes]}",
    )

    # psi dual representation
    pm = lw.psi_field(1.0, 0.5, -1.0, 0.25, method="mode")
    pi_ = lw.psi_field(1.0, 0.5, -1.0, 0.25, method="image")
    check("psi dual representation", abs(pm - pi_) < 1e-9, f"psi = {pm:.9f}")

    # band sweep with gap report
    bands = lw.line_bands(sigma, k_count=41, n_modes=32)
    check(
        "band sweep",
        len(bands["k"]) == 41 and bands["converged"] and len(bands["union"]) >= 1,
        f"union = {bands['union']}",
    )

    # Hilbert-Schmidt identity: both routes near coth(pi)/4
    closed, quad = lw.hs_norm_identity(1.0, k=0.0, n_cut=1500)
    ref = 1.0 / (4.0 * math.tanh(math.pi))
    check(
        "hs norm identity",
        abs(closed - ref) < 1e-4 and abs(quad - ref) < 1e-4,
        f"closed = {closed:.7f}, quadrature = {quad:.7f}",
    )

    # complexified probe: s_min grows with the probe height
    probe = lw.complexified_bound_probe(0.5, 0.25, 0.04, [100.0, 1000.0], sigma, n_modes=32)
    check(
        "complexified probe",
        probe[1][1] > probe[0][1] > 0.05 * math.log(101.0),
        f"s_min = {[round(s, 4) for _, s in probe]}",
    )

    # inter-wire coupling norm
    check(
        "tj_norm",
        abs(lw.tj_norm(1, -1.0) - 1.4587893179865631e-4) < 1e-15,
    )

    # error paths surface as ValueError
    try:
        lw.bessel_k0(-1.0)
        check("domain error surfaces", False)
    except ValueError:
        check("domain error surfaces", True)

    failed = CHECKS.count(False)
    print(f"\nsmoke test: {len(CHECKS) - failed}/{len(CHECKS)} checks passed")
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
