# SPDX-License-Identifier: Apache-2.0
"""Smoke test for the pyqhe extension module.

Build and install first, e.g. ``maturin develop -m crates/py/Cargo.toml``,
then run ``python crates/py/python/smoke_test.py``.
"""

import cmath
import json
import math

import pyqhe


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    key = pyqhe.Key.generate(2, 2, 7)
    assert key.m == 2 and key.d == 2 and len(key.kappa) == 1
    assert pyqhe.Key.from_json(key.to_json()) == key

    # κ = (1) at m = d = 2 gives E = [[0, 1], [1, 0]]
    e = pyqhe.Key(1, 2, [1]).encryptor()
    assert close(e[0][1], 1, 1e-12) and close(e[0][0], 0, 1e-12)

    bs = pyqhe.Circuit.from_json(
        json.dumps({"m": 2, "gates": [{"kind": "bs", "modes": [1, 2], "theta": math.pi / 4, "phi": 0.0}]})
    )
    report = pyqhe.run([0, 1], bs, key)
    assert report["passed"] and report["fidelity"] >= 1 - 1e-9

    a = pyqhe.analyze(2, 2)
    assert close(a["chi_bits"], 0.5, 1e-9) and close(a["bound_log2_mfact_bits"], 1.0, 1e-12)

    theta = 0.37
    ph = cmath.exp(1j * theta)
    u = [[ph * math.cos(0.9), -ph * math.sin(0.9)], [math.sin(0.9), math.cos(0.9)]]
    circ = pyqhe.reck(u)
    back = circ.unitary()
    err = math.sqrt(sum(abs(back[r][c] - u[r][c]) ** 2 for r in range(2) for c in range(2)))
    assert err < 1e-8 and circ.beam_splitter_count() <= 1

    # per [[a, b], [c, d]] = ad + bc
    p = pyqhe.permanent([[1, 2], [3, 4j]])
    assert close(p, 6 + 4j, 1e-12)

    hist = pyqhe.sample([0, 0], 2, 500, seed=3, circuit=bs, key=key, view="spatial")
    assert sum(hist.values()) == 500 and (1, 1) not in hist

    print("pyqhe smoke test passed")


if __name__ == "__main__":
    main()
