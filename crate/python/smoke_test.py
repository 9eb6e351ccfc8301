"""Smoke test for the Python bindings.

Uses an installed `macrolab` module when available; otherwise loads the
library built by
    cargo build --release -p macrolab-py --features extension-module
from the workspace target directory.
"""

import importlib.machinery
import importlib.util
import json
import math
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    try:
        import macrolab  # noqa: F401

        return sys.modules["macrolab"]
    except ImportError:
        pass
    for profile in ("release", "debug"):
        for name in ("libmacrolab_py.so", "libmacrolab_py.dylib", "macrolab_py.dll"):
            path = ROOT / "target" / profile / name
            if path.exists():
                loader = importlib.machinery.ExtensionFileLoader("macrolab", str(path))
                spec = importlib.util.spec_from_file_location("macrolab", str(path), loader=loader)
                module = importlib.util.module_from_spec(spec)
                loader.exec_module(module)
                return module
    sys.exit("macrolab extension not found; build it with cargo first")


def main():
    ml = load()
    assert ml.SCHEMA == 1

    adn = json.loads(ml.verify_adn())
    assert adn["pass"], adn["first_failure"]
    assert adn["final_determinant"] == "384*l^8*n3*(tau - I*l)^3"
    mutated = json.loads(ml.verify_adn("M+:2"))
    assert not mutated["pass"]

    suite = json.loads(ml.check_moments())
    assert suite["pass"], [e["label"] for e in suite["entries"] if not e["pass"]]
    quartic = next(e for e in suite["entries"] if e["label"] == "fact:|v_i|^4")
    assert abs(quartic["value"] - 3.0) < 1e-12

    chi = ml.chi_basis([1.0, 1.0, 1.0])
    assert abs(chi[4]) < 1e-15
    assert ml.specular_reflect([1.0, 2.0, 3.0], [1.0, 0.0, 0.0]) == [-1.0, 2.0, 3.0]
    try:
        ml.specular_reflect([1.0, 2.0, 3.0], [1.0, 1.0, 0.0])
    except ValueError:
        pass
    else:
        raise AssertionError("non-unit normal accepted")
    s = ml.sigma_at([0.5, -1.0, 2.0])
    trace = s[0][0] + s[1][1] + s[2][2]
    r = math.sqrt(0.25 + 1.0 + 4.0)
    assert abs(trace - 2.0 * math.erf(r / math.sqrt(2.0)) / r) < 1e-8

    dim, korn, poincare = ml.korn_constant("spheroid", 0)
    assert dim == 1 and korn > 0.0 and poincare > 0.0

    csv = ml.simulate_trace(shape="spheroid", steps=0).strip().splitlines()
    assert len(csv) == 2
    assert all(abs(float(x)) < 1e-12 for x in csv[1].split(",")[1:])

    est = json.loads(ml.estimate_report(horizon=0.05, snapshots=3))
    assert math.isfinite(est["l2"]["ratio"]) and math.isfinite(est["l6"]["ratio"])
    print("python smoke test: ok")


if __name__ == "__main__":
    main()
