"""Smoke test for the bellsphere_py extension.

Build first with `cargo build --release -p bellsphere-py`. The script looks
for the shared library under target/release unless BELLSPHERE_PY_LIB is set.
"""

import importlib.machinery
import importlib.util
import math
import os
import sys
from pathlib import Path


def load():
    root = Path(__file__).resolve().parent.parent
    default = root / "target" / "release" / (
        "libbellsphere_py.dylib" if sys.platform == "darwin" else "libbellsphere_py.so"
    )
    path = Path(os.environ.get("BELLSPHERE_PY_LIB", default))
    loader = importlib.machinery.ExtensionFileLoader("bellsphere_py", str(path))
    spec = importlib.util.spec_from_file_location("bellsphere_py", path, loader=loader)
    module = importlib.util.module_from_spec(spec)
    loader.exec_module(module)
    return module


def close(a, b, tol=1e-12):
    assert abs(a - b) <= tol, (a, b)


def main():
    bs = load()
    pi = math.pi

    close(bs.project((0.0, 0.0, 1.0), pi / 3), 0.5)
    close(bs.separation(0.0, 3 * pi / 2), pi / 2)
    close(bs.e_closed("direct", 0.0, 0.0), -1 / 3)
    close(bs.e_closed("sign", 0.0, pi / 4), -1 / 8)
    close(bs.e_closed("stochastic", 0.0, 0.0), -1 / 16)
    close(bs.e_closed("ensemble", 0.0, pi / 4), -math.sqrt(2) / 8)
    close(bs.enumerate_pointlike_e("sign", 1.0), bs.e_closed("sign", 0.0, 1.0))
    close(bs.enumerate_ensemble_e(1.0), bs.e_closed("ensemble", 0.0, 1.0))
    close(sum(bs.lune_probability(k, kp, 0.7) for k in (0.5, -0.5) for kp in (0.5, -0.5)), 1.0)
    close(bs.mean_projection((0.0, 1), pi / 3), 0.25)

    quad = [0.0, pi / 4, pi / 2, 3 * pi / 4]
    r = bs.chsh("ensemble", quad)
    close(r["c"], 2 * math.sqrt(2), 1e-9)
    assert r["violated"]
    mc = bs.chsh("ensemble", quad, trials=200_000, seed=3)
    assert mc["c"] - 3 * mc["std_err"] > 2, mc

    best = bs.sweep_chsh("direct", pi / 8)
    close(best["c"], 2 * math.sqrt(2) / 3, 1e-9)
    assert not best["violated"]

    feasible, y = bs.fine_feasible(bs.chsh_correlations("ensemble", quad))
    assert not feasible and len(y) == 13
    feasible, p = bs.fine_feasible(bs.chsh_correlations("sign", quad))
    assert feasible and abs(sum(p) - 1) < 1e-9

    rec = bs.estimate_correlation("sign", 0.0, pi / 2, 200_000, seed=5)
    assert abs(rec["z_score"]) <= 5, rec
    a = bs.estimate_correlation("ensemble", 0.0, 1.0, 100_000, seed=9, workers=1)
    b = bs.estimate_correlation("ensemble", 0.0, 1.0, 100_000, seed=9, workers=4)
    assert a == b

    close(bs.sequence_tree_mean([pi / 3, 2 * pi / 3], (0.0, 1)), 0.125)
    close(bs.sequence_tree_mean([2 * pi / 3, pi / 3], (0.0, 1)), -0.125)

    rng = bs.RngStream(1, 0)
    j = rng.sample((0.5, -1))
    close(sum(x * x for x in j), 1.0)
    assert bs.project(tuple(j), 0.5) <= 0
    out, post = rng.measure(0.0)
    assert out in (0.5, -0.5) and post[1] == (1 if out > 0 else -1)

    try:
        bs.e_closed("bogus", 0.0, 0.0)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown model accepted")

    print("bellsphere_py smoke test passed")


if __name__ == "__main__":
    main()
