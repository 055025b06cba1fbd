"""Smoke test for the pystretchlab extension module.

Build the library first (`cargo build -p stretchlab-py --release`), then run
`python3 python/smoke_test.py`. The script copies the built shared library to a
temporary directory under the module name Python expects and imports it from
there. Set PYSTRETCHLAB_LIB to use a specific library file.
"""

import json
import math
import os
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def find_library():
    override = os.environ.get("PYSTRETCHLAB_LIB")
    if override:
        return Path(override)
    names = ["libpystretchlab.so", "libpystretchlab.dylib", "pystretchlab.dll"]
    candidates = [ROOT / "target" / profile / name for profile in ("release", "debug") for name in names]
    found = [c for c in candidates if c.exists()]
    if not found:
        sys.exit("pystretchlab library not found; run `cargo build -p stretchlab-py` first")
    return max(found, key=lambda c: c.stat().st_mtime)


def load():
    lib = find_library()
    tmp = tempfile.mkdtemp(prefix="pystretchlab-")
    suffix = ".pyd" if lib.suffix == ".dll" else ".so"
    shutil.copy(lib, Path(tmp) / ("pystretchlab" + suffix))
    sys.path.insert(0, tmp)
    import pystretchlab

    return pystretchlab


def main():
    sl = load()

    g = sl.Graph.generate(60, 0.5, 7)
    assert g.n == 60 and len(g.points()) == 60
    report = g.stretch_factor()
    assert report["defined"] and report["stretch"] >= 1.0
    oracle = g.oracle_stretch()
    assert math.isclose(report["stretch"], oracle["stretch"], rel_tol=1e-9)
    assert report["pair"] == oracle["pair"]
    again = sl.Graph.from_json(g.to_json())
    assert again.edges() == g.edges()

    square = sl.Graph.from_parts([(0, 0), (1, 0), (1, 1), (0, 1)], [(0, 1), (1, 2), (2, 3)])
    assert math.isclose(square.stretch_factor()["stretch"], 3.0)
    assert sl.Graph.from_parts([(0, 0), (1, 1)], []).stretch_factor()["stretch"] is None

    assert math.isclose(sl.disc_square_area(0.5, 0.5, 0.3), math.pi * 0.09)
    assert math.isclose(sl.disc_square_area(0.0, 0.0, 0.5), math.pi / 16)
    assert sl.prop1_lower_bound(0.5) <= sl.disc_square_area(0.0, 0.0, 0.5) + 1e-12
    try:
        sl.disc_square_area(1.5, 0.5, 0.1)
    except ValueError:
        pass
    else:
        raise AssertionError("centre outside the square must be rejected")

    assert math.isclose(sl.lemma5_bound(400, 0.9, 300.0), 0.07049003264795, rel_tol=1e-10)
    assert sl.regime_classify("one_minus_pow(2,1)") == "CRITICAL"
    assert sl.regime_classify("0.5") == "UNBOUNDED"
    assert math.isclose(sl.pick_c(1006), 20 / 1006)
    bounds = sl.evaluate_bounds(400, 0.9, 300.0)
    assert bounds["thm2_aas"]["precondition_holds"]

    trace, graph = sl.three_phase(1006, 0.9, 2.0, 3)
    assert set(["c", "A", "disc_assignment", "two_vertex_discs", "nice_discs", "lambda", "conditioning_ok"]) <= set(trace)
    if graph is not None:
        assert sl.verify_nice_implication(trace, graph) in (True, None)

    config = {
        "name": "smoke",
        "n_grid": [40, 80],
        "p_expr": "one_minus_pow(2,1)",
        "trials": 20,
        "master_seed": 1,
        "lambda_grid": [1.5, 3.0],
    }
    result = sl.run_experiment(config)
    assert len(result["records"]) == 40
    assert result == sl.run_experiment(json.dumps(config))
    report = sl.compare_to_bounds(result["summary"], config)
    assert report["violations"] == 0
    for row in result["summary"]["rows"]:
        assert row["q10_con"] <= row["q50_con"] <= row["q90_con"]

    stat, pvalue = sl.ks_two_sample([0.1, 0.2, 0.3], [0.1, 0.2, 0.3])
    assert stat == 0.0 and pvalue == 1.0

    print("pystretchlab smoke test passed")


if __name__ == "__main__":
    main()
