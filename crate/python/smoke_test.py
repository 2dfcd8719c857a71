"""Smoke test for the Python bindings.

Uses an installed `ultrametric` module if there is one (for example after
`maturin develop -m crates/py/Cargo.toml`). Otherwise it loads the library
produced by `cargo build -p ultrametric-py --features extension-module`.
"""

import importlib.machinery
import importlib.util
import json
import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    try:
        import ultrametric

        return ultrametric
    except ImportError:
        pass
    for profile in ("release", "debug"):
        for name in ("libultrametric_py.so", "libultrametric_py.dylib", "ultrametric_py.dll"):
            path = ROOT / "target" / profile / name
            if path.exists():
                loader = importlib.machinery.ExtensionFileLoader("ultrametric", str(path))
                spec = importlib.util.spec_from_file_location("ultrametric", path, loader=loader)
                module = importlib.util.module_from_spec(spec)
                loader.exec_module(module)
                return module
    sys.exit("ultrametric extension not found; build it with "
             "`cargo build -p ultrametric-py --features extension-module`")


def main():
    um = load()

    x = um.Space([[0, 1, 2], [1, 0, 2], [2, 2, 0]])
    assert x.is_ultrametric()
    assert x.diameter() == 2
    assert um.validate([[0, 3, 1], [3, 0, 2], [1, 2, 0]])["verdict"] == "NotPseudoultrametric"

    y = um.Space([[0, 7, 7], [7, 0, 5], [7, 5, 0]], labels=["y1", "y2", "y3"])
    found = um.find_weak_similarities(x, y)
    assert len(found) == 2
    print("weak similarity:", found[0]["phi"], found[0]["psi"])

    base = {"points": ["0"], "sequences": [{"family": "PowerDecreasing", "a": "0", "b": "1", "k": 2}]}
    scaling = {"base": base, "point_images": {"0": "0"},
               "sequence_images": [{"alpha": "1", "beta": "1", "k": 1}]}
    g = um.extend(json.dumps(scaling), "strict", at=[Fraction(1, 2), 1])
    assert g["values"] == [Fraction(5, 3), 2], g
    print("strict extension at 1/2 and 1:", g["values"])

    shifted = {"points": ["0"], "sequences": [{"family": "PowerDecreasing", "a": "1", "b": "1", "k": 1}]}
    regime = um.DistanceSet.from_json(json.dumps(shifted)).classify()
    assert regime == {"tag": "UltraBlocked", "witness": "(0,1]"}, regime
    print("regime:", regime)

    s = um.random_space(6, seed=7)
    assert s.is_ultrametric() and len(s) == 6
    print("ok")


if __name__ == "__main__":
    main()
