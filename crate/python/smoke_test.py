"""Smoke test for the `shannon` extension module.

Build and run from the repository root:

    cargo build --release -p shannon-py --features extension-module
    python3 python/smoke_test.py

The script copies target/release/libshannon.so (or .dylib) next to itself
as shannon.so unless `shannon` is already importable.
"""

import json
import pathlib
import shutil
import sys

HERE = pathlib.Path(__file__).resolve().parent
ROOT = HERE.parent
CORPUS = ROOT / "corpus"


def load():
    try:
        import shannon
        return shannon
    except ImportError:
        pass
    for name in ("libshannon.so", "libshannon.dylib"):
        built = ROOT / "target" / "release" / name
        if built.exists():
            shutil.copy(built, HERE / "shannon.so")
            break
    else:
        sys.exit("build the extension first: cargo build --release -p shannon-py --features extension-module")
    sys.path.insert(0, str(HERE))
    import shannon
    return shannon


def inside(e, x):
    return float(e["lo_decimal"]) <= x <= float(e["hi_decimal"])


def main():
    sh = load()
    sinc = (CORPUS / "sinc.shn").read_text()
    delta = (CORPUS / "delta.shn").read_text()

    canon = sh.validate(sinc)
    assert sh.validate(canon) == canon

    try:
        sh.validate((CORPUS / "unbalanced.shn").read_text())
        raise AssertionError("unbalanced document accepted")
    except sh.ParseError as e:
        assert "3:1" in str(e)

    doc, report = sh.compile(sinc, "sample")
    assert "space lp;" in doc and json.loads(report)["shift"] == 0

    try:
        sh.compile((CORPUS / "delta-inf.shn").read_text(), "interpolate")
        raise AssertionError("interpolation on l^inf accepted")
    except sh.UnsupportedExponent:
        pass

    p3 = delta.replace("p 2;", "p 3;")
    try:
        sh.compile(p3, "interpolate")
        raise AssertionError("missing constant not reported")
    except sh.MissingConstant:
        pass
    _, report = sh.compile(p3, "interpolate", (CORPUS / "constants.toml").read_text())
    assert json.loads(report)["shift"] == 2

    assert sh.roundtrip(delta, depth=4)

    assert inside(sh.norm(sinc), 1.0)
    tent = sh.norm((CORPUS / "tent.shn").read_text(), precision=16)
    assert inside(tent, (5 / 3) ** 0.5)

    g = sh.g_witness(1)
    assert g["value_is_one"] and g["sample_below_1_over_n"] and g["c_above_log2n_over_4"]

    q = sh.q_witness(64, 10)
    assert q["inside"] and q["sample_l1"] == "2"

    ok, text = sh.verify("refusal", fuzz=5)
    assert ok, text

    assert sh.run_machine((CORPUS / "halt37.tm").read_text(), 37)
    assert not sh.run_machine((CORPUS / "loop.tm").read_text(), 1000)

    print("python smoke test passed")


if __name__ == "__main__":
    main()
