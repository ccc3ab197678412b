#!/usr/bin/env python3
"""Smoke test for the isoadams Python bindings.

Builds the extension with cargo (unless --no-build), loads it, and checks a
few known answers. Exits non-zero on the first failure.

    python3 python/smoke_test.py [--release] [--no-build]
"""

import argparse
import csv
import importlib.machinery
import importlib.util
import io
import json
import pathlib
import subprocess
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_extension(profile: str, build: bool):
    if build:
        cmd = ["cargo", "build", "-p", "isoadams-python"]
        if profile == "release":
            cmd.append("--release")
        subprocess.run(cmd, cwd=ROOT, check=True)
    lib = ROOT / "target" / profile / "libisoadams_py.so"
    if not lib.exists():
        sys.exit(f"extension not found at {lib}; build with: cargo build -p isoadams-python")
    loader = importlib.machinery.ExtensionFileLoader("isoadams_py", str(lib))
    spec = importlib.util.spec_from_file_location("isoadams_py", lib, loader=loader)
    module = importlib.util.module_from_spec(spec)
    loader.exec_module(module)
    return module


def check(label, got, want):
    if got != want:
        sys.exit(f"FAIL {label}: got {got!r}, want {want!r}")
    print(f"ok   {label}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--release", action="store_true", help="use the release build")
    parser.add_argument("--no-build", action="store_true", help="do not invoke cargo")
    args = parser.parse_args()
    ia = load_extension("release" if args.release else "debug", not args.no_build)

    check("Q0 * P(1)", ia.multiply("Q0", "P(1)"), "P(1) Q0 + Q1")
    check("Sq1 * Sq1", ia.multiply("Sq1", "Sq1", flavor="classical"), "0")
    check("P(1) * P(2)", ia.multiply("P(1)", "P(2)"), "P(3)")
    try:
        ia.multiply("Q0", "P(1,")
        sys.exit("FAIL parse error not raised")
    except ValueError as e:
        check("parse error reports position", "position 4" in str(e), True)

    rows = list(csv.DictReader(io.StringIO(ia.ext_chart("classical", smax=8, tmax=12))))
    check("chart header", list(rows[0].keys()), ["s", "t", "u", "dim"])
    cells = {(int(r["s"]), int(r["t"])): int(r["dim"]) for r in rows}
    check("h0..h3 in Ext^1", [cells.get((1, 2**i), 0) for i in range(4)], [1, 1, 1, 1])
    check("tmax 0 chart", ia.ext_chart("classical", tmax=0), "s,t,u,dim\n0,0,,1\n")

    g = list(csv.DictReader(io.StringIO(ia.ext_chart("G", smax=6, tmax=24))))
    check("G chart on t = 2u", all(int(r["t"]) == 2 * int(r["u"]) for r in g), True)

    chart = json.loads(ia.ext_chart("classical", smax=4, tmax=12, format="json"))
    check("named classes", {"h0", "h1", "h2", "h3"} <= {c["name"] for c in chart["classes"]}, True)
    try:
        import jsonschema
    except ImportError:
        print("skip JSON schema validation (jsonschema not installed)")
    else:
        schema = json.loads((ROOT / "docs" / "chart.schema.json").read_text())
        jsonschema.validate(chart, schema)
        jsonschema.validate(json.loads(ia.ext_chart("isotropic", smax=3, tmax=12, format="json")), schema)
        check("charts match docs/chart.schema.json", True, True)

    check("<h0,h1,h0>", ia.massey("h0", "h1", "h0"), ("h1^2", []))
    check("<h1,h0,h1>", ia.massey("h1", "h0", "h1"), ("h0h2", []))
    try:
        ia.massey("h0", "h0", "h1")
        sys.exit("FAIL undefined bracket accepted")
    except RuntimeError:
        check("<h0,h0,h1> undefined", True, True)

    classical = ia.ext_chart("classical", smax=6, tmax=12)
    check("doubling comparison", ia.compare(classical, ia.ext_chart("G", smax=6, tmax=24), "doubling"), [])
    perturbed = classical.replace("\n1,8,,1\n", "\n1,8,,2\n")
    check("perturbed chart", len(ia.compare(classical, perturbed)), 1)

    report = json.loads(ia.isotropic_report(smax=6, tmax=28))
    check("isotropic report", (report["matched"], report["ambiguity"]), (True, None))
    print("all smoke tests passed")


if __name__ == "__main__":
    main()
