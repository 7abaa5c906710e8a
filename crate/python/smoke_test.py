"""Smoke test for the Python extension.

Build and run:
    cargo build --release -p stargen-py
    python3 python/smoke_test.py            # finds target/release/libstargen.so
"""

import importlib.machinery
import importlib.util
import json
import pathlib
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_extension():
    try:
        import stargen  # installed build

        return stargen
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libstargen.so"
        if lib.exists():
            loader = importlib.machinery.ExtensionFileLoader("stargen", str(lib))
            spec = importlib.util.spec_from_file_location("stargen", lib, loader=loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            return module
    sys.exit("libstargen.so not found; run `cargo build --release -p stargen-py` first")


def main():
    sg = load_extension()

    cfg = sg.RunConfig.preset("uhf2", depth=3, truncate=2)
    run = sg.run(cfg)
    print(run)
    assert run.all_pass, [c for c in run.checks() if not c.passed]
    assert run.n_prime == 2
    assert run.generator_norm > 0

    prod = run.checks("prod*")
    assert prod and all(c.name.startswith("prod") or c.tag.startswith("prod") for c in prod)

    blocks = run.generator()
    n = len(blocks[0][0])
    assert all(len(row) == n for row in blocks[0][0])
    eig = run.spectrum(0, 0)
    assert len(eig) == n

    report = json.loads(run.report_json())
    assert report["all_pass"] is True
    assert {name for name, _ in run.artifacts()} == {"snapshot", "scaffold", "generator"}

    with tempfile.TemporaryDirectory() as d:
        written = run.write(d)
        assert len(written) == 4
        again = sg.load_report(pathlib.Path(d) / "report.json")
        assert len(again) == len(run.checks())

    goodearl = sg.RunConfig.from_json((ROOT / "configs" / "goodearl.json").read_text())
    assert sg.run(goodearl).all_pass

    try:
        sg.RunConfig.from_json('{"system": {"preset": "uhf2"}, "depth": 3}')
    except ValueError as e:
        assert "truncate" in str(e), e
    else:
        raise AssertionError("missing field accepted")

    try:
        sg.run(sg.RunConfig.preset("goodearl", depth=2, truncate=1))
    except sg.ResourceError:
        pass
    else:
        raise AssertionError("insufficient depth accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
