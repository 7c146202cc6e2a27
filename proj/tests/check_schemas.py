#!/usr/bin/env python3
"""Runs the CLI on the sample data and validates every report against schemas/.

usage: check_schemas.py GCMC_BINARY SCHEMA_DIR DATA_DIR
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema
from referencing import Registry, Resource


def load_registry(schema_dir: Path) -> Registry:
    resources = []
    for p in sorted(schema_dir.glob("*.schema.json")):
        resources.append((p.name, Resource.from_contents(json.loads(p.read_text()))))
    return Registry().with_resources(resources)


def main() -> int:
    binary, schema_dir, data = sys.argv[1], Path(sys.argv[2]), Path(sys.argv[3])
    registry = load_registry(schema_dir)

    def validate(doc, schema_name: str) -> None:
        schema = registry.contents(schema_name)
        jsonschema.Draft202012Validator(schema, registry=registry).validate(doc)

    failures = 0

    def check(label, args, schema_name, expect_code=0, stream="stdout"):
        nonlocal failures
        proc = subprocess.run([binary, *args], capture_output=True, text=True)
        text = proc.stdout if stream == "stdout" else proc.stderr
        try:
            if proc.returncode != expect_code:
                raise AssertionError(f"exit {proc.returncode}, expected {expect_code}: {proc.stderr.strip()}")
            validate(json.loads(text), schema_name)
            print(f"ok    {label}")
        except Exception as exc:  # report and keep going
            failures += 1
            print(f"FAIL  {label}: {exc}")

    ends = ["--graph", str(data / "ends_graph.json"), "--dist", str(data / "ends_dist.json")]
    split = ["--graph", str(data / "split_graph.json"), "--dist", str(data / "split_dist.json")]
    path5 = ["--graph", str(data / "path5_graph.json"), "--dist", str(data / "path5_dist.json")]

    for name, schema_name in [("ends_graph.json", "graph.schema.json"), ("ends_dist.json", "distribution.schema.json"),
                              ("split_graph.json", "graph.schema.json"), ("path5_dist.json", "distribution.schema.json"),
                              ("geometric_schedule.json", "schedule_spec.schema.json"),
                              ("product_k2.json", "product_spec.schema.json")]:
        try:
            validate(json.loads((data / name).read_text()), schema_name)
            print(f"ok    input {name}")
        except Exception as exc:
            failures += 1
            print(f"FAIL  input {name}: {exc}")

    # the schemas must also reject malformed documents
    for doc, schema_name in [({"error": 1, "detail": "x"}, "error.schema.json"),
                             ({"labels": ["a"], "mass": [-0.5]}, "distribution.schema.json"),
                             ({"case": "MAYBE", "witness": {"support": ["a"]}}, "classify.schema.json"),
                             ({"kind": "practical", "blocks": [0]}, "schedule_spec.schema.json")]:
        try:
            validate(doc, schema_name)
            failures += 1
            print(f"FAIL  {schema_name} accepted {doc}")
        except jsonschema.ValidationError:
            print(f"ok    {schema_name} rejects a malformed document")

    check("classify", ["classify", *ends], "classify.schema.json")
    check("classify split", ["classify", *split], "classify.schema.json", expect_code=3)
    check("plan paper", ["plan", *ends, "--schedule", "paper"], "plan.schema.json")
    check("plan growth", ["plan", *ends, "--schedule", "growth:0.5"], "plan.schema.json")
    check("plan epsilon", ["plan", *ends, "--epsilon", "0.05"], "plan.schema.json")
    check("plan split", ["plan", *split], "plan.schema.json", expect_code=3)
    check("plan homogeneous", ["plan", *path5], "plan.schema.json")
    check("kernel", ["kernel", *ends, "--k", "4"], "kernel.schema.json")
    check("kernel path", ["kernel", *path5], "kernel.schema.json")
    check("dobrushin", ["dobrushin", *ends, "--k", "4", "--contraction-steps", "9"], "dobrushin.schema.json")
    check("simulate epsilon", ["simulate", *ends, "--epsilon", "0.05", "--steps", "5000", "--replicas", "2",
                               "--checkpoints", "10,5000"], "simulate.schema.json")
    check("simulate schedule", ["simulate", *ends, "--schedule", str(data / "geometric_schedule.json"),
                                "--steps", "5000"], "simulate.schema.json")
    check("simulate path", ["simulate", *path5, "--steps", "5000"], "simulate.schema.json")
    check("product", ["product", "--spec", str(data / "product_k2.json"), "--steps", "5000",
                      "--checkpoints", "100"], "product.schema.json")
    check("counterexample", ["counterexample", "--replicas", "20", "--steps", "1000"], "counterexample.schema.json")
    check("error simulate split", ["simulate", *split], "error.schema.json", expect_code=3, stream="stderr")
    check("error missing schedule", ["simulate", *ends], "error.schema.json", expect_code=2, stream="stderr")
    check("error usage", ["kernel", *ends, "--k", "x"], "error.schema.json", expect_code=2, stream="stderr")

    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "report.json"
        proc = subprocess.run([binary, "classify", *ends, "--out", str(out)], capture_output=True, text=True)
        try:
            assert proc.returncode == 0 and proc.stdout == ""
            validate(json.loads(out.read_text()), "classify.schema.json")
            print("ok    --out file")
        except Exception as exc:
            failures += 1
            print(f"FAIL  --out file: {exc}")

    print(f"{failures} schema failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
