"""Runs each CLI subcommand once and validates its JSON output against schemas/."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema
from referencing import Registry, Resource


def load_registry(schema_dir):
    schemas = {}
    for path in sorted(schema_dir.glob("*.schema.json")):
        schemas[path.name] = json.loads(path.read_text())
    registry = Registry().with_resources(
        (name, Resource.from_contents(doc)) for name, doc in schemas.items()
    )
    return schemas, registry


def run(cli, *args):
    proc = subprocess.run([cli, *map(str, args)], capture_output=True, text=True)
    if proc.returncode != 0:
        sys.exit(f"{' '.join(map(str, args))} exited {proc.returncode}\n{proc.stderr}")
    return proc.stdout


def main():
    cli, schema_dir = sys.argv[1], pathlib.Path(sys.argv[2])
    schemas, registry = load_registry(schema_dir)

    def check(doc, name):
        validator = jsonschema.Draft202012Validator(schemas[name], registry=registry)
        errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
        for e in errors:
            print(f"{name}: {'/'.join(map(str, e.path))}: {e.message}")
        if errors:
            sys.exit(1)
        print(f"ok {name}")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        run(cli, "gen-graph", "--model", "ba", "--n", "200", "--m", "2", "--out", tmp / "g.csv")
        check(json.loads(run(cli, "graph-stats", "--edges", tmp / "g.csv")), "graph_stats.schema.json")

        sim = tmp / "sim"
        run(cli, "simulate", "--n", "300", "--lambda", "2", "--delta", "1", "--drop-fraction", "0.2",
            "--truth-sims", "1000", "--out", sim)
        check(json.loads((sim / "sim.json").read_text()), "sim.schema.json")

        report = json.loads(run(cli, "estimate", "--edges", sim / "edges.csv",
                                "--outcomes", sim / "outcomes.csv",
                                "--covariates", sim / "covariates.csv", "--alpha", "0.01"))
        check(report, "diffusion_report.schema.json")
        report = json.loads(run(cli, "estimate", "--edges", sim / "edges.csv",
                                "--outcomes", sim / "outcomes.csv",
                                "--covariates", sim / "covariates.csv",
                                "--y0-model", "constant", "--variant", "plain", "--no-model"))
        check(report, "diffusion_report.schema.json")

        (tmp / "grid.json").write_text(json.dumps({
            "defaults": {"n": 150, "reps": 20, "truth_sims": 500, "alphas": [0.05, 0.01]},
            "cells": [{"id": "v", "lambda": 1, "delta": 1}],
        }))
        run(cli, "mc", "--config", tmp / "grid.json", "--out", tmp / "mc", "--quiet")
        check(json.loads((tmp / "mc" / "v.json").read_text()), "mc_report.schema.json")


if __name__ == "__main__":
    main()
