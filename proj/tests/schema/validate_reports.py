"""Runs every gfs subcommand on a small synthetic dataset and validates each
report against docs/schemas/report.schema.json."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema


def main() -> int:
    cli, schema_path = sys.argv[1], Path(sys.argv[2])
    schema = json.loads(schema_path.read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        data = tmp / "d"
        quick = ["--epochs", "3", "--hidden", "8", "--repeats", "2"]
        runs = {
            "synth": ["synth", "--out", data, "--nodes", "300", "--favored", "3", "--disfavored", "3",
                      "--noise", "3"],
            "tfi": ["tfi", data, "--out", tmp / "tfi.json"],
            "homophily": ["homophily", data, "--metrics", "all", "--out", tmp / "homophily.json"],
            "select": ["select", data, "--ratio", "0.4", "--out", tmp / "select.json"],
        }
        for model in ["mlp", "gcn", "gfs", "gate-soft", "gate-hard"]:
            runs[f"train-{model}"] = ["train", data, "--model", model, "--epochs", "3", "--hidden", "8",
                                      "--out", tmp / f"train-{model}.json"]
        for protocol in ["bin", "ratio-sweep", "swap", "supervision", "compare-metrics", "embed-reuse"]:
            extra = ["--bins", "3"] if protocol == "bin" else []
            extra += ["--pretrain-epochs", "3"] if protocol == "embed-reuse" else []
            runs[f"experiment-{protocol}"] = ["experiment", protocol, data, *quick, *extra,
                                              "--out", tmp / f"experiment-{protocol}.json"]

        failures = 0
        for name, args in runs.items():
            subprocess.run([cli, *map(str, args)], check=True)
            report = tmp / f"{name}.json" if name != "synth" else data / "synth.json"
            errors = sorted(validator.iter_errors(json.loads(report.read_text())), key=str)
            status = "ok" if not errors else "INVALID"
            print(f"{name}: {status}")
            for err in errors[:5]:
                print(f"  {'/'.join(map(str, err.absolute_path))}: {err.message}")
            failures += bool(errors)
        return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
