"""Runs the CLI on every bundled scenario and validates the JSON reports against the schema."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def main() -> int:
    cli, root = sys.argv[1], pathlib.Path(sys.argv[2])
    schema = json.loads((root / "schemas" / "report.schema.json").read_text())
    validator = jsonschema.Draft202012Validator(schema)
    scenarios = sorted((root / "scenarios").glob("*.json"))
    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        runs = [[cli, "verify", str(s), "--out", str(pathlib.Path(tmp) / s.name)] for s in scenarios]
        a, b = root / "scenarios" / "ddi-two-point-a.json", root / "scenarios" / "ddi-two-point-b.json"
        runs.append([cli, "ddi", str(a), str(b), "--timings", "--out", str(pathlib.Path(tmp) / "pair.json")])
        for cmd in runs:
            proc = subprocess.run(cmd, capture_output=True, text=True)
            if proc.returncode not in (0, 1):
                print(f"FAIL {cmd[2]}: exit {proc.returncode}\n{proc.stderr}")
                failures += 1
                continue
            report = json.loads(pathlib.Path(cmd[-1]).read_text())
            errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
            for e in errors:
                print(f"FAIL {cmd[-1]}: {list(e.path)}: {e.message}")
            failures += bool(errors)
            if report["summary"]["exit_code"] != proc.returncode:
                print(f"FAIL {cmd[-1]}: summary exit code {report['summary']['exit_code']} != {proc.returncode}")
                failures += 1
    print(f"{len(runs) - failures}/{len(runs)} reports valid")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
