"""Runs the CLI on a tiny synthetic dataset and validates report.json against the schema."""
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
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        subprocess.run([cli, "synth", "--n", "60", "--k", "3", "--dims", "8,6,5", "--out", str(tmp / "data")],
                       check=True, stdout=subprocess.DEVNULL)
        for extra in ([], ["--encoder", "force-gat", "--gcn-output", "softmax", "--nmi", "arithmetic"]):
            out = tmp / ("run" + str(len(extra)))
            subprocess.run([cli, "run", "--manifest", str(tmp / "data" / "manifest.json"), "--rates", "0.2,0.2,0.1",
                            "--seeds", "0..1", "--e-rounds", "2", "--pretrain-epochs", "5", "--no-embeddings",
                            "--out", str(out), *extra], check=True, stdout=subprocess.DEVNULL)
            for report in sorted(out.glob("seed_*/report.json")):
                jsonschema.validate(json.loads(report.read_text()), schema)
                print("valid:", report.relative_to(tmp))
    return 0


if __name__ == "__main__":
    sys.exit(main())
