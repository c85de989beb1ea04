"""
Driving everything from the command line
========================================

Generates a small synthetic pair of domains, fits and evaluates a model,
then runs the ablation ladder, all through the ``udapipe`` command.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

work = Path(tempfile.mkdtemp())
(work / "spec.json").write_text(json.dumps({"n_source": 500, "n_target": 500, "seed": 7}))


def udapipe(*args):
    cmd = [sys.executable, "-m", "udapipe.cli", *args]
    print("$ udapipe", " ".join(args))
    proc = subprocess.run(cmd, cwd=work, capture_output=True, text=True)
    print(proc.stdout, end="")
    print("exit code", proc.returncode)


udapipe("synth", "--spec", "spec.json", "--source-out", "source.csv",
        "--target-train-out", "adapt.csv", "--target-test-out", "test.csv")
udapipe("fit", "--source", "source.csv", "--target", "adapt.csv", "--model-out", "model.json",
        "--k-select", "32", "--n-components", "16")
udapipe("eval", "--model", "model.json", "--test", "test.csv", "--report-out", "report.json")
udapipe("ablate", "--source", "source.csv", "--target", "adapt.csv", "--test", "test.csv",
        "--report-out", "ablation.json", "--k-select", "32", "--n-components", "16")
# a bad flag value is a validation error: exit code 2, nothing written
udapipe("split", "--input", "source.csv", "--train-out", "a.csv", "--test-out", "b.csv", "--ratio", "1.0")
print("files:", sorted(p.name for p in work.iterdir()))
