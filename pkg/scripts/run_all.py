"""Run every shipped config through the CLI; artifacts land in results/<config name>/."""
import argparse
import json
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=ROOT / "results")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    status = 0
    for path in sorted((ROOT / "configs").glob("*.json")):
        command = json.loads(path.read_text())["command"]
        proc = subprocess.run([sys.executable, "-m", "omlab.cli", command, "--config", str(path),
                               "--out", str(args.out / path.stem), "--workers", str(args.workers)],
                              capture_output=True, text=True)
        print(f"[{proc.returncode}] {path.stem}: {(proc.stdout or proc.stderr).strip()}")
        status = max(status, proc.returncode)
    return status


if __name__ == "__main__":
    sys.exit(main())
