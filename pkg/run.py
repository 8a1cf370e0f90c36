#!/usr/bin/env python3
"""Run the complete data generation, training and evaluation pipeline."""

import subprocess
import sys


def run_command(cmd):
    """Run a command and exit on failure."""
    print(f"Running: {cmd}")
    result = subprocess.run(cmd, shell=True)
    if result.returncode != 0:
        print(f"Failed: {cmd}")
        sys.exit(result.returncode)


if __name__ == "__main__":
    # Training and test sets come from independent seeds
    run_command(
        "python -m src.main gen-data --problem poisson1d --count 2000 --n 8 "
        "--seed 1 --out artifacts/train.bin"
    )
    run_command(
        "python -m src.main gen-data --problem poisson1d --count 500 --n 8 "
        "--seed 2 --out artifacts/test.bin"
    )

    # Desk-scale MIONet
    run_command(
        "python -m src.main train --data artifacts/train.bin --preset desk "
        "--seed 0 --out artifacts/model.bin"
    )

    # Mean relative L2 error on the held-out set
    run_command(
        "python -m src.main evaluate --model artifacts/model.bin --data artifacts/test.bin"
    )

    print("\n✅ Pipeline complete!")
