"""Random operation streams checked against the dictionary oracle."""
import argparse
import sys
import time

from ca3cam.cam import CamConfig
from ca3cam.testbench import run_random_stress


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--ops", type=int, default=1000)
    ap.add_argument("--cues", type=int, default=32)
    ap.add_argument("--cont", type=int, default=32)
    args = ap.parse_args()
    config = CamConfig(args.cues, args.cont)
    t0 = time.perf_counter()
    bad = 0
    for seed in range(args.seeds):
        report = run_random_stress(seed, args.ops, config)
        status = "ok" if report.passed else report.divergences[0]
        print(f"seed {seed:3d}: {report.elapsed:5.2f} s  {status}")
        bad += not report.passed
    print(f"{args.seeds - bad}/{args.seeds} seeds clean in {time.perf_counter() - t0:.1f} s")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
