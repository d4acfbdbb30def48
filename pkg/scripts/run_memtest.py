"""Three-sweep memory test; prints the recall tables of sweeps 1 and 3."""
import argparse
import sys

from ca3cam.cam import CamConfig
from ca3cam.testbench import run_memtest


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cues", type=int, default=5)
    ap.add_argument("--cont", type=int, default=10)
    args = ap.parse_args()
    report = run_memtest(CamConfig(args.cues, args.cont))
    for sweep in (1, 3):
        print(f"sweep {sweep}")
        for kind, arg, got in report.recall_table(sweep):
            print(f"  {kind:<18} {arg:<16} -> {sorted(got)}")
    print(f"{report.operations} operations, {report.forgetting_learns} forgetting learns, "
          f"{report.total_steps} steps, sweep3==sweep1: {report.sweep3_equals_sweep1}")
    print("PASS" if report.passed else "FAIL")
    for m in report.mismatches:
        print("  " + m)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
