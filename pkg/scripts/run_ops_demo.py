"""Run the nine-operation demo and print the decoded answer of each operation."""
import sys

from ca3cam.testbench import result_value, run_operation_demo


def main() -> int:
    raster, verdict = run_operation_demo()
    for r in verdict.results:
        print(f"{r.start:3d}  {r.kind:<18} -> {sorted(result_value(r))}")
    print(f"{len(raster)} spikes in {verdict.elapsed * 1000:.1f} ms; "
          f"{'matches' if verdict.passed else 'DIFFERS FROM'} the golden timeline")
    for m in verdict.mismatches:
        print("  " + m)
    return 0 if verdict.passed else 1


if __name__ == "__main__":
    sys.exit(main())
