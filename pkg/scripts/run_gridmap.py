"""Record a grid of cell states and query it by state."""
import argparse

from ca3cam.gridmap import STATES, reference_scenario, run_scenario


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("scenario", nargs="?", help="scenario file; default is the built-in 4x4 map")
    args = ap.parse_args()
    result = run_scenario(args.scenario or reference_scenario())
    g = result.grid
    for y in range(g.height):
        row = [result.state_map.get(y * g.width + x) for x in range(g.width)]
        print("  ".join(f"{'-' if s is None else STATES[s]:<8}" for s in row))
    print(f"observations done at step {result.observations_done}")
    for a in result.answers:
        names = ", ".join(STATES[s] for s in sorted(a.states))
        print(f"{names:<24} -> {sorted(a.positions)} (step {a.answer_step})")


if __name__ == "__main__":
    main()
