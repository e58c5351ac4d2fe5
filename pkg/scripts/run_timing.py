"""Cost of marched evaluation on a K x K grid as K doubles."""
import argparse

from lowrank_entropy.harness.config import load_config
from lowrank_entropy.harness.experiments import run_timing


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--K", default="32,64,128,256")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    rep = run_timing(load_config(timing_K=[int(k) for k in args.K.split(",")]), repeats=args.repeats)
    for r in rep["rows"]:
        print(f"K={r['K']:4d} best {r['seconds'] * 1e3:8.2f} ms  {r['ns_per_point']:7.0f} ns/point  "
              f"max diff {r['max_diff']:.1e}")
    print("doubling ratios", " ".join(f"{x:.2f}" for x in rep["ratios"]))
    print("PASS" if rep["passed"] else "FAIL")


if __name__ == "__main__":
    main()
