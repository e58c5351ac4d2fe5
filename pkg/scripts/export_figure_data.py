"""Write CSV and JSON data for plotting: solution grids, characteristics, shock times, weights."""
import argparse

from lowrank_entropy.harness.config import load_config
from lowrank_entropy.harness.export import EXPORT_TARGETS, export_all


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", default="merge_two_shocks")
    ap.add_argument("--K", type=int, default=16)
    ap.add_argument("--out", default="out/figures")
    ap.add_argument("--what", nargs="*", default=list(EXPORT_TARGETS), choices=list(EXPORT_TARGETS))
    args = ap.parse_args()
    for path in export_all(load_config(preset=args.preset), args.K, args.out, what=args.what):
        print(path)


if __name__ == "__main__":
    main()
