"""Convergence study of h_bar against the exact solution, printed as a table.

    python3 scripts/run_convergence.py [--preset merge_two_shocks] [--K 16,32,64]
"""
import argparse

from lowrank_entropy.harness.config import load_config
from lowrank_entropy.harness.experiments import run_classical_convergence, run_convergence


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="merge_two_shocks")
    ap.add_argument("--K", default="16,32,64,128,256")
    ap.add_argument("--classical", action="store_true", help="use the two-layer builder (smooth data)")
    args = ap.parse_args()
    Ks = [int(k) for k in args.K.split(",")]
    if args.classical:
        rep = run_classical_convergence(load_config(preset=args.preset, classical_K=Ks))
        print(f"{'K':>5} {'L1 sup':>11} {'depth':>5} {'rank':>4} {'dof':>6}")
        for r in rep["rows"]:
            print(f"{r['K']:5d} {r['l1_sup']:11.4e} {r['depth']:5d} {r['rank']:4d} {r['dof']:6d}")
    else:
        rep = run_convergence(load_config(preset=args.preset, K_list=Ks))
        print(f"{'K':>5} {'L1 sup':>11} {'budget':>11} {'network L1':>11} {'relu':>6} {'build s':>8}")
        for r in rep["rows"]:
            net = "-" if r["lrnr_l1"] is None else f"{r['lrnr_l1']:.4e}"
            print(f"{r['K']:5d} {r['l1_sup']:11.4e} {r['budget']:11.4e} {net:>11} {r['relu_terms']:6d} {r['build_s']:8.2f}")
    slope = "NA" if rep["slope"] is None else f"{rep['slope']:.3f}"
    print(f"fitted slope {slope}; {'PASS' if rep['passed'] else 'FAIL'}")


if __name__ == "__main__":
    main()
