"""Structural audit of the five-layer network for a few K."""
import argparse

from lowrank_entropy.harness.config import load_config
from lowrank_entropy.harness.experiments import run_audit


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", default="merge_two_shocks")
    ap.add_argument("--K", default="4,8,16")
    args = ap.parse_args()
    rep = run_audit(load_config(preset=args.preset, audit_K=[int(k) for k in args.K.split(",")]))
    for r in rep["rows"]:
        print(f"K={r['K']:3d} dims={r['dims']} span_rank={r['span_rank']} matrix_rank={r['matrix_rank']}")
        print(f"      affinity={r['affinity_residual']:.1e} forward_vs_hbar={r['forward_vs_hbar']:.1e} "
              f"dof={r['dof']} dof/K={r['dof_per_K']:.2f} {'ok' if r['passed'] else 'FAILED'}")
    print("PASS" if rep["passed"] else "FAIL")


if __name__ == "__main__":
    main()
