"""Command-line entry point: ``lowrank-entropy <command> [options]``.

Exit status is 0 when a command succeeds and its checks pass, 2 when it runs
but a check fails, and 1 on bad input or any other error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .. import entropy as en
from ..errors import LowRankEntropyError
from ..presets import PRESET_NAMES
from .config import load_config
from .experiments import (build_pipeline, run_audit, run_classical_convergence, run_convergence,
                          run_timing)
from .export import EXPORT_TARGETS, export_all

log = logging.getLogger("lowrank_entropy")


def _ints(s: str) -> list[int]:
    return [int(v) for v in s.split(",") if v]


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--preset", choices=PRESET_NAMES)
    common.add_argument("--flux", help="burgers, quartic, cosh or a JSON flux object")
    common.add_argument("--T", type=float, dest="T")
    common.add_argument("--out", dest="out_dir")
    common.add_argument("--seed", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="lowrank-entropy", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="evaluate h_bar and the oracle at (x, t)")
    s.add_argument("--K", type=int, default=64)
    s.add_argument("--x", type=float, nargs="+", required=True)
    s.add_argument("--t", type=float, required=True)

    s = sub.add_parser("convergence", parents=[common], help="L1 error against the oracle per K")
    s.add_argument("--K", type=_ints, dest="K_list")
    s.add_argument("--builder", choices=("entropy", "classical"), default="entropy")

    s = sub.add_parser("audit", parents=[common], help="depth, ranks and dof of the 5-layer network")
    s.add_argument("--K", type=_ints, dest="audit_K")

    s = sub.add_parser("timing", parents=[common], help="time-marching cost as K doubles")
    s.add_argument("--K", type=_ints, dest="timing_K")

    s = sub.add_parser("export", parents=[common], help="write CSV and weight files")
    s.add_argument("--K", type=int, default=32)
    s.add_argument("--what", nargs="+", choices=EXPORT_TARGETS, default=list(EXPORT_TARGETS))

    sub.add_parser("inspect", parents=[common], help="print the extended data and shock-time table")
    return p


def _overrides(ns) -> dict:
    keys = ("preset", "flux", "T", "out_dir", "seed", "K_list", "audit_K", "timing_K")
    ov = {k: getattr(ns, k, None) for k in keys}
    if ov["flux"] and ov["flux"].lstrip().startswith("{"):
        ov["flux"] = json.loads(ov["flux"])
    if getattr(ns, "builder", None) == "classical" and ov.pop("K_list", None):
        ov["classical_K"] = ns.K_list
    return ov


def _dump(obj, path=None):
    text = json.dumps(obj, indent=2, default=float)
    print(text)
    if path:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text)


def _run(ns) -> int:
    cfg = load_config(ns.config, **_overrides(ns))
    out = cfg.out_dir
    if ns.command == "solve":
        pipe = build_pipeline(cfg)
        ea = pipe.build(ns.K)
        x = np.asarray(ns.x)
        u = pipe.oracle.solution(x, ns.t) if ns.t > 0 else pipe.u0(x, side="right")
        _dump({"x": x.tolist(), "t": ns.t, "K": ns.K,
               "hbar": np.atleast_1d(en.hbar_eval(ea, x, ns.t)).tolist(),
               "u_oracle": np.atleast_1d(u).tolist()})
        return 0
    if ns.command == "convergence":
        res = run_classical_convergence(cfg) if ns.builder == "classical" else run_convergence(cfg)
        _dump(res, os.path.join(out, f"convergence_{res['builder']}.json"))
        return 0 if res["passed"] else 2
    if ns.command == "audit":
        res = run_audit(cfg)
        _dump(res, os.path.join(out, "audit.json"))
        return 0 if res["passed"] else 2
    if ns.command == "timing":
        res = run_timing(cfg)
        _dump(res, os.path.join(out, "timing.json"))
        return 0 if res["passed"] else 2
    if ns.command == "export":
        _dump({"written": export_all(cfg, ns.K, what=ns.what)})
        return 0
    if ns.command == "inspect":
        pipe = build_pipeline(cfg)
        _dump({"config": cfg.to_json(), "extended": pipe.ext.to_json(),
               "shock_times": pipe.table.to_json()})
        return 0
    raise AssertionError(ns.command)


def main(argv=None) -> int:
    try:
        ns = _parser().parse_args(argv)
    except SystemExit as exc:  # usage errors are operational, not failed checks
        return 0 if exc.code in (0, None) else 1
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return _run(ns)
    except (LowRankEntropyError, ValueError, KeyError, OSError) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
