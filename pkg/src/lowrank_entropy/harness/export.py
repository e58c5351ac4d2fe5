"""CSV and JSON writers for solutions, characteristics and network weights."""
from __future__ import annotations

import csv
import json
import os

import numpy as np

from .. import entropy as en
from ..characteristics import xhat
from ..lrnr import to_json as model_to_json
from .config import ExperimentConfig
from .experiments import Pipeline, build_pipeline, solve_grid


def _write_csv(path: str, header, rows) -> str:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def export_solution(cfg: ExperimentConfig, K: int, out_dir: str, nx: int = 101, nt: int = 11,
                    pipe: Pipeline | None = None) -> str:
    res = solve_grid(cfg, K, nx, nt, pipe)
    rows = []
    for i, t in enumerate(res["t"]):
        for j, x in enumerate(res["x"]):
            rows.append((repr(float(x)), repr(float(t)), repr(float(res["u"][i, j])),
                         repr(float(res["hbar"][i, j])), repr(float(res["lrnr"][i, j]))))
    return _write_csv(os.path.join(out_dir, f"solution_K{K}.csv"),
                      ("x", "t", "u_oracle", "hbar", "lrnr"), rows)


def export_characteristics(cfg: ExperimentConfig, K: int, out_dir: str, nz: int = 201,
                           pipe: Pipeline | None = None) -> str:
    pipe = pipe or build_pipeline(cfg)
    ea = pipe.build(K)
    z = np.linspace(pipe.ext.ext_dom.lo, pipe.ext.ext_dom.hi, nz)
    rows = []
    for t in ea.t_grid:
        x0 = pipe.ext.xhat0(z, t)
        xh = xhat(pipe.ext, pipe.table, z, t)
        ch = en.chieut_eval(ea, z, t)
        rows += [(repr(float(a)), repr(float(t)), repr(float(b)), repr(float(c)), repr(float(d)))
                 for a, b, c, d in zip(z, x0, xh, ch)]
    return _write_csv(os.path.join(out_dir, f"characteristics_K{K}.csv"),
                      ("x_hat_domain_point", "t", "xhat0", "xhat", "chieut"), rows)


def export_weights(cfg: ExperimentConfig, K: int, out_dir: str, pipe: Pipeline | None = None) -> str:
    pipe = pipe or build_pipeline(cfg)
    model = en.build_5layer_lrnr(pipe.build(K))
    path = os.path.join(out_dir, f"weights_K{K}.json")
    with open(path, "w") as fh:
        json.dump(model_to_json(model), fh)
    return path


def export_lambda(cfg: ExperimentConfig, out_dir: str, pipe: Pipeline | None = None) -> str:
    pipe = pipe or build_pipeline(cfg)
    return _write_csv(os.path.join(out_dir, "lambda.csv"), ("z", "lambda"),
                      [(repr(float(a)), repr(float(b))) for a, b in zip(pipe.table.grid, pipe.table.lambda_vals)])


EXPORT_TARGETS = ("solution", "characteristics", "lambda", "weights")


def export_all(cfg: ExperimentConfig, K: int, out_dir: str | None = None,
               what=EXPORT_TARGETS) -> list[str]:
    unknown = set(what) - set(EXPORT_TARGETS)
    if unknown:
        raise ValueError(f"unknown export target(s): {sorted(unknown)}")
    out_dir = out_dir or cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    pipe = build_pipeline(cfg)
    written = []
    if "solution" in what:
        written.append(export_solution(cfg, K, out_dir, pipe=pipe))
    if "characteristics" in what:
        written.append(export_characteristics(cfg, K, out_dir, pipe=pipe))
    if "lambda" in what:
        written.append(export_lambda(cfg, out_dir, pipe=pipe))
    if "weights" in what:
        written.append(export_weights(cfg, K, out_dir, pipe=pipe))
    return written
