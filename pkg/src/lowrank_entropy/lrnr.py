"""ReLU networks whose layer weights are short sums of structured rank-1
factors with coefficients affine in a scalar parameter t.

Factor kinds (uL of length m1, uR of length m2):
    kron     uL (x) uR            -> (m1*m2) x 1 column, or m1 x m2 when the
                                     layer shape asks for it
    kron_dR  uL (x) diag(uR)      -> (m1*m2) x m2
    kron_dL  diag(uL) (x) uR^T    -> m1 x (m1*m2)
Bias factors always materialise to the flat vector kron(uL, uR).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import CapExceeded, ShapeMismatch

KINDS = ("kron", "kron_dL", "kron_dR")
DENSE_CAP = 4096


@dataclass(frozen=True)
class ArchSpec:
    dims: tuple

    def __post_init__(self):
        d = tuple(int(v) for v in self.dims)
        if len(d) < 2 or min(d) < 1:
            raise ValueError("dims must have length >= 2 and entries >= 1")
        if d[0] != 1 or d[-1] != 1:
            raise ValueError("input and output dimensions must be one")
        object.__setattr__(self, "dims", d)

    @property
    def depth(self) -> int:
        return len(self.dims) - 1

    @property
    def width(self) -> int:
        return max(self.dims)


@dataclass(frozen=True, eq=False)
class Rank1Factor:
    uL: np.ndarray
    uR: np.ndarray
    kind: str = "kron"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown factor kind {self.kind!r}")
        object.__setattr__(self, "uL", np.asarray(self.uL, dtype=float).reshape(-1))
        object.__setattr__(self, "uR", np.asarray(self.uR, dtype=float).reshape(-1))

    def shape(self, as_bias: bool = False) -> tuple:
        m1, m2 = self.uL.size, self.uR.size
        if as_bias:
            return (m1 * m2,)
        if self.kind == "kron_dR":
            return (m1 * m2, m2)
        if self.kind == "kron_dL":
            return (m1, m1 * m2)
        return (m1, m2)

    def dense(self, shape=None) -> np.ndarray:
        if self.kind == "kron_dR":
            M = np.kron(self.uL[:, None], np.diag(self.uR))
        elif self.kind == "kron_dL":
            M = np.kron(np.diag(self.uL), self.uR[None, :])
        else:
            M = np.outer(self.uL, self.uR)
        if shape is not None and M.shape != tuple(shape):
            if M.size == int(np.prod(shape)):
                M = M.reshape(shape)
            else:
                raise ShapeMismatch(f"factor shape {M.shape} does not fit {shape}")
        return M

    def bias(self) -> np.ndarray:
        return np.kron(self.uL, self.uR)

    def apply(self, V: np.ndarray, shape) -> np.ndarray:
        """Rows of V (P x n_in) mapped by the materialised factor, without building it."""
        m1, m2 = self.uL.size, self.uR.size
        if self.kind == "kron_dR":
            if V.shape[1] != m2:
                raise ShapeMismatch("kron_dR input width mismatch")
            return (self.uL[None, :, None] * (V * self.uR[None, :])[:, None, :]).reshape(V.shape[0], -1)
        if self.kind == "kron_dL":
            if V.shape[1] != m1 * m2:
                raise ShapeMismatch("kron_dL input width mismatch")
            return self.uL[None, :] * (V.reshape(V.shape[0], m1, m2) @ self.uR)
        M = self.dense(shape)
        return V @ M.T


@dataclass(frozen=True)
class CoeffSchedule:
    a: float = 1.0
    b: float = 0.0

    def __call__(self, t):
        return self.a + self.b * np.asarray(t, dtype=float)


@dataclass(frozen=True, eq=False)
class LowRankLayer:
    n_out: int
    n_in: int
    weight_factors: tuple = ()
    bias_factors: tuple = ()
    sparse_entries: tuple = ()  # ((row, col), CoeffSchedule)

    def __post_init__(self):
        for f, _ in self.weight_factors:
            r, c = f.shape()
            if r * c != self.n_out * self.n_in or (f.kind != "kron" and (r, c) != self.shape):
                raise ShapeMismatch("weight factor does not match layer shape")
        for f, _ in self.bias_factors:
            if f.bias().size != self.n_out:
                raise ShapeMismatch("bias factor does not match layer width")

    @property
    def shape(self):
        return (self.n_out, self.n_in)

    def materialize(self, t: float):
        W = np.zeros(self.shape)
        for f, s in self.weight_factors:
            W += float(s(t)) * f.dense(self.shape)
        for (i, j), s in self.sparse_entries:
            W[i, j] += float(s(t))
        B = np.zeros(self.n_out)
        for f, s in self.bias_factors:
            B += float(s(t)) * f.bias()
        return W, B

    def apply(self, V: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Structured pre-activation for a batch: rows of V paired with entries of t."""
        out = np.zeros((V.shape[0], self.n_out))
        for f, s in self.weight_factors:
            out += s(t)[:, None] * f.apply(V, self.shape)
        for (i, j), s in self.sparse_entries:
            out[:, i] += s(t) * V[:, j]
        for f, s in self.bias_factors:
            out += s(t)[:, None] * f.bias()[None, :]
        return out


@dataclass(frozen=True, eq=False)
class LRNRModel:
    arch: ArchSpec
    layers: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.layers) != self.arch.depth:
            raise ShapeMismatch("layer count differs from depth")
        for l, (a, b) in enumerate(zip(self.arch.dims[:-1], self.arch.dims[1:])):
            if self.layers[l].shape != (b, a):
                raise ShapeMismatch(f"layer {l + 1} has shape {self.layers[l].shape}, expected {(b, a)}")

    @property
    def depth(self) -> int:
        return self.arch.depth

    @property
    def rank(self) -> int:
        return max(max(len(L.weight_factors), len(L.bias_factors)) for L in self.layers)


def _batch(x, t):
    x = np.asarray(x, dtype=float)
    x, t = np.broadcast_arrays(x, np.asarray(t, dtype=float))
    return x.reshape(-1), t.reshape(-1), x.shape


def forward(model: LRNRModel, x, t):
    """Structured evaluation; never materialises the block-structured matrices."""
    xf, tf, shape = _batch(x, t)
    L = len(model.layers)
    chunk = max(1, int(4e6 // model.arch.width))
    res = np.empty(xf.shape)
    for s in range(0, xf.size, chunk):
        V = xf[s:s + chunk, None]
        tc = tf[s:s + chunk]
        for l, layer in enumerate(model.layers):
            V = layer.apply(V, tc)
            if l < L - 1:
                V = np.maximum(V, 0.0)
        res[s:s + chunk] = V[:, 0]
    out = res.reshape(shape)
    return float(out) if out.ndim == 0 else out


def forward_dense(model: LRNRModel, x, t):
    """Reference evaluation through materialised matrices, grouped by distinct t."""
    if model.arch.width > DENSE_CAP:
        raise CapExceeded(f"width {model.arch.width} exceeds the dense cap {DENSE_CAP}")
    xf, tf, shape = _batch(x, t)
    out = np.empty(xf.shape)
    for tv in np.unique(tf):
        sel = tf == tv
        V = xf[sel][None, :]
        for l, layer in enumerate(model.layers):
            W, B = layer.materialize(tv)
            V = W @ V + B[:, None]
            if l < len(model.layers) - 1:
                V = np.maximum(V, 0.0)
        out[sel] = V[0]
    out = out.reshape(shape)
    return float(out) if out.ndim == 0 else out


def _num_rank(M: np.ndarray, rtol: float = 1e-9) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def layer_rank(model: LRNRModel, l: int, t_samples=(0.0, 1.0), mode: str = "matrix") -> int:
    """Numerical rank of layer l (1-based).

    mode="matrix": SVD rank of W(t), maximised over t_samples.
    mode="span":   dimension of span{W(t), B(t) : t in t_samples}, i.e. the
                   number of independent coefficient directions of the family.
    """
    if not 1 <= l <= model.depth:
        raise ValueError("layer index out of range")
    layer = model.layers[l - 1]
    if max(layer.shape) > DENSE_CAP:
        raise CapExceeded("layer too wide for a dense rank audit")
    mats = [layer.materialize(t) for t in t_samples]
    if mode == "matrix":
        return max(_num_rank(W) for W, _ in mats)
    if mode == "span":
        stack_w = np.array([W.reshape(-1) for W, _ in mats])
        stack_b = np.array([B for _, B in mats])
        return max(_num_rank(stack_w), _num_rank(stack_b))
    raise ValueError(f"unknown mode {mode!r}")


def is_hk_product(M: np.ndarray, tol: float = 1e-12) -> str | None:
    """Name of a factor kind that reproduces M exactly (kron, kron_dL, kron_dR), else None."""
    M = np.asarray(M, dtype=float)
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if not np.any(M):
        return "kron"
    if _num_rank(M, 1e-13) == 1:
        return "kron"
    r, c = M.shape
    # kron_dR: (m1*m2) x m2 stacked diagonal blocks, block i = uL[i] diag(uR)
    if r % c == 0:
        m1, m2 = r // c, c
        blocks = M.reshape(m1, m2, m2)
        off = blocks * (1 - np.eye(m2))[None]
        if np.max(np.abs(off)) <= tol * scale:
            D = np.array([np.diag(b) for b in blocks])
            if _num_rank(D, 1e-13) <= 1:
                return "kron_dR"
    # kron_dL: m1 x (m1*m2), row i nonzero only on its own block of width m2
    if c % r == 0:
        m1, m2 = r, c // r
        blocks = M.reshape(m1, m1, m2)
        mask = np.eye(m1)[:, :, None]
        if np.max(np.abs(blocks * (1 - mask))) <= tol * scale:
            D = np.array([blocks[i, i] for i in range(m1)])
            if _num_rank(D, 1e-13) <= 1:
                return "kron_dL"
    return None


def lrnr_rank_certificate(model: LRNRModel, l: int, t_samples=(0.0, 0.5, 1.0)) -> dict:
    """Check that W(t) = A + t B with A, B each one structured rank-1 factor (or zero)."""
    layer = model.layers[l - 1]
    W0, B0 = layer.materialize(0.0)
    W1, B1 = layer.materialize(1.0)
    dirs = [W0, W1 - W0]
    kinds = [is_hk_product(D) for D in dirs if np.any(D)]
    return {
        "span_rank_weight": _num_rank(np.array([layer.materialize(t)[0].reshape(-1) for t in t_samples])),
        "span_rank_bias": _num_rank(np.array([layer.materialize(t)[1] for t in t_samples])),
        "direction_kinds": kinds,
        "all_structured": all(k is not None for k in kinds),
        "factor_count": max(len(layer.weight_factors), len(layer.bias_factors)),
        "matrix_rank": layer_rank(model, l, t_samples, "matrix"),
    }


def affinity_residual(model: LRNRModel, t_samples) -> float:
    worst = 0.0
    for layer in model.layers:
        W0, B0 = layer.materialize(0.0)
        W1, B1 = layer.materialize(1.0)
        for t in t_samples:
            W, B = layer.materialize(t)
            worst = max(worst, float(np.max(np.abs(W - W0 - t * (W1 - W0)), initial=0.0)),
                        float(np.max(np.abs(B - B0 - t * (B1 - B0)), initial=0.0)))
    return worst


STRUCTURAL = (0.0, 1.0, -1.0)


def stored_scalars(model: LRNRModel) -> np.ndarray:
    vals = []
    for layer in model.layers:
        for f, s in tuple(layer.weight_factors) + tuple(layer.bias_factors):
            vals += [f.uL, f.uR, [s.a, s.b]]
        for _, s in layer.sparse_entries:
            vals.append([s.a, s.b])
    return np.concatenate([np.asarray(v, dtype=float).reshape(-1) for v in vals]) if vals else np.empty(0)


def dof_count(model: LRNRModel) -> int:
    """Distinct stored scalars, not counting the structural constants 0 and +-1."""
    v = stored_scalars(model)
    v = v[~np.isin(v, STRUCTURAL)]
    return int(np.unique(v).size)


# ---------------------------------------------------------------------------
# serialisation


def _factor_json(f: Rank1Factor, s: CoeffSchedule) -> dict:
    return {"uL": f.uL.tolist(), "uR": f.uR.tolist(), "kind": f.kind, "a": s.a, "b": s.b}


def to_json(model: LRNRModel) -> dict:
    return {
        "arch": list(model.arch.dims),
        "layers": [{
            "factors": [_factor_json(f, s) for f, s in L.weight_factors],
            "bias_factors": [_factor_json(f, s) for f, s in L.bias_factors],
            "sparse": [{"row": int(i), "col": int(j), "a": s.a, "b": s.b}
                       for (i, j), s in L.sparse_entries],
        } for L in model.layers],
        "meta": {k: v for k, v in model.meta.items() if isinstance(v, (int, float, str, list))},
    }


def from_json(d: dict) -> LRNRModel:
    dims = tuple(d["arch"])
    layers = []
    for l, Ld in enumerate(d["layers"]):
        fac = tuple((Rank1Factor(e["uL"], e["uR"], e["kind"]), CoeffSchedule(e["a"], e["b"]))
                    for e in Ld["factors"])
        bfac = tuple((Rank1Factor(e["uL"], e["uR"], e["kind"]), CoeffSchedule(e["a"], e["b"]))
                     for e in Ld["bias_factors"])
        sp = tuple(((e["row"], e["col"]), CoeffSchedule(e["a"], e["b"])) for e in Ld.get("sparse", []))
        layers.append(LowRankLayer(dims[l + 1], dims[l], fac, bfac, sp))
    return LRNRModel(ArchSpec(dims), tuple(layers), dict(d.get("meta", {})))


def dumps(model: LRNRModel) -> str:
    return json.dumps(to_json(model))


def loads(s: str) -> LRNRModel:
    return from_json(json.loads(s))
