"""Finite channel models: explicit stochastic matrices and parametric families.

A channel is a |X| x |Y| row-stochastic matrix.  Rows are renormalized on
construction (the residual is recorded); a row-sum deviation beyond the hard
tolerance is rejected outright.  Instances are immutable and safe to share.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError

ROW_SUM_HARD_TOL = 1e-6   # ingestion: reject beyond this
ROW_SUM_SOFT_TOL = 1e-12  # invariant after renormalization
ROW_EQUAL_TOL = 1e-12     # duplicate-row detection


@dataclass(frozen=True)
class ChannelModel:
    """Row-stochastic matrix W(y|x) with input labels and optional costs."""

    input_labels: tuple[str, ...]
    matrix: np.ndarray
    cost: np.ndarray | None = None
    family: dict | None = None
    renorm_residual: float = 0.0

    @property
    def n_inputs(self) -> int:
        return self.matrix.shape[0]

    @property
    def output_size(self) -> int:
        return self.matrix.shape[1]

    def row(self, x: int) -> np.ndarray:
        return self.matrix[x]

    def cost_vector(self) -> np.ndarray:
        """Cost per input; defaults to all zeros."""
        if self.cost is None:
            return np.zeros(self.n_inputs)
        return self.cost


def check_distribution(p: np.ndarray, tol: float = ROW_SUM_SOFT_TOL) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise ValidationError("distribution must be a 1-d vector")
    if np.any(p < 0):
        raise ValidationError("distribution has negative entries")
    if abs(float(p.sum()) - 1.0) > tol:
        raise ValidationError(f"distribution sums to {p.sum()!r}, not 1")
    return p


def make_channel(labels, matrix, cost=None, family=None) -> ChannelModel:
    """Validate, renormalize rows, and freeze a channel.

    Rejects negative entries, entries above 1 + tolerance, and rows whose sum
    deviates from 1 by more than ROW_SUM_HARD_TOL.  Surviving rows are divided
    by their sum so every row is an exact distribution afterwards.
    """
    m = np.array(matrix, dtype=float)
    if m.ndim != 2:
        raise ValidationError("channel matrix must be 2-d")
    n_x, n_y = m.shape
    if n_x < 1:
        raise ValidationError("channel needs at least one input")
    if n_y < 2:
        raise ValidationError("channel needs at least two outputs")
    if np.any(m < 0):
        raise ValidationError("channel matrix has negative entries")
    if np.any(m > 1 + ROW_SUM_HARD_TOL):
        raise ValidationError("channel matrix has entries above 1")
    sums = m.sum(axis=1)
    residual = float(np.max(np.abs(sums - 1.0)))
    if residual > ROW_SUM_HARD_TOL:
        bad = int(np.argmax(np.abs(sums - 1.0)))
        raise ValidationError(
            f"row {bad} sums to {float(sums[bad])!r} (deviation > {ROW_SUM_HARD_TOL})")
    m = m / sums[:, None]
    m.flags.writeable = False

    labels = tuple(str(s) for s in labels)
    if len(labels) != n_x:
        raise ValidationError("label count does not match matrix rows")

    cvec = None
    if cost is not None:
        cvec = np.array(cost, dtype=float)
        if cvec.shape != (n_x,):
            raise ValidationError("cost vector length does not match inputs")
        if np.any(cvec < 0):
            raise ValidationError("costs must be nonnegative")
        cvec.flags.writeable = False

    return ChannelModel(labels, m, cvec, family, residual)


def identity_channel(k: int) -> ChannelModel:
    """Noiseless k-input / k-output channel."""
    return make_channel([str(i) for i in range(k)], np.eye(k))


def bernoulli_family(a: float, k_max: int) -> ChannelModel:
    """Binary-output channel on the input ladder {0} u {a^-k : 0 <= k <= k_max}.

    Input x emits symbol 1 with probability x, so each row is (1-x, x).
    """
    if a <= 1:
        raise ValidationError("ladder base must satisfy a > 1")
    if k_max < 0:
        raise ValidationError("k_max must be >= 0")
    xs = [0.0] + [float(a) ** (-k) for k in range(k_max + 1)]
    if len(set(xs)) != len(xs):
        raise ValidationError("ladder points are not distinct")
    rows = [(1.0 - x, x) for x in xs]
    return make_channel([repr(x) for x in xs], rows,
                        family={"family": "bernoulli", "a": float(a), "k_max": int(k_max)})


def bernoulli_inputs(W: ChannelModel) -> np.ndarray:
    """The parameter x of each row of a binary-output channel (column of y=1)."""
    if W.output_size != 2:
        raise ValidationError("expected a binary-output channel")
    return W.matrix[:, 1].copy()


def load_channel(path) -> ChannelModel:
    """Read a channel spec file (JSON) and return a validated model.

    Two forms are accepted:
      {"inputs": [labels], "matrix": [[...]], "cost": [...]}   explicit
      {"family": "bernoulli", "a": <real>, "k_max": <int>}     parametric
    """
    path = Path(path)
    try:
        spec = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read channel spec {path}: {exc}") from exc
    if not isinstance(spec, dict):
        raise ValidationError("channel spec must be a JSON object")

    if "family" in spec:
        if spec["family"] != "bernoulli":
            raise ValidationError(f"unknown channel family {spec['family']!r}")
        try:
            return bernoulli_family(float(spec["a"]), int(spec["k_max"]))
        except KeyError as exc:
            raise ValidationError(f"bernoulli family spec missing {exc}") from exc

    try:
        labels = spec["inputs"]
        matrix = spec["matrix"]
    except KeyError as exc:
        raise ValidationError(f"channel spec missing key {exc}") from exc
    return make_channel(labels, matrix, cost=spec.get("cost"))


def truncate_channel(W: ChannelModel, delta: float, n: int) -> ChannelModel:
    """Zero out output probabilities below delta/(n|Y|) and renormalize rows.

    Each surviving entry is divided by the row's surviving mass K, which is
    guaranteed >= 1 - delta/n, so no row can lose all its mass.
    """
    if not 0 < delta < 1:
        raise ValidationError("delta must lie in (0, 1)")
    if n < 1:
        raise ValidationError("n must be >= 1")
    thr = delta / (n * W.output_size)
    m = W.matrix.copy()
    m[m < thr] = 0.0
    k = m.sum(axis=1)
    assert np.all(k >= 1 - delta / n - 1e-15)
    m = m / k[:, None]
    return make_channel(W.input_labels, m, cost=None if W.cost is None else W.cost.copy(),
                        family=W.family)


def dedupe_and_purge(W: ChannelModel) -> ChannelModel:
    """Drop inputs whose rows duplicate another row, keeping the cheapest.

    Rows are compared exactly (within ROW_EQUAL_TOL after normalization).
    Within a duplicate group the input with minimal cost survives; ties go to
    the lowest input index.  The result has one input per distinct row.
    """
    cost = W.cost_vector()
    keep: list[int] = []
    for i in range(W.n_inputs):
        matched = None
        for pos, j in enumerate(keep):
            if np.max(np.abs(W.matrix[i] - W.matrix[j])) <= ROW_EQUAL_TOL:
                matched = pos
                break
        if matched is None:
            keep.append(i)
        elif cost[i] < cost[keep[matched]]:
            keep[matched] = i
    keep_sorted = sorted(keep)
    return make_channel([W.input_labels[i] for i in keep_sorted],
                        W.matrix[keep_sorted],
                        cost=None if W.cost is None else cost[keep_sorted],
                        family=W.family)


def sqrt_image(W: ChannelModel) -> np.ndarray:
    """Componentwise square roots of the rows: |X| unit vectors in R^|Y|."""
    return np.sqrt(W.matrix)


def channel_to_spec(W: ChannelModel) -> dict:
    """JSON-ready explicit spec for a channel (inverse of load_channel)."""
    spec = {"inputs": list(W.input_labels), "matrix": W.matrix.tolist()}
    if W.cost is not None:
        spec["cost"] = W.cost.tolist()
    return spec
