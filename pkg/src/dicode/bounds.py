"""Closed-form rate bounds over parameter grids, with validity flags.

Every evaluator returns a BoundPoint carrying the raw value in bits, the
flags that qualify it (trivial regime, unmet precondition, one-sided count),
and the exactness of any packing/covering count it consumed.  Sweeps tabulate
those points into a BoundCurve with a deterministic CSV rendering.

Curve identifiers (the `formula_id` wire tokens):

  thm1_lower / thm2_upper      packing (achievability) and covering (converse)
                               bounds on the rate at exponent target E
  cor1_lower / cor2_upper      their small-E expansions through a dimension
                               value d and slack eta
  improved_good_lower /        the same expansions with the upper (resp.
  improved_bad_upper           lower) dimension, for designated E-subsets
  ex1_bern_lower / _upper      closed forms for the geometric Bernoulli ladder
  ex2_dmc_lower / _upper       closed forms for a purged finite channel
  thm5_stein / thm6_stein      one-sided-error partition bounds
  power_capacity               max output-identity entropy under a cost cap
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelModel, dedupe_and_purge
from .errors import ValidationError
from .geometry import EXACT_SIZE_LIMIT, cloud_from_channel, max_packing, min_covering
from .infodist import binary_entropy, fidelity, typicality_constants

LN4 = math.log(4.0)

CSV_COLUMNS = ("formula_id", "n", "E", "t", "eta", "alpha",
               "value_bits", "normalized_value", "validity_flags", "count_exactness")


@dataclass(frozen=True)
class BoundPoint:
    value: float
    flags: tuple[str, ...] = ()
    count_exact: str = ""     # exact | lower-bound | upper-bound | ""
    extras: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BoundCurve:
    formula_id: str
    grid: tuple[dict, ...]
    points: tuple[BoundPoint, ...]

    def rows(self):
        out = []
        for g, p in zip(self.grid, self.points):
            n = g.get("n")
            norm = ""
            if n and n > 1 and math.isfinite(p.value):
                norm = p.value / math.log2(n)
            out.append({
                "formula_id": self.formula_id,
                "n": g.get("n", ""),
                "E": g.get("E", ""),
                "t": g.get("t", ""),
                "eta": g.get("eta", ""),
                "alpha": g.get("alpha", ""),
                "value_bits": p.value,
                "normalized_value": norm,
                "validity_flags": "|".join(p.flags),
                "count_exactness": p.count_exact,
            })
        return out


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def curves_to_csv(curves) -> str:
    """Deterministic CSV rendering (17 significant digits, \\n newlines)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for curve in curves:
        for row in curve.rows():
            writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _count_mode(cloud_size: int, requested: str) -> str:
    if requested == "auto":
        return "exact" if cloud_size <= EXACT_SIZE_LIMIT else "greedy"
    return requested


def _log_penalty(n: int, y_size: int) -> float:
    """The explicit finite-n rate penalty log2(ceil(n log2 |Y|)) / n."""
    return math.log2(max(1, math.ceil(n * math.log2(y_size)))) / n


def packing_radius(E: float, t: float, y_size: int) -> float:
    _, c = typicality_constants(y_size)
    return (6.0 * E / (c * t * t)) ** 0.25


def covering_radius(E: float) -> float:
    return 0.5 * math.sqrt(-math.expm1(-E / 2.0))


def thm1_lower(W: ChannelModel, n: int, E: float, t: float,
               mode: str = "auto") -> BoundPoint:
    """Achievable rate: (1-t) log2 Pi_beta - H(t,1-t) - log-penalty."""
    if E <= 0 or not 0 < t < 1 or n < 1:
        raise ValidationError("need E > 0, 0 < t < 1, n >= 1")
    beta = packing_radius(E, t, W.output_size)
    flags = []
    if beta >= math.sqrt(2.0):
        flags.append("trivial-regime")
    cloud = cloud_from_channel(W, "sqrt")
    pack = max_packing(cloud, beta, mode=_count_mode(len(cloud), mode))
    value = ((1 - t) * math.log2(pack.count) - binary_entropy(t)
             - _log_penalty(n, W.output_size))
    return BoundPoint(value, tuple(flags),
                      "exact" if pack.exact else "lower-bound",
                      {"packing_count": pack.count, "beta": beta})


def thm2_upper(W: ChannelModel, n: int, E: float, mode: str = "auto") -> BoundPoint:
    """Converse rate: log2 of the covering count at radius (1/2)sqrt(1-e^-E/2)."""
    if E <= 0 or n < 1:
        raise ValidationError("need E > 0 and n >= 1")
    flags = []
    if n * E / 2.0 < LN4:
        flags.append("precondition-nE-unmet")
    r = covering_radius(E)
    cloud = cloud_from_channel(W, "sqrt")
    cover = min_covering(cloud, r, mode=_count_mode(len(cloud), mode))
    return BoundPoint(math.log2(cover.count), tuple(flags),
                      "exact" if cover.exact else "upper-bound",
                      {"covering_count": cover.count, "radius": r})


def cor1_lower(d_lower: float, eta: float, E: float, t: float, n: int,
               y_size: int = 2) -> BoundPoint:
    """Dimension form of the achievability bound.

    ((1-t)/4)(d - eta) log2(c t^2 / 6E) - H(t,1-t) - log-penalty.  The
    dimension value is a user input; finite clouds cannot certify it, so the
    point is always flagged as an asymptotic indicator.
    """
    if E <= 0 or not 0 < t < 1 or n < 1 or eta < 0:
        raise ValidationError("need E > 0, 0 < t < 1, n >= 1, eta >= 0")
    _, c = typicality_constants(y_size)
    value = ((1 - t) / 4.0 * (d_lower - eta) * math.log2(c * t * t / (6.0 * E))
             - binary_entropy(t) - _log_penalty(n, y_size))
    return BoundPoint(value, ("dimension-asymptotic",))


def cor2_upper(d_upper: float, eta: float, E: float) -> BoundPoint:
    """Dimension form of the converse bound: (1/2)(d + eta) log2(8/E).

    The exact remainder per dimension unit,
        e_term = log2(2 / sqrt(1 - e^-E/2)) - (1/2) log2(8/E),
    is reported separately in extras; value + (d+eta) * e_term reproduces the
    unexpanded covering form.
    """
    if E <= 0 or eta < 0:
        raise ValidationError("need E > 0 and eta >= 0")
    half_log = 0.5 * math.log2(8.0 / E)
    exact = math.log2(2.0 / math.sqrt(-math.expm1(-E / 2.0)))
    value = (d_upper + eta) * half_log
    return BoundPoint(value, ("dimension-asymptotic",),
                      extras={"e_term": exact - half_log,
                              "exact_form": (d_upper + eta) * exact})


def improved_good_lower(d_upper: float, eta: float, E: float, t: float, n: int,
                        y_size: int = 2) -> BoundPoint:
    """Achievability with the upper dimension, valid on a designated
    'good' subset of exponents; membership cannot be certified here."""
    p = cor1_lower(d_upper, eta, E, t, n, y_size)
    return BoundPoint(p.value, p.flags + ("subset-membership-uncertified",), p.count_exact)


def improved_bad_upper(d_lower: float, eta: float, E: float) -> BoundPoint:
    """Converse with the lower dimension, valid on a designated 'bad' subset."""
    p = cor2_upper(d_lower, eta, E)
    return BoundPoint(p.value, p.flags + ("subset-membership-uncertified",),
                      p.count_exact, p.extras)


def ex1_bernoulli(a: float, E: float, n: int, t: float | None = None):
    """Rate bracket for the geometric input ladder on the binary channel.

    lower = (1-t) log2 log_a( t sqrt(c) (sqrt(a)-1)^2 / (36 sqrt(6E)) )
            - H(t,1-t) - log2(ceil(n))/n          (default t = E^(1/4))
    upper = log2 log_sqrt(a)( a / sqrt(1 - e^-E/2) )

    Both are also reported normalized by log2 log2 (1/E).  When the inner
    logarithm of the lower bound is nonpositive the lower value is NaN and
    flagged 'lower-undefined' (the bound is vacuous there).
    """
    if a <= 1 or E <= 0 or n < 1:
        raise ValidationError("need a > 1, E > 0, n >= 1")
    if t is None:
        t = E**0.25
    if not 0 < t < 1:
        raise ValidationError("t must lie in (0, 1)")
    _, c = typicality_constants(2)
    flags = []

    inner = t * math.sqrt(c) * (math.sqrt(a) - 1) ** 2 / (36.0 * math.sqrt(6.0 * E))
    log_inner = math.log2(inner) / math.log2(a) if inner > 0 else -math.inf
    if log_inner <= 0:
        lower = math.nan
        flags.append("lower-undefined")
    else:
        lower = ((1 - t) * math.log2(log_inner) - binary_entropy(t)
                 - math.log2(math.ceil(n)) / n)

    up_inner = a / math.sqrt(-math.expm1(-E / 2.0))
    upper = math.log2(math.log2(up_inner) / math.log2(math.sqrt(a)))

    loglog = math.log2(math.log2(1.0 / E))
    return BoundPoint(lower, tuple(flags),
                      extras={"normalized": lower - loglog, "t": t}), \
        BoundPoint(upper, (), extras={"normalized": upper - loglog})


def _hamming_volume(q: int, n: int, radius: int) -> int:
    """Exact number of q-ary words within Hamming distance `radius`."""
    return sum(math.comb(n, i) * (q - 1) ** i for i in range(max(0, radius) + 1))


def ex2_dmc(W: ChannelModel, E: float, n: int):
    """Rate bracket for a purged finite channel at exponent target E.

    lower: t = sqrt(6E / (c beta^4)) with 2 beta the minimum pairwise
    square-root distance; rate = (1-t) log2 |rows| - H(t,1-t) - log-penalty.
    Flagged 'lower-undefined' when t >= 1 (vacuous).
    upper: minimum distance d = ceil(n E log_alpha e - log_alpha 4) with
    1/alpha the maximum pairwise fidelity, fed into the sphere-packing bound
    (exact integer volumes): rate = log2 q - log2 V_q(n, floor((d-1)/2)) / n.
    """
    if E < 0 or n < 1:
        raise ValidationError("need E >= 0 and n >= 1")
    purged = dedupe_and_purge(W)
    q = purged.n_inputs
    if q == 1:
        zero = BoundPoint(0.0, ("single-output-row",))
        return zero, zero

    roots = np.sqrt(purged.matrix)
    dmin = math.inf
    fmax = 0.0
    for i in range(q):
        for j in range(i + 1, q):
            dmin = min(dmin, float(np.linalg.norm(roots[i] - roots[j])))
            fmax = max(fmax, fidelity(purged.matrix[i], purged.matrix[j]))
    beta = dmin / 2.0
    _, c = typicality_constants(purged.output_size)

    flags_lo = []
    if E == 0:
        t = 0.0
    else:
        t = math.sqrt(6.0 * E / (c * beta**4))
    if t >= 1:
        lower = math.nan
        flags_lo.append("lower-undefined")
    else:
        lower = ((1 - t) * math.log2(q) - binary_entropy(t)
                 - _log_penalty(n, purged.output_size))

    if fmax == 0.0:
        d_min = 0  # disjoint rows: no distance requirement survives
    else:
        alpha = 1.0 / fmax
        d_min = math.ceil(n * E * math.log(math.e, alpha) - math.log(4.0, alpha))
    radius = max(0, (max(0, d_min) - 1) // 2)
    volume = _hamming_volume(q, n, radius)
    upper = math.log2(q) - math.log2(volume) / n
    return (BoundPoint(lower, tuple(flags_lo), extras={"t": t, "beta": beta}),
            BoundPoint(upper, (), extras={"d_min": d_min, "alpha_inv": fmax}))


def power_capacity(W: ChannelModel, A: float, tol: float = 1e-10) -> BoundPoint:
    """max H(p) over input distributions with expected cost <= A, in bits.

    The channel must be purged first (duplicate rows merged).  If the uniform
    distribution is feasible the cap is inactive and the value is log2 |X|;
    otherwise the maximizer is the exponential tilt p_x ~ exp(-mu phi(x)) with
    mu >= 0 chosen by bisection so the cost constraint is tight.
    """
    purged = dedupe_and_purge(W)
    phi = purged.cost_vector()
    if A < phi.min():
        raise ValidationError(f"cost cap {A} below cheapest input {phi.min()}")
    k = purged.n_inputs
    if phi.mean() <= A:
        return BoundPoint(math.log2(k), ("constraint-inactive",))
    if A == phi.min():
        support = int((phi == phi.min()).sum())
        return BoundPoint(math.log2(support), ("constraint-tight-minimum",))

    def mean_cost(mu: float) -> float:
        w = np.exp(-mu * (phi - phi.min()))
        return float((w * phi).sum() / w.sum())

    lo, hi = 0.0, 1.0
    while mean_cost(hi) > A:
        hi *= 2.0
        if hi > 1e18:
            raise ValidationError("tilt search diverged")
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if mean_cost(mid) > A:
            lo = mid
        else:
            hi = mid
    w = np.exp(-hi * (phi - phi.min()))
    p = w / w.sum()
    value = float(-(p * np.log2(p)).sum())
    return BoundPoint(value, (), extras={"mu": hi, "distribution": p.tolist()})


@dataclass(frozen=True)
class SteinBound:
    delta_part: float
    L_max: int
    rate_bound: float
    n0: float
    flags: tuple[str, ...] = ()
    extras: dict = field(default_factory=dict)


def thm5_stein(omega: float, E: float, alpha: float = 2.0,
               lambda_bounded: float = 0.5,
               delta_part: float | None = None) -> SteinBound:
    """Partition rate bound for channels with all probabilities >= omega.

    delta_part defaults to 2^(E(alpha-1)/(2 alpha)) - 1, the largest ratio
    slack whose per-letter divergence cost stays within E/2.  The number of
    ratio shells is L = floor(-log2 omega / log2(1+delta)); the rate bound is
    log2 L, valid from blocklength n0 on.
    """
    if not 0 < omega < 1:
        raise ValidationError("need 0 < omega < 1")
    if alpha <= 1 or E <= 0:
        raise ValidationError("need alpha > 1 and E > 0")
    if not 0 <= lambda_bounded < 1:
        raise ValidationError("bounded error must lie in [0, 1)")
    if delta_part is None:
        delta_part = 2.0 ** (E * (alpha - 1) / (2.0 * alpha)) - 1.0
    if delta_part <= 0:
        raise ValidationError("partition slack must be positive")
    L = math.floor(-math.log2(omega) / math.log2(1.0 + delta_part))
    rate = math.log2(L) if L >= 1 else 0.0
    n0 = (-2.0 * alpha * math.log2(1.0 - lambda_bounded)
          / (E * (alpha - 1.0)))
    return SteinBound(delta_part, L, rate, n0)


def thm6_stein(y_size: int, E: float, n: int, alpha: float = 2.0,
               delta_trunc: float = 0.5, lambda_bounded: float = 0.5,
               delta_part: float | None = None) -> SteinBound:
    """Partition rate bound for unrestricted channels via truncation.

    Truncation at delta_trunc/(n |Y|) makes the smallest surviving probability
    n-dependent, so L = floor((log2 n - log2(delta_trunc/|Y|)) / log2(1+delta))
    and the rate bound is |Y| + log2 L, the additive |Y| being the (flagged)
    support-enumeration overcount.  Error inflation envelopes for the
    truncated channel are reported in extras: multiplicative e^(2 delta_trunc)
    and additive delta_trunc / 2.
    """
    if y_size < 2 or n < 1:
        raise ValidationError("need |Y| >= 2 and n >= 1")
    if not 0 < delta_trunc < 1:
        raise ValidationError("truncation level must lie in (0, 1)")
    if alpha <= 1 or E <= 0:
        raise ValidationError("need alpha > 1 and E > 0")
    if delta_part is None:
        delta_part = 2.0 ** (E * (alpha - 1) / (2.0 * alpha)) - 1.0
    L = math.floor((math.log2(n) - math.log2(delta_trunc / y_size))
                   / math.log2(1.0 + delta_part))
    rate = y_size + (math.log2(L) if L >= 1 else 0.0)
    n0 = (-2.0 * alpha * math.log2(1.0 - lambda_bounded)
          / (E * (alpha - 1.0)))
    return SteinBound(delta_part, L, rate, n0,
                      flags=("support-overcount",),
                      extras={"omega_n": delta_trunc / (n * y_size),
                              "inflation_factor": math.exp(2.0 * delta_trunc),
                              "inflation_additive": delta_trunc / 2.0})


# ---------------------------------------------------------------------------
# capacity-trend recipe (d = 1): per-n parameter schedules for the two
# dimension-form bounds, normalized by log2 n.

FIG_RECIPE_C = 12.0   # reference constant in t(n)^2 = 3 / (c log2 n)


def trend_lower_point(n: int, d: float = 1.0, c_ref: float = FIG_RECIPE_C,
                      y_size: int = 2) -> BoundPoint:
    """Dimension-form achievability at E = 1/n, eta = 1/n,
    t = sqrt(3 / (c_ref log2 n))."""
    t = math.sqrt(3.0 / (c_ref * math.log2(n)))
    if not 0 < t < 1:
        raise ValidationError("reference constant makes t leave (0, 1)")
    # log2(c t^2 / 6E) under this schedule collapses to log2(n / (2 log2 n)),
    # independent of the constant itself
    value = ((1 - t) / 4.0 * (d - 1.0 / n) * math.log2(n / (2.0 * math.log2(n)))
             - binary_entropy(t) - _log_penalty(n, y_size))
    return BoundPoint(value, ("dimension-asymptotic", "trend-recipe"),
                      extras={"E": 1.0 / n, "t": t, "eta": 1.0 / n})


def trend_upper_point(n: int, d: float = 1.0) -> BoundPoint:
    """Unexpanded dimension-form converse at E = 1/n, eta = 1/log2 n."""
    eta = 1.0 / math.log2(n)
    E = 1.0 / n
    value = (d + eta) * math.log2(2.0 / math.sqrt(-math.expm1(-E / 2.0)))
    return BoundPoint(value, ("dimension-asymptotic", "trend-recipe"),
                      extras={"E": E, "eta": eta})


# ---------------------------------------------------------------------------
# sweep machinery

def _sweep_point(formula_id: str, g: dict, W: ChannelModel | None) -> BoundPoint:
    if formula_id == "thm1_lower":
        return thm1_lower(W, g["n"], g["E"], g["t"], g.get("mode", "auto"))
    if formula_id == "thm2_upper":
        return thm2_upper(W, g["n"], g["E"], g.get("mode", "auto"))
    if formula_id == "cor1_lower":
        return cor1_lower(g["d"], g["eta"], g["E"], g["t"], g["n"], g.get("y_size", 2))
    if formula_id == "cor2_upper":
        return cor2_upper(g["d"], g["eta"], g["E"])
    if formula_id == "improved_good_lower":
        return improved_good_lower(g["d"], g["eta"], g["E"], g["t"], g["n"],
                                   g.get("y_size", 2))
    if formula_id == "improved_bad_upper":
        return improved_bad_upper(g["d"], g["eta"], g["E"])
    if formula_id == "ex1_bern_lower":
        return ex1_bernoulli(g["a"], g["E"], g["n"], g.get("t"))[0]
    if formula_id == "ex1_bern_upper":
        return ex1_bernoulli(g["a"], g["E"], g["n"], g.get("t"))[1]
    if formula_id == "ex2_dmc_lower":
        return ex2_dmc(W, g["E"], g["n"])[0]
    if formula_id == "ex2_dmc_upper":
        return ex2_dmc(W, g["E"], g["n"])[1]
    if formula_id == "thm5_stein":
        b = thm5_stein(g["omega"], g["E"], g.get("alpha", 2.0),
                       g.get("lambda", 0.5), g.get("delta_part"))
        return BoundPoint(b.rate_bound, b.flags, extras={"L": b.L_max, "n0": b.n0})
    if formula_id == "thm6_stein":
        y = W.output_size if W is not None else g["y_size"]
        b = thm6_stein(y, g["E"], g["n"], g.get("alpha", 2.0),
                       g.get("delta_trunc", 0.5), g.get("lambda", 0.5),
                       g.get("delta_part"))
        return BoundPoint(b.rate_bound, b.flags, extras={"L": b.L_max})
    if formula_id == "power_capacity":
        return power_capacity(W, g["A"])
    if formula_id == "trend_lower":
        return trend_lower_point(g["n"], g.get("d", 1.0),
                                 g.get("c_ref", FIG_RECIPE_C), g.get("y_size", 2))
    if formula_id == "trend_upper":
        return trend_upper_point(g["n"], g.get("d", 1.0))
    raise ValidationError(f"unknown formula id {formula_id!r}")


def sweep(formula_id: str, grid, W: ChannelModel | None = None,
          jobs: int = 1) -> BoundCurve:
    """Evaluate one formula over an explicit list of grid-point dicts.

    Output order follows grid order regardless of `jobs`.
    """
    grid = tuple(dict(g) for g in grid)
    if jobs > 1 and len(grid) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            points = tuple(pool.map(lambda g: _sweep_point(formula_id, g, W), grid))
    else:
        points = tuple(_sweep_point(formula_id, g, W) for g in grid)
    return BoundCurve(formula_id, grid, points)
