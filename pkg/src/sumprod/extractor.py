"""Iterated condensing with T(X, Y, Z) = X(Y + Z) over F_p.

Exact mode propagates the full law level by level through the
distributions module.  Sampled mode evaluates a depth-d ternary tree on
fresh source samples and runs a small statistical battery on the output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np
from scipy import stats

from .dist import DEFAULT_BUDGET, Dist, min_entropy, pushforward
from .errors import PreconditionError, UsageError
from .rng import substream

CONDENSER_EXPONENT = math.log(3) / math.log(1.5)
SIGNIFICANCE = 1e-3


@dataclass(frozen=True)
class CondenserPlan:
    p: int
    delta: Fraction
    depth: int
    leaves: int
    target_bits: int
    leaf_bound: int  # ceil((1/delta)^C) with C = log_{3/2} 3

    @property
    def rounding_gap(self) -> bool:
        return self.leaves > self.leaf_bound

    def to_json(self) -> dict:
        return {"p": self.p, "delta": str(self.delta), "depth": self.depth,
                "leaves": self.leaves, "target_bits": self.target_bits,
                "leaf_bound": self.leaf_bound, "rounding_gap": self.rounding_gap,
                "exponent": CONDENSER_EXPONENT}


def plan(p: int, delta) -> CondenserPlan:
    """Smallest depth d with (3/2)^d * delta >= 1, decided exactly."""
    delta = Fraction(delta)
    if not 0 < delta <= 1:
        raise UsageError("delta must lie in (0, 1]")
    d = 0
    while Fraction(3, 2) ** d * delta < 1:
        d += 1
    bound = math.ceil((1 / float(delta)) ** CONDENSER_EXPONENT - 1e-12)
    return CondenserPlan(p, delta, d, 3**d, int(math.floor(math.log2(p))), bound)


@dataclass
class CondenserTrace:
    levels: list  # one dict of statistics per level, level 0 is the source
    laws: list = dc_field(default_factory=list)  # exact mode only
    battery: dict | None = None
    comparison: dict | None = None  # sampled output against a reference law

    def to_json(self) -> dict:
        out = {"levels": self.levels}
        if self.battery is not None:
            out["battery"] = self.battery
        if self.comparison is not None:
            out["comparison"] = self.comparison
        return out


def _frac(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _exact_level(i, d: Dist) -> dict:
    hm = min_entropy(d)
    return {"level": i, "support": len(d), "hmin": hm.bits, "p_max": _frac(hm.exact),
            "p_zero": _frac(d.prob(0))}


def condense_step(x: Dist, budget=DEFAULT_BUDGET) -> Dist:
    """Law of X(Y+Z) for three independent copies of ``x``.

    Computed as two pushforwards (S = Y+Z, then X*S), which by independence
    equals the direct three-variable law but enumerates far fewer points.
    """
    s = pushforward("Y+Z", {"Y": x, "Z": x}, budget=budget)
    return pushforward("X*S", {"X": x, "S": s}, budget=budget)


def condense_exact(x: Dist, rounds: int, budget=DEFAULT_BUDGET) -> CondenserTrace:
    if x.field is None or x.field.p is None:
        raise UsageError("the condenser runs over F_p")
    laws = [x]
    for _ in range(rounds):
        laws.append(condense_step(laws[-1], budget))
    return CondenserTrace([_exact_level(i, d) for i, d in enumerate(laws)], laws)


# sampled mode


def dist_sampler(d: Dist):
    """Exact sampler for ``d``: integer weights, inverse-CDF on a uniform integer."""
    ws, total = d.weights
    cum = np.cumsum(np.array(ws, dtype=object)).astype(object)
    if total >= 2**63:
        raise UsageError("source denominator too large for exact sampling")
    cum = np.array([int(c) for c in cum], dtype=np.int64)
    vals = np.array([int(k) for k in d.support], dtype=np.int64)

    def draw(rng, size):
        u = rng.integers(0, total, size=size, dtype=np.int64)
        return vals[np.searchsorted(cum, u, side="right")]

    return draw


def _bucket_edges(p, bins):
    # residue v goes to bucket v * bins // p
    return np.array([(b * p + bins - 1) // bins for b in range(bins + 1)])


def _bucketize(vals, p, bins):
    return (vals.astype(np.int64) * bins) // p if p * bins < 2**62 else np.array(
        [int(v) * bins // p for v in vals], dtype=np.int64)


def _bucket_probs(p, bins):
    edges = _bucket_edges(p, bins)
    return np.diff(edges) / p


def _collision_stats(counts: np.ndarray) -> dict:
    n = int(counts.sum())
    c = counts.astype(np.float64)
    cp = float((c * (c - 1)).sum()) / (n * (n - 1)) if n > 1 else float("nan")
    ph = c / n
    var = 4.0 / n * max(float((ph**3).sum() - (ph**2).sum() ** 2), 0.0) + 2.0 * float((ph**2).sum()) / (n * n)
    se = math.sqrt(var)
    if cp > 0:
        h2 = -math.log2(cp)
        se_bits = se / (cp * math.log(2))
    else:
        h2, se_bits = float("inf"), float("nan")
    return {"samples": n, "collision_prob": cp, "h2": h2, "h2_se": se_bits}


def battery(values: np.ndarray, p: int, max_bins: int = 4096) -> dict:
    """Chi-square uniformity over F_p (or buckets) and a serial pair test."""
    n = len(values)
    bins = p if p <= max_bins and n >= 5 * p else max(2, min(max_bins, 2 ** int(math.log2(max(n // 5, 2)))))
    bins = min(bins, p)
    probs = _bucket_probs(p, bins) if bins < p else np.full(p, 1.0 / p)
    obs = np.bincount(_bucketize(values, p, bins) if bins < p else values, minlength=bins)
    chi = stats.chisquare(obs, probs * n)
    out = {"bins": int(bins), "chi2": float(chi.statistic), "chi2_p": float(chi.pvalue)}
    half = n // 2
    s = max(2, min(16, int(math.isqrt(max(half // 5, 4)))))
    s = min(s, p)
    sp = _bucket_probs(p, s)
    a = _bucketize(values[0:2 * half:2], p, s)
    b = _bucketize(values[1:2 * half:2], p, s)
    pair_obs = np.bincount(a * s + b, minlength=s * s)
    pair_exp = np.outer(sp, sp).ravel() * half
    ser = stats.chisquare(pair_obs, pair_exp)
    out.update({"serial_bins": int(s), "serial_chi2": float(ser.statistic),
                "serial_p": float(ser.pvalue)})
    out["reject"] = bool(out["chi2_p"] < SIGNIFICANCE or out["serial_p"] < SIGNIFICANCE)
    out["significance"] = SIGNIFICANCE
    return out


def condense_sampled(source, cplan: CondenserPlan, trials: int, seed: int,
                     min_trials: int = 10_000, chunk_nodes: int = 1 << 20,
                     reference: Dist | None = None) -> CondenserTrace:
    """Evaluate the depth-d tree ``trials`` times on fresh samples.

    Roles inside each node are fixed: the first child is X, the second Y and
    the third Z.  Randomness comes in fixed-size chunks, each with its own
    substream derived from ``seed``, so results do not depend on how work is
    split.  If ``reference`` is given (normally the exact law of the last
    level), the empirical output is compared with it in total variation and
    flagged when the distance exceeds ``3 sqrt(|support| / trials)``.
    """
    if trials < min_trials:
        raise PreconditionError(f"{trials} trials; the battery needs at least {min_trials}")
    p = cplan.p
    draw = dist_sampler(source) if isinstance(source, Dist) else source
    if isinstance(source, Dist) and source.field.p != p:
        raise UsageError(f"source lives in {source.field}, plan is for p={p}")
    d = cplan.depth
    leaves = 3**d
    per_chunk = max(1, chunk_nodes // leaves)
    count_bins = p if p <= 1 << 20 else 1 << 20
    level_counts = [np.zeros(count_bins, dtype=np.int64) for _ in range(d + 1)]
    zeros = [0] * (d + 1)
    finals = []
    done, chunk = 0, 0
    while done < trials:
        m = min(per_chunk, trials - done)
        rng = substream(seed, "condense", chunk)
        arr = np.asarray(draw(rng, m * leaves), dtype=np.int64).reshape(m, leaves)
        for lvl in range(d + 1):
            if lvl:
                t = arr.reshape(m, -1, 3)
                arr = t[:, :, 0] * ((t[:, :, 1] + t[:, :, 2]) % p) % p
            flat = arr.ravel()
            cb = flat if count_bins == p else _bucketize(flat, p, count_bins)
            level_counts[lvl] += np.bincount(cb, minlength=count_bins)
            zeros[lvl] += int((flat == 0).sum())
        finals.append(arr.ravel())
        done += m
        chunk += 1
    levels = []
    for lvl in range(d + 1):
        row = {"level": lvl}
        row.update(_collision_stats(level_counts[lvl]))
        row["p_zero"] = zeros[lvl] / row["samples"]
        if count_bins != p:
            row["bucketed"] = count_bins
        levels.append(row)
    out = np.concatenate(finals)
    comparison = None
    if reference is not None:
        tv = total_variation_estimate(out, reference)
        limit = 3 * math.sqrt(len(reference) / trials)
        comparison = {"tv": tv, "limit": limit, "flagged": bool(tv > limit)}
    return CondenserTrace(levels, battery=battery(out, p), comparison=comparison)


def total_variation_estimate(samples: np.ndarray, law: Dist) -> float:
    vals, counts = np.unique(samples, return_counts=True)
    emp = dict(zip(vals.tolist(), (counts / counts.sum()).tolist()))
    keys = set(emp) | set(int(k) for k in law.support)
    return 0.5 * sum(abs(emp.get(k, 0.0) - float(law.prob(k))) for k in keys)
