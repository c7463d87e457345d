"""Monte-Carlo estimators for edge density and clique probabilities.

Trials are independent work items keyed by stream id: an estimate splits
its budget into fixed-size batches (the batch size is a deterministic
function of the problem shape, never of the machine), batch b draws from
stream.offset(b), and results fold over batches in index order.  Thread
counts therefore change throughput only, never a single output bit.
Success counting is exact integer arithmetic; probabilities are reported
in the log domain alongside the raw counts, so estimates of p^C(r,2)-sized
events never multiply raw tiny floats.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import beta as beta_dist

from gaussian_ramsey.analytic import solve_cp, std_normal_cdf, std_normal_pdf
from gaussian_ramsey.geometry import (
    PerfectSpec,
    bartlett_prefix_norms,
    gram_batch,
    prefix_norms_batch,
    sample_bartlett_batch,
    sample_cloud_batch,
)
from gaussian_ramsey.sampling import RngStream

#: target elements per sampling batch (doubles); keeps batches ~32 MB.
_BATCH_ELEMENTS = 1 << 22
_MAX_BATCH = 8192

#: stream-id stride separating sub-estimates of composite reports.
STREAM_STRIDE = 1 << 24

#: expected-success threshold below which an estimate is flagged underpowered.
MIN_EXPECTED_SUCCESSES = 100.0


def _batch_size(elements_per_trial: int) -> int:
    return max(1, min(_MAX_BATCH, _BATCH_ELEMENTS // max(1, elements_per_trial)))


def _map_batches(trials: int, batch: int, stream: RngStream, threads: int, worker):
    """Run worker(gen, count) over every batch; results in batch order."""
    nbatches = (trials + batch - 1) // batch

    def run(bi: int):
        count = min(batch, trials - bi * batch)
        return worker(stream.offset(bi).generator(), count)

    if threads <= 1:
        return [run(bi) for bi in range(nbatches)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, range(nbatches)))


def _wald_interval(successes: int, trials: int) -> tuple[float, float]:
    p = successes / trials
    half = 1.959963984540054 * math.sqrt(p * (1.0 - p) / trials)
    return max(0.0, p - half), min(1.0, p + half)


def _clopper_pearson(successes: int, trials: int) -> tuple[float, float]:
    lo = 0.0 if successes == 0 else float(beta_dist.ppf(0.025, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(beta_dist.ppf(0.975, successes + 1, trials - successes))
    return lo, hi


def _binomial_interval(successes: int, trials: int) -> tuple[float, float]:
    """95% interval: normal approximation, exact fallback at low counts."""
    if successes < 30 or trials - successes < 30:
        return _clopper_pearson(successes, trials)
    return _wald_interval(successes, trials)


@dataclass(frozen=True)
class EstimateResult:
    """A Monte-Carlo probability estimate with provenance."""

    point: float
    log_point: float
    trials: int
    successes: int
    ci_low: float
    ci_high: float
    seed: int
    config: dict = field(default_factory=dict)
    status: str = "ok"

    def as_record(self) -> dict:
        return {
            "point": self.point,
            "log_point": self.log_point,
            "trials": self.trials,
            "successes": self.successes,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "seed": self.seed,
            "status": self.status,
            "config": dict(self.config),
        }


def _log_point(successes: int, trials: int) -> float:
    if successes == 0:
        return -math.inf
    return math.log(successes) - math.log(trials)


def estimate_edge_density(n: int, d: int, p: float, trials: int, stream: RngStream, threads: int = 1) -> EstimateResult:
    """Fraction of vertex pairs joined by an edge, over `trials` sampled clouds.

    Pairs within one cloud share vertices, so for n > 2 the confidence
    interval is computed across cloud-level edge counts (cluster form);
    for n = 2 the pairs are independent and the interval is the plain
    binomial one.
    """
    if n < 2:
        raise ValueError(f"need at least two vertices, got n={n}")
    if trials < 1:
        raise ValueError(f"trial count must be positive, got {trials}")
    c_p = solve_cp(p)
    threshold = -c_p / math.sqrt(d)
    pairs_per_cloud = n * (n - 1) // 2
    iu = np.triu_indices(n, 1)

    def worker(gen, count):
        clouds = sample_cloud_batch(count, n, d, gen)
        grams = gram_batch(clouds)
        edges = (grams[:, iu[0], iu[1]] >= threshold).sum(axis=1)
        total = int(edges.sum())
        total_sq = int((edges.astype(np.int64) ** 2).sum())
        return total, total_sq

    batch = _batch_size(n * d)
    parts = _map_batches(trials, batch, stream, threads, worker)
    edges_total = sum(part[0] for part in parts)
    edges_sq_total = sum(part[1] for part in parts)

    total_pairs = trials * pairs_per_cloud
    point = edges_total / total_pairs
    if n == 2 or trials < 2:
        ci_low, ci_high = _binomial_interval(edges_total, total_pairs)
    elif edges_total < 30 or total_pairs - edges_total < 30:
        ci_low, ci_high = _clopper_pearson(edges_total, total_pairs)
    else:
        mean_count = edges_total / trials
        var_count = (edges_sq_total - trials * mean_count**2) / (trials - 1)
        se = math.sqrt(max(var_count, 0.0) / trials) / pairs_per_cloud
        half = 1.959963984540054 * se
        ci_low, ci_high = max(0.0, point - half), min(1.0, point + half)

    config = {
        "op": "edge_density",
        "n": n,
        "d": d,
        "p": p,
        "c_p": c_p,
        "trials": trials,
        "pairs": total_pairs,
        "stream_id": stream.stream_id,
        "batch": batch,
    }
    return EstimateResult(
        point=point,
        log_point=_log_point(edges_total, total_pairs),
        trials=trials,
        successes=edges_total,
        ci_low=min(ci_low, point),
        ci_high=max(ci_high, point),
        seed=stream.master_seed,
        config=config,
    )


def _clique_batch(gen, count, r, d, threshold, color, sampler, spec):
    """Per-trial success mask (and perfect mask when a spec is given).

    The random draws do not depend on whether the perfect restriction is
    requested, so runs sharing a stream are coupled trial by trial.
    """
    if sampler == "direct":
        clouds = sample_cloud_batch(count, r, d, gen)
        grams = gram_batch(clouds)
        norms_proj = prefix_norms_batch(clouds) if spec is not None else None
    elif sampler == "bartlett":
        Ms = sample_bartlett_batch(count, r, d, gen)
        grams = gram_batch(Ms)
        norms_proj = bartlett_prefix_norms(Ms) if spec is not None else None
    else:
        raise ValueError(f"sampler must be 'direct' or 'bartlett', got {sampler!r}")
    iu = np.triu_indices(r, 1)
    blue = grams[:, iu[0], iu[1]] >= threshold
    success = blue.all(axis=1) if color == "blue" else (~blue).all(axis=1)
    if spec is None:
        return success, None
    norms, proj = norms_proj
    perfect = (
        (norms > 1.0 - spec.delta)
        & (norms < 1.0 + spec.delta)
        & (proj <= spec.projection_threshold)
    ).all(axis=1)
    return success, perfect


def estimate_clique_prob(
    r: int,
    d: int,
    p: float,
    color: str,
    restrict_perfect: bool = False,
    *,
    trials: int,
    stream: RngStream,
    sampler: str = "direct",
    perfect_spec: PerfectSpec | None = None,
    threads: int = 1,
) -> EstimateResult:
    """P[all C(r,2) pairs are `color`], optionally also requiring perfectness.

    `sampler` chooses between the direct cloud and the triangular sampler
    (same distribution, very different cost profiles).  With
    restrict_perfect the default spec is the canonical one at C=2, ell=r;
    pass an explicit spec to tighten it.  An estimate whose binomial
    reference predicts fewer than 100 successes is flagged "underpowered"
    rather than silently returning noise.
    """
    if r < 1:
        raise ValueError(f"clique size must be positive, got {r}")
    if color not in ("red", "blue"):
        raise ValueError(f"color must be 'red' or 'blue', got {color!r}")
    if trials < 1:
        raise ValueError(f"trial count must be positive, got {trials}")
    c_p = solve_cp(p)
    threshold = -c_p / math.sqrt(d)
    pairs = r * (r - 1) // 2
    reference = p**pairs if color == "red" else (1.0 - p) ** pairs
    status = "ok"
    if reference * trials < MIN_EXPECTED_SUCCESSES:
        status = "underpowered"
        warnings.warn(
            f"binomial reference {reference:.3e} predicts ~{reference * trials:.1f} "
            f"successes in {trials} trials (< {MIN_EXPECTED_SUCCESSES:.0f}); "
            "estimate will be noise-dominated",
            stacklevel=2,
        )
    spec = None
    if restrict_perfect:
        spec = perfect_spec if perfect_spec is not None else PerfectSpec.from_params(2.0, max(r, 1), d, p)

    def worker(gen, count):
        success, perfect = _clique_batch(gen, count, r, d, threshold, color, sampler, spec)
        if spec is not None:
            success = success & perfect
        return (int(success.sum()),)

    elements = r * d if sampler == "direct" else r * r
    batch = _batch_size(elements)
    parts = _map_batches(trials, batch, stream, threads, worker)
    successes = sum(part[0] for part in parts)

    ci_low, ci_high = _binomial_interval(successes, trials)
    point = successes / trials
    config = {
        "op": "clique_prob",
        "r": r,
        "d": d,
        "p": p,
        "c_p": c_p,
        "color": color,
        "sampler": sampler,
        "restrict_perfect": restrict_perfect,
        "trials": trials,
        "stream_id": stream.stream_id,
        "batch": batch,
    }
    if spec is not None:
        config["alpha_proj"] = spec.alpha_proj
        config["delta"] = spec.delta
        config["spec_ell"] = spec.ell
    return EstimateResult(
        point=point,
        log_point=_log_point(successes, trials),
        trials=trials,
        successes=successes,
        ci_low=min(ci_low, point),
        ci_high=max(ci_high, point),
        seed=stream.master_seed,
        config=config,
        status=status,
    )


def correction_scaling(
    r: int,
    p: float,
    dims: list[int],
    trials: int,
    stream: RngStream,
    sampler: str = "direct",
    threads: int = 1,
) -> dict:
    """Log-ratio of clique probabilities to their binomial references vs d.

    For each dimension reports ln(P_hat / reference) for both colors, then
    fits the coefficient of the d^{-1/2} regressor through the origin
    (weighted by the delta-method errors of the log estimates).  The
    predicted main-term coefficients are -a^3/p^3 * C(r,3) (red) and
    +a^3/(1-p)^3 * C(r,3) (blue); the derivation carries unquantified
    error factors, so agreement is diagnostic rather than certified.
    """
    if r not in (3, 4):
        raise ValueError(f"scaling diagnostic supports r in {{3, 4}}, got {r}")
    if list(dims) != sorted(dims) or len(dims) < 2:
        raise ValueError("dims must be at least two dimensions in ascending order")
    pairs = r * (r - 1) // 2
    triples = r * (r - 1) * (r - 2) // 6
    a = std_normal_pdf(solve_cp(p))
    rows = []
    fit_data = {"red": [], "blue": []}
    for di, d in enumerate(dims):
        row = {"d": d, "x": d**-0.5}
        for ci, color in enumerate(("red", "blue")):
            sub = stream.offset((2 * di + ci) * STREAM_STRIDE)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                est = estimate_clique_prob(
                    r, d, p, color, trials=trials, stream=sub, sampler=sampler, threads=threads
                )
            log_ref = pairs * (math.log(p) if color == "red" else math.log1p(-p))
            underpowered = est.status != "ok" or est.successes == 0
            if est.successes > 0:
                log_ratio = est.log_point - log_ref
                se = math.sqrt((1.0 - est.point) / est.successes)
                row[f"log_ratio_{color}"] = log_ratio
                row[f"se_{color}"] = se
                if not underpowered:
                    fit_data[color].append((d**-0.5, log_ratio, se))
            else:
                row[f"log_ratio_{color}"] = None
                row[f"se_{color}"] = None
            row[f"underpowered_{color}"] = underpowered
        rows.append(row)

    def fit_origin(points):
        if len(points) < 2:
            return None
        num = sum(x * y / s**2 for x, y, s in points)
        den = sum(x * x / s**2 for x, y, s in points)
        return num / den

    predicted_red = -(a**3 / p**3) * triples
    predicted_blue = (a**3 / (1.0 - p) ** 3) * triples
    fitted_red = fit_origin(fit_data["red"])
    fitted_blue = fit_origin(fit_data["blue"])
    return {
        "op": "correction_scaling",
        "r": r,
        "p": p,
        "a": a,
        "sampler": sampler,
        "trials": trials,
        "seed": stream.master_seed,
        "stream_id": stream.stream_id,
        "dims": list(dims),
        "rows": rows,
        "fitted_red": fitted_red,
        "fitted_blue": fitted_blue,
        "predicted_red": predicted_red,
        "predicted_blue": predicted_blue,
        "terms": "main-term",
    }


def conditional_edge_check(
    p: float, d: int, inner: float, diag: float, trials: int, stream: RngStream
) -> dict:
    """Empirical single-edge probability given a revealed prefix, vs its bound.

    The edge event reduces to one Gaussian coordinate y ~ N(0, 1/d)
    exceeding b = -(c_p/sqrt(d) + inner)/diag, where inner is the inner
    product of the revealed projections and diag the conditioned diagonal
    entry.  The exact probability is Phi(-sqrt(d) b); the exponential
    upper bound (1-p) exp(a (-sqrt(d) b - c_p)/(1-p)) follows from the
    log-concavity of Phi and holds for every diag > 0 and either sign of
    inner; its main term freezes the exponent at a sqrt(d) inner / (1-p).
    """
    if diag <= 0.0:
        raise ValueError(f"diagonal entry must be positive, got {diag}")
    if trials < 1:
        raise ValueError(f"trial count must be positive, got {trials}")
    c_p = solve_cp(p)
    a = std_normal_pdf(c_p)
    root_d = math.sqrt(d)
    b = -(c_p / root_d + inner) / diag
    shift = -root_d * b - c_p  # 0 when inner = 0 and diag = 1

    exact = std_normal_cdf(-root_d * b)
    bound = (1.0 - p) * math.exp(a * shift / (1.0 - p))
    bound_main = (1.0 - p) * math.exp(a * root_d * inner / (1.0 - p))

    def worker(gen, count):
        y = gen.standard_normal(count) / root_d
        return (int((y >= b).sum()),)

    batch = _batch_size(1)
    parts = _map_batches(trials, batch, stream, 1, worker)
    hits = sum(part[0] for part in parts)
    empirical = hits / trials
    se = math.sqrt(max(empirical * (1.0 - empirical), 1.0 / trials) / trials)

    return {
        "op": "conditional_edge_check",
        "p": p,
        "d": d,
        "inner": inner,
        "diag": diag,
        "cutoff": b,
        "trials": trials,
        "seed": stream.master_seed,
        "stream_id": stream.stream_id,
        "empirical": empirical,
        "mc_stderr": se,
        "exact": exact,
        "bound": bound,
        "bound_main_term": bound_main,
        "empirical_within_bound": empirical <= bound + 3.0 * se,
        "exact_within_bound": exact <= bound,
        "passed": (empirical <= bound + 3.0 * se) and exact <= bound,
    }
