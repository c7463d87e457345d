"""Empirical validators for the supporting probability inequalities.

Each check samples the quantity an inequality controls and compares the
empirical frequency or moment against the stated closed-form bound; a
check passes when empirical <= bound + 3 * (MC standard error).  Bounds
far below the resolution of the trial budget are still checked (a zero
count passes) but flagged vacuous.

Checks:

* norm_concentration   -- P[ ||x|| outside (1-delta, 1+delta) ] <= 2 exp(-delta^2 d / 10)
                          for x ~ N(0, I_d/d).
* projection_tail      -- P[ ||pi_W(x)|| >= alpha sqrt(ell)/sqrt(d) ] <= (p/10)^(10 C ell)
                          for an s-dimensional subspace W, alpha = 100 C ln(10/p).
                          By rotation invariance W is taken to be the span of the
                          first s coordinates, so only those coordinates are drawn.
* exp_square_moment    -- E[exp(lambda X^2)] <= 1 + 4 lambda sigma^2 / (1 - 2 lambda sigma^2)
                          for centered X with variance proxy sigma^2 (sampled Gaussian),
                          requires 0 <= lambda < 1/(2 sigma^2).
* quadratic_moment     -- E[exp(lambda S)], S = sum_{i<j} X_i X_j of independent
                          lower-truncated N(0,1/d) coordinates, against
                          exp(lambda E S + lambda^2 k^2/d * sum E[X_j]^2 + 4|lambda| k/d),
                          requires d >= 4 |lambda| k.

chi_square_tail_check covers the chi-square deviation inequalities
P[Y - d >= 2 sqrt(dt) + 2t] <= e^-t and P[d - Y >= 2 sqrt(dt)] <= e^-t.
"""

from __future__ import annotations

import math

import numpy as np

from gaussian_ramsey.sampling import RngStream, TruncatedSpec, sample_truncated, truncated_mean

#: registered check names for the dispatcher.
CHECKS = ("norm_concentration", "projection_tail", "exp_square_moment", "quadratic_moment")

#: target elements per sampling batch (doubles); keeps batches ~32 MB.
_BATCH_ELEMENTS = 1 << 22


def _frequency(stream: RngStream, trials: int, per_trial: int, batch_draw) -> tuple[int, float]:
    """Count events over batched trials; batch_draw(gen, count) -> hit count."""
    batch = max(1, _BATCH_ELEMENTS // max(1, per_trial))
    hits = 0
    done = 0
    bi = 0
    while done < trials:
        count = min(batch, trials - done)
        hits += int(batch_draw(stream.offset(bi).generator(), count))
        done += count
        bi += 1
    freq = hits / trials
    se = math.sqrt(freq * (1.0 - freq) / trials)
    return hits, se


def _norm_concentration(params: dict, trials: int, stream: RngStream) -> dict:
    d, delta = int(params["d"]), float(params["delta"])
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    bound = 2.0 * math.exp(-delta * delta * d / 10.0)

    def draw(gen, count):
        x = gen.standard_normal((count, d)) / math.sqrt(d)
        norms = np.linalg.norm(x, axis=1)
        return ((norms <= 1.0 - delta) | (norms >= 1.0 + delta)).sum()

    hits, se = _frequency(stream, trials, d, draw)
    freq = hits / trials
    return {
        "empirical": freq,
        "bound": bound,
        "mc_stderr": se,
        "passed": freq <= bound + 3.0 * se,
        "vacuous": bound < 1.0 / trials,
    }


def _projection_tail(params: dict, trials: int, stream: RngStream) -> dict:
    d, ell, s = int(params["d"]), int(params["ell"]), int(params["s"])
    p, C = float(params["p"]), float(params["C"])
    if not 1 <= s <= d:
        raise ValueError(f"subspace dimension must lie in [1, d], got s={s}")
    if s > C * ell:
        raise ValueError(f"requires s <= C*ell, got s={s} > {C * ell}")
    alpha = 100.0 * C * math.log(10.0 / p)
    threshold_sq = alpha * alpha * ell / d
    log_bound = 10.0 * C * ell * math.log(p / 10.0)
    bound = math.exp(log_bound) if log_bound > -700 else 0.0

    def draw(gen, count):
        # rotation invariance: project onto the first s coordinate axes,
        # so the remaining d - s coordinates never need to be drawn
        coords = gen.standard_normal((count, s)) / math.sqrt(d)
        return ((coords * coords).sum(axis=1) >= threshold_sq).sum()

    hits, se = _frequency(stream, trials, s, draw)
    freq = hits / trials
    return {
        "empirical": freq,
        "bound": bound,
        "log_bound": log_bound,
        "alpha_proj": alpha,
        "mc_stderr": se,
        "passed": freq <= bound + 3.0 * se,
        "vacuous": bound < 1.0 / trials,
    }


def _exp_square_moment(params: dict, trials: int, stream: RngStream) -> dict:
    sigma2, lam = float(params["sigma2"]), float(params["lam"])
    if sigma2 <= 0.0:
        raise ValueError(f"variance proxy must be positive, got {sigma2}")
    if lam < 0.0 or lam >= 1.0 / (2.0 * sigma2):
        raise ValueError(f"requires 0 <= lambda < 1/(2 sigma^2) = {1.0 / (2.0 * sigma2)}, got {lam}")
    bound = 1.0 + 4.0 * lam * sigma2 / (1.0 - 2.0 * lam * sigma2)
    gen = stream.generator()
    x = gen.standard_normal(trials) * math.sqrt(sigma2)
    vals = np.exp(lam * x * x)
    empirical = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return {
        "empirical": empirical,
        "bound": bound,
        "mc_stderr": se,
        "passed": empirical <= bound + 3.0 * se,
        "vacuous": False,
    }


def _quadratic_moment(params: dict, trials: int, stream: RngStream) -> dict:
    d, k, lam = int(params["d"]), int(params["k"]), float(params["lam"])
    cutoffs = np.asarray(params["cutoffs"], dtype=float)
    if cutoffs.shape != (k,):
        raise ValueError(f"need exactly k={k} cutoffs, got shape {cutoffs.shape}")
    if d < 4.0 * abs(lam) * k:
        raise ValueError(f"requires d >= 4 |lambda| k = {4.0 * abs(lam) * k}, got d={d}")
    specs = [TruncatedSpec(cutoff=float(b), side="lower", d=d) for b in cutoffs]
    means = np.array([truncated_mean(spec) for spec in specs])
    mean_S = 0.5 * (means.sum() ** 2 - (means**2).sum())
    exponent = lam * mean_S + lam * lam * k * k / d * (means**2).sum() + 4.0 * abs(lam) * k / d
    bound = math.exp(exponent)

    gen = stream.generator()
    cols = [sample_truncated(spec, gen, size=trials) for spec in specs]
    X = np.stack(cols, axis=1)
    row_sum = X.sum(axis=1)
    S = 0.5 * (row_sum * row_sum - (X * X).sum(axis=1))
    vals = np.exp(lam * S)
    empirical = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return {
        "empirical": empirical,
        "bound": bound,
        "mean_S": float(mean_S),
        "mc_stderr": se,
        "passed": empirical <= bound + 3.0 * se,
        "vacuous": False,
    }


_DISPATCH = {
    "norm_concentration": _norm_concentration,
    "projection_tail": _projection_tail,
    "exp_square_moment": _exp_square_moment,
    "quadratic_moment": _quadratic_moment,
}


def validate_bound(name: str, params: dict, trials: int, stream: RngStream) -> dict:
    """Run one registered empirical check; see the module docstring."""
    if name not in _DISPATCH:
        raise ValueError(f"unknown check {name!r}; choose from {CHECKS}")
    if trials < 1:
        raise ValueError(f"trial count must be positive, got {trials}")
    result = _DISPATCH[name](dict(params), trials, stream)
    result.update(
        {
            "check": name,
            "params": dict(params),
            "trials": trials,
            "seed": stream.master_seed,
            "stream_id": stream.stream_id,
        }
    )
    return result


def chi_square_tail_check(freedom: int, t: float, trials: int, stream: RngStream) -> dict:
    """Both one-sided chi-square deviation frequencies against e^-t."""
    if freedom < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {freedom}")
    if t < 0.0:
        raise ValueError(f"deviation parameter must be nonnegative, got {t}")
    bound = math.exp(-t)
    upper_cut = freedom + 2.0 * math.sqrt(freedom * t) + 2.0 * t
    lower_cut = freedom - 2.0 * math.sqrt(freedom * t)
    gen = stream.generator()
    y = gen.chisquare(freedom, size=trials)
    up = int((y >= upper_cut).sum())
    lo = int((y <= lower_cut).sum())
    freq_up, freq_lo = up / trials, lo / trials
    se_up = math.sqrt(freq_up * (1.0 - freq_up) / trials)
    se_lo = math.sqrt(freq_lo * (1.0 - freq_lo) / trials)
    return {
        "check": "chi_square_tail",
        "freedom": freedom,
        "t": t,
        "trials": trials,
        "seed": stream.master_seed,
        "stream_id": stream.stream_id,
        "bound": bound,
        "empirical_upper": freq_up,
        "empirical_lower": freq_lo,
        "mc_stderr_upper": se_up,
        "mc_stderr_lower": se_lo,
        "passed": freq_up <= bound + 3.0 * se_up and freq_lo <= bound + 3.0 * se_lo,
        "vacuous": bound < 1.0 / trials,
    }
