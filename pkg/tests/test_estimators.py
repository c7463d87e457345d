"""Monte-Carlo estimators: moments, coupling, determinism, reporting."""

import math
import warnings

import pytest

from gaussian_ramsey.estimators import (
    _clique_batch,
    conditional_edge_check,
    correction_scaling,
    estimate_clique_prob,
    estimate_edge_density,
)
from gaussian_ramsey.geometry import PerfectSpec
from gaussian_ramsey.sampling import RngStream


def test_single_vertex_probability_one():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        est = estimate_clique_prob(1, 16, 0.4, "red", trials=10, stream=RngStream(1))
    assert est.point == 1.0
    assert est.log_point == 0.0
    assert est.successes == 10


def test_pair_probability_at_half():
    est = estimate_clique_prob(2, 64, 0.5, "blue", trials=10**5, stream=RngStream(2))
    assert abs(est.point - 0.5) <= 4.0 * 0.5 / math.sqrt(10**5)
    assert est.ci_low <= est.point <= est.ci_high
    assert est.status == "ok"


def test_triangle_correction_signs():
    # red triples rarer, blue triples commoner than the binomial references
    trials = 2 * 10**5
    red = estimate_clique_prob(3, 100, 0.4, "red", trials=trials, stream=RngStream(3))
    blue = estimate_clique_prob(3, 100, 0.4, "blue", trials=trials, stream=RngStream(4))
    se_red = math.sqrt(red.point * (1.0 - red.point) / trials)
    se_blue = math.sqrt(blue.point * (1.0 - blue.point) / trials)
    assert red.point < 0.4**3 - 3.0 * se_red
    assert blue.point > 0.6**3 + 3.0 * se_blue


@pytest.mark.parametrize("color", ["red", "blue"])
@pytest.mark.parametrize("p", [0.38, 0.45])
@pytest.mark.parametrize("d", [64, 256])
@pytest.mark.parametrize("r", [2, 3, 4])
def test_samplers_agree(r, d, p, color):
    trials = 50000
    a = estimate_clique_prob(r, d, p, color, trials=trials, stream=RngStream(5), sampler="direct")
    b = estimate_clique_prob(r, d, p, color, trials=trials, stream=RngStream(6), sampler="bartlett")
    se = math.sqrt(
        a.point * (1.0 - a.point) / trials + b.point * (1.0 - b.point) / trials
    )
    assert abs(a.point - b.point) <= 4.0 * se, (r, d, p, color)


def test_red_probability_nonincreasing_in_r():
    trials = 10**5
    points = []
    for r in (2, 3, 4):
        est = estimate_clique_prob(r, 64, 0.4, "red", trials=trials, stream=RngStream(7), sampler="bartlett")
        points.append((est.point, math.sqrt(est.point * (1 - est.point) / trials)))
    for (p1, s1), (p2, s2) in zip(points, points[1:]):
        assert p2 <= p1 + 4.0 * math.hypot(s1, s2)


def test_perfect_restriction_is_subevent_per_trial():
    spec = PerfectSpec(alpha_proj=4.0, delta=0.25, ell=3, d=100, p=0.4, C=2.0)
    gen = RngStream(8).generator()
    success, perfect = _clique_batch(gen, 20000, 3, 100, -0.00253, "red", "bartlett", spec)
    restricted = success & perfect
    assert restricted.sum() <= success.sum()
    assert not (restricted & ~success).any()
    assert perfect.sum() < 20000  # the spec actually bites


def test_perfect_restriction_coupled_estimates():
    spec = PerfectSpec(alpha_proj=4.0, delta=0.25, ell=3, d=100, p=0.4, C=2.0)
    kwargs = dict(trials=10**5, sampler="bartlett", perfect_spec=spec)
    full = estimate_clique_prob(3, 100, 0.4, "red", stream=RngStream(9), **kwargs)
    star = estimate_clique_prob(
        3, 100, 0.4, "red", restrict_perfect=True, stream=RngStream(9), **kwargs
    )
    assert star.successes <= full.successes
    assert star.point <= full.point


def test_thread_count_never_changes_results():
    for kwargs in (
        dict(r=3, d=100, p=0.4, color="red", trials=30000),
        dict(r=4, d=64, p=0.45, color="blue", trials=30000, sampler="bartlett"),
    ):
        runs = [
            estimate_clique_prob(stream=RngStream(10), threads=t, **kwargs) for t in (1, 2, 4)
        ]
        assert runs[0] == runs[1] == runs[2]
    d1 = estimate_edge_density(8, 64, 0.4, 20000, RngStream(11), threads=1)
    d4 = estimate_edge_density(8, 64, 0.4, 20000, RngStream(11), threads=4)
    assert d1 == d4


def test_underpowered_flag_and_warning():
    with pytest.warns(UserWarning, match="noise-dominated"):
        est = estimate_clique_prob(5, 64, 0.4, "red", trials=1000, stream=RngStream(12))
    assert est.status == "underpowered"
    # p^10 = 1.05e-4 -> ~0.1 expected successes in 1000 trials
    assert est.config["trials"] == 1000


def test_density_at_half():
    est = estimate_edge_density(2, 256, 0.5, 10**5, RngStream(13))
    assert abs(est.point - 0.5) <= 4.0 * 0.5 / math.sqrt(10**5)
    assert est.config["pairs"] == 10**5


def test_density_cluster_ci_reasonable():
    # n = 16 clouds: interval from cloud-level variation still covers 1 - p
    est = estimate_edge_density(16, 256, 0.4, 2000, RngStream(14))
    assert est.ci_low <= 0.6 <= est.ci_high or abs(est.point - 0.6) < 0.01
    assert est.ci_low <= est.point <= est.ci_high


def test_density_converges_with_dimension():
    # per-pair bias shrinks as d grows
    p = 0.381966
    biases = []
    for i, d in enumerate((4, 256)):
        est = estimate_edge_density(32, d, p, 4000, RngStream(15, 10**6 * i))
        biases.append(abs(est.point - (1.0 - p)))
    assert biases[1] < biases[0]


def test_conditional_edge_zero_projection_equality():
    rec = conditional_edge_check(0.38, 10000, 0.0, 1.0, 50000, RngStream(16))
    assert rec["exact"] == pytest.approx(1.0 - 0.38, abs=1e-12)
    assert rec["bound"] == pytest.approx(1.0 - 0.38, abs=1e-12)
    assert rec["bound_main_term"] == pytest.approx(1.0 - 0.38, abs=1e-12)
    assert rec["passed"]


@pytest.mark.parametrize("inner", [1e-3, -1e-3])
def test_conditional_edge_signed_projections(inner):
    rec = conditional_edge_check(0.38, 10000, inner, 1.0, 10**5, RngStream(17))
    assert rec["exact"] < rec["bound"]
    assert rec["passed"]
    # gap is second order in the threshold shift eps = sqrt(d) * inner = 0.1
    eps = math.sqrt(10000) * abs(inner)
    assert 0.0 < rec["bound"] - rec["exact"] < eps * eps


@pytest.mark.parametrize("diag", [0.9, 1.1])
def test_conditional_edge_offcenter_diagonal(diag):
    rec = conditional_edge_check(0.38, 10000, 5e-4, diag, 10**5, RngStream(18))
    assert rec["exact"] <= rec["bound"]
    assert rec["passed"]


def test_conditional_edge_domain():
    with pytest.raises(ValueError):
        conditional_edge_check(0.38, 100, 0.0, 0.0, 10, RngStream(1))


def test_correction_scaling_signs_and_fit():
    rep = correction_scaling(3, 0.4, [64, 256], 10**5, RngStream(19), sampler="bartlett")
    for row in rep["rows"]:
        assert row["log_ratio_red"] < 0.0
        assert row["log_ratio_blue"] > 0.0
        assert not row["underpowered_red"]
    assert rep["fitted_red"] < 0.0
    assert rep["fitted_blue"] > 0.0
    assert rep["predicted_red"] == pytest.approx(-rep["a"] ** 3 / 0.4**3, rel=1e-12)


def test_correction_scaling_domain():
    with pytest.raises(ValueError):
        correction_scaling(5, 0.4, [64, 256], 100, RngStream(1))
    with pytest.raises(ValueError):
        correction_scaling(3, 0.4, [256, 64], 100, RngStream(1))


def test_estimate_record_shape():
    est = estimate_clique_prob(2, 32, 0.4, "blue", trials=5000, stream=RngStream(20))
    rec = est.as_record()
    assert set(rec) == {
        "point",
        "log_point",
        "trials",
        "successes",
        "ci_low",
        "ci_high",
        "seed",
        "status",
        "config",
    }
    assert rec["seed"] == 20
    assert rec["log_point"] == pytest.approx(math.log(rec["point"]))


def test_zero_successes_log_is_minus_inf():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        est = estimate_clique_prob(5, 64, 0.05, "red", trials=200, stream=RngStream(21))
    assert est.successes == 0
    assert est.point == 0.0
    assert est.log_point == -math.inf
    assert est.ci_low == 0.0 and est.ci_high > 0.0