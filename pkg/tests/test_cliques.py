"""Exact clique search, witness verification, and the sampling search."""

from itertools import combinations

import numpy as np
import pytest

from gaussian_ramsey.cliques import (
    WitnessCertificate,
    certificate_from_text,
    certificate_to_text,
    find_mono_clique,
    search_witness,
    verify_witness,
)
from gaussian_ramsey.graphs import CapabilityError, ColoredGraph, from_blue_matrix
from gaussian_ramsey.sampling import RngStream


def brute_has_clique(g: ColoredGraph, size: int, color: str) -> bool:
    rows = g.blue_rows if color == "blue" else g.red_rows
    return any(
        all(rows[i] >> j & 1 for i, j in combinations(sub, 2))
        for sub in combinations(range(g.n), size)
    )


def complete_blue(n: int) -> ColoredGraph:
    return from_blue_matrix(np.ones((n, n), bool))


def pentagon() -> ColoredGraph:
    blue = np.zeros((5, 5), bool)
    for i in range(5):
        blue[i, (i + 1) % 5] = blue[(i + 1) % 5, i] = True
    return from_blue_matrix(blue)


def test_complete_blue_k5():
    g = complete_blue(5)
    assert find_mono_clique(g, 5, "blue") == (0, 1, 2, 3, 4)
    assert find_mono_clique(g, 2, "red") is None


def test_pentagon_no_mono_triangle():
    g = pentagon()
    # oracle: all 10 triples, by hand
    assert not brute_has_clique(g, 3, "blue")
    assert not brute_has_clique(g, 3, "red")
    assert find_mono_clique(g, 3, "blue") is None
    assert find_mono_clique(g, 3, "red") is None


def test_found_cliques_are_cliques():
    gen = RngStream(50).generator()
    for _ in range(100):
        n = int(gen.integers(3, 13))
        blue = np.triu(gen.random((n, n)) < 0.6, 1)
        g = from_blue_matrix(blue | blue.T)
        for color in ("red", "blue"):
            for size in (2, 3, 4):
                if size > n:
                    continue
                found = find_mono_clique(g, size, color)
                if found is not None:
                    rows = g.blue_rows if color == "blue" else g.red_rows
                    assert len(found) == size
                    assert all(rows[i] >> j & 1 for i, j in combinations(found, 2))


def test_search_matches_bruteforce_on_random_graphs():
    gen = RngStream(51).generator()
    for _ in range(1000):
        n = int(gen.integers(2, 13))
        density = float(gen.random())
        blue = np.triu(gen.random((n, n)) < density, 1)
        g = from_blue_matrix(blue | blue.T)
        for color in ("red", "blue"):
            for size in range(2, min(n, 5) + 1):
                got = find_mono_clique(g, size, color) is not None
                assert got == brute_has_clique(g, size, color), (n, size, color)


def test_size_one_and_domain():
    g = pentagon()
    assert find_mono_clique(g, 1, "red") == (0,)
    with pytest.raises(ValueError):
        find_mono_clique(g, 0, "red")
    with pytest.raises(ValueError):
        find_mono_clique(g, 6, "red")
    with pytest.raises(ValueError):
        find_mono_clique(g, 3, "green")


def test_capability_error():
    big = ColoredGraph(513, tuple([0] * 513))
    with pytest.raises(CapabilityError):
        find_mono_clique(big, 3, "blue")
    with pytest.raises(CapabilityError):
        verify_witness(big, 3, 3)


def test_verify_pentagon_and_tiny():
    assert verify_witness(pentagon(), 3, 3).checked
    tiny = ColoredGraph(2, (0b10, 0b01))
    assert verify_witness(tiny, 3, 3).checked  # no triple exists at all
    assert not verify_witness(complete_blue(6), 3, 3).checked


def test_verify_relabeling_invariance():
    gen = RngStream(52).generator()
    for _ in range(50):
        n = int(gen.integers(3, 10))
        blue = np.triu(gen.random((n, n)) < 0.5, 1)
        g = from_blue_matrix(blue | blue.T)
        perm = list(gen.permutation(n))
        h = g.relabeled(perm)
        for ell, k in ((3, 3), (3, 4)):
            assert verify_witness(g, ell, k).checked == verify_witness(h, ell, k).checked


def test_search_trivial_single_vertex():
    cert = search_witness(1, 3, 3, "binomial", {"p": 0.5}, 10, RngStream(53))
    assert cert is not None
    assert cert.checked
    assert cert.graph.provenance["attempt"] == 0


def test_search_geometric_k5():
    cert = search_witness(5, 3, 3, "geometric", {"d": 400, "p": 0.5}, 1000, RngStream(101))
    assert cert is not None and cert.checked
    assert not brute_has_clique(cert.graph, 3, "red")
    assert not brute_has_clique(cert.graph, 3, "blue")
    assert 0 <= cert.graph.provenance["attempt"] < 1000


def test_search_exhausts_budget_on_impossible_target():
    # no 2-coloring of K_6 avoids both monochromatic triangles
    assert search_witness(6, 3, 3, "binomial", {"p": 0.5}, 200, RngStream(54)) is None


def test_search_first_hit_wins_deterministically():
    a = search_witness(5, 3, 3, "binomial", {"p": 0.5}, 1000, RngStream(55))
    b = search_witness(5, 3, 3, "binomial", {"p": 0.5}, 1000, RngStream(55))
    assert a == b


def test_certificate_round_trip():
    cert = search_witness(5, 3, 3, "geometric", {"d": 400, "p": 0.5}, 1000, RngStream(101))
    text = certificate_to_text(cert)
    back = certificate_from_text(text)
    assert back.checked is False  # parsing never trusts the claim
    rechecked = verify_witness(back.graph, back.ell, back.k)
    assert rechecked.checked
    again = certificate_to_text(
        WitnessCertificate(back.n, back.ell, back.k, back.graph, rechecked.checked)
    )
    assert again == text


def test_certificate_requires_clique_sizes():
    cert = search_witness(2, 3, 3, "binomial", {"p": 0.5}, 10, RngStream(56))
    text = certificate_to_text(cert).replace("ell=3\n", "")
    with pytest.raises(ValueError):
        certificate_from_text(text)


def test_tampered_certificate_fails_verification():
    g = pentagon()
    cert = WitnessCertificate(5, 3, 3, g, True)
    text = certificate_to_text(cert)
    # flip one edge: make 0-2 blue, closing the blue triangle 0-1-2
    rows = list(g.blue_rows)
    rows[0] |= 1 << 2
    rows[2] |= 1 << 0
    bad = ColoredGraph(5, tuple(rows), g.provenance)
    bad_text = certificate_to_text(WitnessCertificate(5, 3, 3, bad, True))
    assert bad_text != text
    parsed = certificate_from_text(bad_text)
    assert not verify_witness(parsed.graph, 3, 3).checked
