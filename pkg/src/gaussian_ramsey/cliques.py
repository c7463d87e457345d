"""Exact monochromatic clique search and witness-coloring certificates.

The search is a complete branch-and-bound over packed adjacency bitmasks:
vertices are relabeled into degeneracy order, candidate sets are pruned by
popcount and by a greedy-coloring upper bound, and the first clique of the
requested size is returned (or None, with the guarantee that none exists).
Completeness is what makes a verified certificate meaningful: a coloring
of K_n with no red K_ell and no blue K_k establishes R(ell, k) > n.

The witness search samples fresh colorings (geometric or binomial) and
verifies each; the first attempt index that verifies wins, so results are
reproducible and parallelization cannot change the returned certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from gaussian_ramsey.analytic import solve_cp
from gaussian_ramsey.geometry import adjacency, gram_batch, sample_cloud_batch
from gaussian_ramsey.graphs import (
    DEFAULT_MAX_WORDS,
    ColoredGraph,
    capability_check,
    graph_from_text,
    graph_to_text,
)
from gaussian_ramsey.sampling import RngStream

_CERT_MAGIC = "%gaussian-ramsey-certificate v1"

#: attempts sampled per derived stream in search_witness.
ATTEMPT_BATCH = 256


def _degeneracy_order(adj: list[int], n: int) -> list[int]:
    """Vertices in degeneracy order (smallest remaining degree first)."""
    remaining = (1 << n) - 1
    order = []
    for _ in range(n):
        best_v, best_deg = -1, n + 1
        rem = remaining
        while rem:
            v = (rem & -rem).bit_length() - 1
            rem &= rem - 1
            deg = (adj[v] & remaining).bit_count()
            if deg < best_deg:
                best_v, best_deg = v, deg
        order.append(best_v)
        remaining ^= 1 << best_v
    return order


def _greedy_color_bound(P: int, adj: list[int]) -> int:
    """Number of greedy color classes covering P; an upper bound on clique size in P."""
    colors = 0
    rem = P
    while rem:
        colors += 1
        cand = rem
        while cand:
            v = (cand & -cand).bit_length() - 1
            bit = 1 << v
            rem ^= bit
            cand &= ~(adj[v] | bit)
    return colors


def _search(R: list[int], P: int, size: int, adj: list[int]) -> list[int] | None:
    if len(R) == size:
        return list(R)
    need = size - len(R)
    if P.bit_count() < need:
        return None
    if _greedy_color_bound(P, adj) < need:
        return None
    while P:
        if P.bit_count() < need:
            return None
        v = (P & -P).bit_length() - 1
        P ^= 1 << v
        R.append(v)
        found = _search(R, P & adj[v], size, adj)
        R.pop()
        if found is not None:
            return found
    return None


def find_mono_clique(
    g: ColoredGraph, size: int, color: str, max_words: int = DEFAULT_MAX_WORDS
) -> tuple[int, ...] | None:
    """A monochromatic clique of the given size, or None if none exists.

    Complete: a None return is a proof of absence.  Graphs beyond the
    configured word budget raise CapabilityError instead of silently
    taking exponential time.
    """
    capability_check(g.n, max_words)
    if not 1 <= size <= g.n:
        raise ValueError(f"size must lie in [1, {g.n}], got {size}")
    if color not in ("red", "blue"):
        raise ValueError(f"color must be 'red' or 'blue', got {color!r}")
    if size == 1:
        return (0,)
    rows = g.blue_rows if color == "blue" else g.red_rows
    order = _degeneracy_order(list(rows), g.n)
    # relabel so the branch order follows reversed degeneracy order
    rank = {v: g.n - 1 - i for i, v in enumerate(order)}
    adj = [0] * g.n
    for v in range(g.n):
        row = rows[v]
        while row:
            u = (row & -row).bit_length() - 1
            row &= row - 1
            adj[rank[v]] |= 1 << rank[u]
    found = _search([], (1 << g.n) - 1, size, adj)
    if found is None:
        return None
    inverse = {r: v for v, r in rank.items()}
    return tuple(sorted(inverse[r] for r in found))


@dataclass(frozen=True)
class WitnessCertificate:
    """A coloring together with the outcome of the independent verifier.

    checked is set only by exhaustive search over both colors, never by
    the sampler that produced the graph.
    """

    n: int
    ell: int
    k: int
    graph: ColoredGraph
    checked: bool


def verify_witness(
    g: ColoredGraph, ell: int, k: int, max_words: int = DEFAULT_MAX_WORDS
) -> WitnessCertificate:
    """Exhaustively check for red K_ell and blue K_k; checked=True iff neither exists."""
    red = find_mono_clique(g, ell, "red", max_words) if ell <= g.n else None
    blue = find_mono_clique(g, k, "blue", max_words) if k <= g.n else None
    return WitnessCertificate(n=g.n, ell=ell, k=k, graph=g, checked=red is None and blue is None)


def _binomial_coloring_batch(count: int, n: int, p: float, gen) -> list[list[int]]:
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    u = gen.random((count, len(pairs)))
    batches = []
    for t in range(count):
        rows = [0] * n
        for idx, (i, j) in enumerate(pairs):
            if u[t, idx] >= p:  # blue with probability 1 - p
                rows[i] |= 1 << j
                rows[j] |= 1 << i
        batches.append(rows)
    return batches


def search_witness(
    n: int,
    ell: int,
    k: int,
    sampler: str,
    params: dict,
    max_attempts: int,
    stream: RngStream,
    max_words: int = DEFAULT_MAX_WORDS,
) -> WitnessCertificate | None:
    """Sample colorings until one verifies; None after max_attempts failures.

    sampler "geometric" draws the graph from the Gaussian model with
    params {d, p}; "binomial" colors each edge red independently with
    params {p}.  The attempt index of the returned certificate is recorded
    in the graph provenance.
    """
    capability_check(n, max_words)
    if sampler not in ("geometric", "binomial"):
        raise ValueError(f"sampler must be 'geometric' or 'binomial', got {sampler!r}")
    if max_attempts < 1:
        raise ValueError(f"max_attempts must be positive, got {max_attempts}")
    p = float(params["p"])
    if sampler == "geometric":
        d = int(params["d"])
        c_p = solve_cp(p)
        threshold = -c_p / math.sqrt(d)

    attempt = 0
    bi = 0
    while attempt < max_attempts:
        count = min(ATTEMPT_BATCH, max_attempts - attempt)
        gen = stream.offset(bi).generator()
        if sampler == "geometric":
            clouds = sample_cloud_batch(count, n, d, gen)
            grams = gram_batch(clouds)
            candidates = None
        else:
            candidates = _binomial_coloring_batch(count, n, p, gen)
        for t in range(count):
            if sampler == "geometric":
                provenance = {
                    "d": d,
                    "p": p,
                    "c_p": c_p,
                    "seed": stream.master_seed,
                    "attempt": attempt,
                    "sampler": sampler,
                }
                graph = adjacency(grams[t], c_p, d, provenance)
            else:
                rows = candidates[t]
                provenance = {
                    "p": p,
                    "seed": stream.master_seed,
                    "attempt": attempt,
                    "sampler": sampler,
                }
                graph = ColoredGraph(n, tuple(rows), provenance)
            cert = verify_witness(graph, ell, k, max_words)
            if cert.checked:
                return cert
            attempt += 1
        bi += 1
    return None


def certificate_to_text(cert: WitnessCertificate) -> str:
    provenance = dict(cert.graph.provenance)
    provenance["ell"] = cert.ell
    provenance["k"] = cert.k
    g = ColoredGraph(cert.graph.n, cert.graph.blue_rows, provenance)
    return graph_to_text(g, magic=_CERT_MAGIC)


def certificate_from_text(text: str) -> WitnessCertificate:
    """Parse a serialized certificate; checked=False until re-verified."""
    g = graph_from_text(text, magic=_CERT_MAGIC)
    provenance = dict(g.provenance)
    try:
        ell = int(provenance.pop("ell"))
        k = int(provenance.pop("k"))
    except KeyError as exc:
        raise ValueError("certificate header missing ell or k") from exc
    graph = ColoredGraph(g.n, g.blue_rows, provenance)
    return WitnessCertificate(n=g.n, ell=ell, k=k, graph=graph, checked=False)
