"""Bit-packed two-colored complete graphs and their text serialization.

A coloring of K_n is stored as n blue-adjacency bitmask rows (bit j of
row i set iff edge ij is blue); red is the complement off the diagonal.
Rows are Python ints, serialized as fixed-width hex lines (64 vertices
per machine word) under a small key=value header carrying the sampler
provenance (n, d, p, c_p, seed).  The format is stable and byte-exact:
parsing and re-serializing reproduces the file.
"""

from __future__ import annotations

from dataclasses import dataclass, field

WORD_BITS = 64

#: Exact-search capability limit, in 64-bit words per adjacency row.
DEFAULT_MAX_WORDS = 8

_MAGIC = "%gaussian-ramsey-graph v1"
_HEADER_END = "--"
#: Provenance keys serialized (in this order) when present.
_PROVENANCE_KEYS = ("d", "p", "c_p", "seed", "ell", "k", "attempt", "sampler")


class CapabilityError(Exception):
    """The requested graph exceeds the exact engine's configured word budget."""


def capability_check(n: int, max_words: int = DEFAULT_MAX_WORDS) -> None:
    if n > max_words * WORD_BITS:
        raise CapabilityError(
            f"graph on {n} vertices exceeds the exact-engine budget of "
            f"{max_words} words ({max_words * WORD_BITS} vertices)"
        )


def _words_for(n: int) -> int:
    return max(1, (n + WORD_BITS - 1) // WORD_BITS)


@dataclass(frozen=True)
class ColoredGraph:
    """Symmetric red/blue coloring of K_n; blue rows as bitmasks."""

    n: int
    blue_rows: tuple[int, ...]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"vertex count must be positive, got {self.n}")
        object.__setattr__(self, "blue_rows", tuple(int(r) for r in self.blue_rows))
        if len(self.blue_rows) != self.n:
            raise ValueError(f"expected {self.n} adjacency rows, got {len(self.blue_rows)}")
        full = (1 << self.n) - 1
        for i, row in enumerate(self.blue_rows):
            if row & ~full:
                raise ValueError(f"row {i} has bits beyond vertex {self.n - 1}")
            if row >> i & 1:
                raise ValueError(f"self-loop at vertex {i}")
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if (self.blue_rows[i] >> j & 1) != (self.blue_rows[j] >> i & 1):
                    raise ValueError(f"adjacency not symmetric at pair ({i}, {j})")

    @property
    def red_rows(self) -> tuple[int, ...]:
        full = (1 << self.n) - 1
        return tuple((full ^ row ^ (1 << i)) & full for i, row in enumerate(self.blue_rows))

    def blue_edge(self, i: int, j: int) -> bool:
        return bool(self.blue_rows[i] >> j & 1)

    def blue_count(self) -> int:
        return sum(row.bit_count() for row in self.blue_rows) // 2

    def relabeled(self, perm: list[int]) -> "ColoredGraph":
        """The same coloring with vertex i renamed perm[i]."""
        rows = [0] * self.n
        for i in range(self.n):
            for j in range(self.n):
                if self.blue_rows[i] >> j & 1:
                    rows[int(perm[i])] |= 1 << int(perm[j])
        return ColoredGraph(self.n, tuple(rows), dict(self.provenance))


def from_blue_matrix(blue, provenance: dict | None = None) -> ColoredGraph:
    """Build a graph from a boolean matrix; only the upper triangle is read."""
    n = len(blue)
    rows = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if blue[i][j]:
                rows[i] |= 1 << j
                rows[j] |= 1 << i
    return ColoredGraph(n, tuple(rows), provenance or {})


def _format_value(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def graph_to_text(g: ColoredGraph, magic: str = _MAGIC) -> str:
    """Serialize: magic line, key=value header, '--', one hex row per vertex."""
    width = _words_for(g.n) * (WORD_BITS // 4)
    lines = [magic, f"n={g.n}"]
    for key in _PROVENANCE_KEYS:
        if key in g.provenance:
            lines.append(f"{key}={_format_value(g.provenance[key])}")
    for key in sorted(g.provenance):
        if key not in _PROVENANCE_KEYS:
            lines.append(f"{key}={_format_value(g.provenance[key])}")
    lines.append(_HEADER_END)
    lines.extend(format(row, f"0{width}x") for row in g.blue_rows)
    return "\n".join(lines) + "\n"


def _parse_header_value(key: str, raw: str):
    if key in ("n", "d", "seed", "ell", "k", "attempt"):
        return int(raw)
    if key in ("p", "c_p"):
        return float(raw)
    return raw


def graph_from_text(text: str, magic: str = _MAGIC) -> ColoredGraph:
    lines = text.splitlines()
    if not lines or lines[0] != magic:
        raise ValueError(f"not a serialized graph (expected magic line {magic!r})")
    header: dict = {}
    idx = 1
    while idx < len(lines) and lines[idx] != _HEADER_END:
        key, sep, raw = lines[idx].partition("=")
        if not sep:
            raise ValueError(f"malformed header line {lines[idx]!r}")
        header[key] = _parse_header_value(key, raw)
        idx += 1
    if idx == len(lines):
        raise ValueError("missing header terminator")
    if "n" not in header:
        raise ValueError("header missing vertex count n")
    n = header.pop("n")
    rows = [int(line, 16) for line in lines[idx + 1 : idx + 1 + n]]
    if len(rows) != n:
        raise ValueError(f"expected {n} adjacency rows, found {len(rows)}")
    return ColoredGraph(n, tuple(rows), header)
