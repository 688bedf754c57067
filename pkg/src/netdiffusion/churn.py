"""Slowly churning directed graphs and measures of how fast they change.

The generator is a dyad-resampling chain.  Each change event picks an
off-diagonal dyad uniformly at random and redraws it as Bernoulli(p), so the
independent Bernoulli(p) graph is exactly stationary.  Events may leave the
dyad as it was, so the event count overstates realized change.  The number
of events between consecutive cross-sections is Poisson(rate).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, DimensionError, ParseError, UndefinedCorrelationError


@dataclass(frozen=True)
class ChurnProcess:
    n: int
    p: float
    rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise DataError(f"n must be >= 2, got {self.n}")
        if not 0 < self.p < 1:
            raise DataError(f"p must lie in (0, 1), got {self.p}")
        if not self.rate >= 0:
            raise DataError(f"rate must be non-negative, got {self.rate}")

    @property
    def dyads(self) -> int:
        return self.n * (self.n - 1)

    def rng(self, stream: int = 0) -> np.random.Generator:
        """Private stream ``stream`` of this process (0: seed graph, 1: churn)."""
        return np.random.default_rng([self.seed, stream])


@dataclass
class NetworkSequence:
    """Ordered cross-sections ``G_0 .. G_T`` stacked as a ``(T+1, n, n)`` array."""

    graphs: np.ndarray = field(repr=False)
    rate: float = float("nan")

    def __post_init__(self):
        g = np.asarray(self.graphs)
        if g.ndim != 3 or g.shape[0] < 1 or g.shape[1] != g.shape[2]:
            raise DimensionError(f"graphs must have shape (T+1, n, n), got {g.shape}")
        self.graphs = np.ascontiguousarray(g, dtype=np.int8)
        check_adjacency(self.graphs)

    def __len__(self) -> int:
        return self.graphs.shape[0]

    def __getitem__(self, i) -> np.ndarray:
        return self.graphs[i]

    @property
    def n(self) -> int:
        return self.graphs.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, NetworkSequence):
            return NotImplemented
        same_rate = self.rate == other.rate or (np.isnan(self.rate) and np.isnan(other.rate))
        return same_rate and np.array_equal(self.graphs, other.graphs)


def check_adjacency(g) -> None:
    g = np.asarray(g)
    if not np.all((g == 0) | (g == 1)):
        raise DataError("adjacency entries must be 0 or 1")
    if np.any(np.diagonal(g, axis1=-2, axis2=-1)):
        raise DataError("adjacency diagonal must be zero")


def _offdiag_mask(n: int) -> np.ndarray:
    return ~np.eye(n, dtype=bool)


def _dyad_to_cell(k: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Map dyad index in ``[0, n(n-1))`` to (row, col) skipping the diagonal."""
    i = k // (n - 1)
    j = k % (n - 1)
    j = j + (j >= i)
    return i, j


def sample_equilibrium_graph(proc: ChurnProcess, rng: np.random.Generator | None = None) -> np.ndarray:
    """Draw from the stationary distribution: independent Bernoulli(p) dyads."""
    rng = proc.rng(0) if rng is None else rng
    g = (rng.random((proc.n, proc.n)) < proc.p).astype(np.int8)
    np.fill_diagonal(g, 0)
    return g


def churn_step(g: np.ndarray, events: int, p: float, rng) -> np.ndarray:
    """Apply ``events`` dyad resamplings to a copy of ``g``."""
    n = g.shape[0]
    out = g.copy()
    if events == 0:
        return out
    k = rng.integers(0, n * (n - 1), size=events)
    vals = (rng.random(events) < p).astype(np.int8)
    # a dyad hit several times keeps its last draw
    last = events - 1 - np.unique(k[::-1], return_index=True)[1]
    i, j = _dyad_to_cell(k[last], n)
    out[i, j] = vals[last]
    return out


def evolve(proc: ChurnProcess, g0, steps: int, rng: np.random.Generator | None = None) -> NetworkSequence:
    """Run the churn chain for ``steps`` intervals; returns ``steps + 1`` graphs."""
    if steps < 1:
        raise DataError(f"steps must be >= 1, got {steps}")
    g0 = np.asarray(g0)
    if g0.shape != (proc.n, proc.n):
        raise DimensionError(f"g0 is {g0.shape}, process has n={proc.n}")
    check_adjacency(g0)
    rng = proc.rng(1) if rng is None else rng
    graphs = np.empty((steps + 1, proc.n, proc.n), dtype=np.int8)
    graphs[0] = g0
    for t in range(1, steps + 1):
        graphs[t] = churn_step(graphs[t - 1], int(rng.poisson(proc.rate)), proc.p, rng)
    return NetworkSequence(graphs, rate=float(proc.rate))


def _pair(g1, g2):
    a, b = np.asarray(g1), np.asarray(g2)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"graphs have shapes {a.shape} and {b.shape}")
    mask = _offdiag_mask(a.shape[0])
    return a[mask].astype(float), b[mask].astype(float)


def hamming_distance(g1, g2) -> int:
    """Number of off-diagonal cells whose edge state differs."""
    a, b = _pair(g1, g2)
    return int(np.count_nonzero(a != b))


def graph_correlation(g1, g2) -> float:
    """Pearson correlation of the off-diagonal cells of two adjacency matrices."""
    a, b = _pair(g1, g2)
    a -= a.mean()
    b -= b.mean()
    ssa, ssb = a @ a, b @ b
    if ssa == 0 or ssb == 0:
        raise UndefinedCorrelationError("graph correlation undefined: a graph has constant off-diagonal entries")
    return float(np.clip((a @ b) / np.sqrt(ssa * ssb), -1.0, 1.0))


def velocity_profile(seq: NetworkSequence) -> list[tuple[int, float]]:
    """Per consecutive pair: (Hamming distance, correlation or nan if undefined)."""
    out = []
    for t in range(1, len(seq)):
        h = hamming_distance(seq[t - 1], seq[t])
        try:
            r = graph_correlation(seq[t - 1], seq[t])
        except UndefinedCorrelationError:
            r = float("nan")
        out.append((h, r))
    return out


def mean_velocity(seq: NetworkSequence) -> float:
    """Mean Hamming distance between consecutive cross-sections."""
    if len(seq) < 2:
        raise DataError("velocity needs at least two cross-sections")
    g = seq.graphs
    return float(np.count_nonzero(g[1:] != g[:-1]) / (len(seq) - 1))


def mean_correlation(seq: NetworkSequence) -> float:
    """Mean graph correlation over consecutive pairs where it is defined (nan if none)."""
    if len(seq) < 2:
        raise DataError("correlation needs at least two cross-sections")
    vals = [r for _, r in velocity_profile(seq) if not np.isnan(r)]
    return float(np.mean(vals)) if vals else float("nan")


_RATE_RE = re.compile(r"^#\s*rate\s+(\S+)\s*$")


def save_sequence(seq: NetworkSequence, path) -> None:
    """Header ``N T``, then T blocks of N rows of 0/1 digits separated by blank lines.

    The rate, when known, goes in a ``# rate <r>`` comment line.
    """
    t, n, _ = seq.graphs.shape
    out = []
    if not np.isnan(seq.rate):
        out.append(f"# rate {seq.rate!r}")
    out.append(f"{n} {t}")
    for b, g in enumerate(seq.graphs):
        if b:
            out.append("")
        out.extend(" ".join(str(int(x)) for x in row) for row in g)
    Path(path).write_text("\n".join(out) + "\n")


def load_sequence(path) -> NetworkSequence:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror or exc}", path) from exc
    rate = float("nan")
    header = None
    rows: list[tuple[int, list[int]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s:
            continue
        if s.startswith("#"):
            m = _RATE_RE.match(s)
            if m:
                try:
                    rate = float(m.group(1))
                except ValueError:
                    raise ParseError(f"bad rate comment {s!r}", path, lineno) from None
            continue
        tokens = s.split()
        if header is None:
            try:
                n, t = (int(x) for x in tokens)
            except ValueError:
                raise ParseError(f"header must be 'N T', got {s!r}", path, lineno) from None
            if n < 1 or t < 1:
                raise ParseError("N and T must be positive", path, lineno)
            header = (n, t)
            continue
        if any(x not in ("0", "1") for x in tokens):
            raise ParseError("entries must be 0 or 1", path, lineno)
        if len(tokens) != header[0]:
            raise ParseError(f"row has {len(tokens)} entries, expected {header[0]}", path, lineno)
        rows.append((lineno, [int(x) for x in tokens]))
    if header is None:
        raise ParseError("empty file", path)
    n, t = header
    if len(rows) != n * t:
        raise ParseError(f"header declares {t} blocks of {n} rows, found {len(rows)} rows", path)
    graphs = np.array([r for _, r in rows], dtype=np.int8).reshape(t, n, n)
    for b in range(t):
        if np.any(np.diagonal(graphs[b])):
            lineno = rows[b * n + int(np.flatnonzero(np.diagonal(graphs[b]))[0])][0]
            raise ParseError(f"block {b + 1} has a nonzero diagonal entry", path, lineno)
    return NetworkSequence(graphs, rate=rate)
